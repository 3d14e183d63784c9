"""Persistence diagrams by boundary-matrix reduction over Z/2."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .complexes import Filtration
from .errors import GuardError, InputError, ParameterError

__all__ = [
    "PersistenceDiagram",
    "PersistentBettiQuery",
    "reduce",
    "persistent_betti",
    "betti_rank_oracle",
    "read_diagram_csv",
    "write_diagram_csv",
]


@dataclass(frozen=True, eq=False)
class PersistenceDiagram:
    """Multiset of (birth, death, dim) points; ``death`` may be ``inf``."""

    births: np.ndarray
    deaths: np.ndarray
    dims: np.ndarray
    source_label: str | None = None

    def __post_init__(self):
        b = np.asarray(self.births, dtype=float).reshape(-1)
        d = np.asarray(self.deaths, dtype=float).reshape(-1)
        k = np.asarray(self.dims, dtype=np.int64).reshape(-1)
        if not (b.shape == d.shape == k.shape):
            raise InputError("births, deaths and dims must have equal length")
        if np.any(np.isnan(b)) or np.any(np.isnan(d)) or np.any(~np.isfinite(b)):
            raise InputError("births must be finite and deaths not NaN")
        if np.any(b > d):
            raise InputError("every diagram point needs birth <= death")
        if np.any(k < 0):
            raise InputError("homological dimensions must be >= 0")
        for name, arr in (("births", b), ("deaths", d), ("dims", k)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_points(cls, points, source_label=None) -> "PersistenceDiagram":
        """Build from an iterable of (birth, death, dim) triples."""
        arr = np.array(list(points), dtype=float).reshape(-1, 3)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2].astype(np.int64), source_label)

    @classmethod
    def empty(cls) -> "PersistenceDiagram":
        return cls(np.empty(0), np.empty(0), np.empty(0, dtype=np.int64))

    def __len__(self) -> int:
        return int(self.births.size)

    def points(self, dim: int | None = None) -> list[tuple[float, float, int]]:
        mask = slice(None) if dim is None else self.dims == dim
        return list(zip(self.births[mask].tolist(), self.deaths[mask].tolist(),
                        self.dims[mask].tolist()))

    def in_dim(self, dim: int) -> np.ndarray:
        """(k, 2) array of birth/death pairs in one dimension."""
        mask = self.dims == dim
        return np.column_stack([self.births[mask], self.deaths[mask]])

    def same_multiset(self, other: "PersistenceDiagram") -> bool:
        return sorted(self.points()) == sorted(other.points())


@dataclass(frozen=True)
class PersistentBettiQuery:
    q: int
    r: float
    s: float

    def __post_init__(self):
        if self.q < 0:
            raise ParameterError("q must be >= 0")
        if not (0 <= self.r <= self.s < math.inf):
            raise ParameterError(f"need 0 <= r <= s < inf, got r={self.r}, s={self.s}")


def reduce(filtration: Filtration, label: str | None = None) -> PersistenceDiagram:
    """Persistence diagram of a filtration.

    Standard column reduction with clearing; zero-length pairs (birth equal to
    death) are kept.  Unpaired positive simplices give points at infinity.
    """
    m = len(filtration)
    if m == 0:
        return PersistenceDiagram.empty()
    low = _kernels.reduce_columns(
        filtration.boundary_indptr, filtration.boundary_indices,
        np.ascontiguousarray(filtration.dims, dtype=np.int64),
    )
    vals, dims = filtration.values, filtration.dims
    deaths_cols = np.flatnonzero(low >= 0)
    births_rows = low[deaths_cols]
    paired = np.zeros(m, dtype=bool)
    paired[deaths_cols] = True
    paired[births_rows] = True
    essential = np.flatnonzero(~paired)
    b = np.concatenate([vals[births_rows], vals[essential]])
    d = np.concatenate([vals[deaths_cols], np.full(essential.size, np.inf)])
    k = np.concatenate([dims[births_rows], dims[essential]])
    order = np.lexsort((d, b, k))
    return PersistenceDiagram(b[order], d[order], k[order], label)


def persistent_betti(diagram: PersistenceDiagram, query: PersistentBettiQuery) -> int:
    """Number of classes in dimension q born by r and still alive at s."""
    mask = (diagram.dims == query.q) & (diagram.births <= query.r) & (diagram.deaths > query.s)
    return int(np.count_nonzero(mask))


# ---------------------------------------------------------------------------
# independent oracle: ranks of sublevel boundary matrices over GF(2)


def _gf2_rank(rows: list[int]) -> int:
    """Rank of a GF(2) matrix given as a list of row bitmasks."""
    basis: dict[int, int] = {}
    rank = 0
    for r in rows:
        while r:
            top = r.bit_length() - 1
            if top in basis:
                r ^= basis[top]
            else:
                basis[top] = r
                rank += 1
                break
    return rank


def _gf2_nullspace(cols: list[int], n_cols: int) -> list[int]:
    """Kernel basis of the map whose j-th column is the bitmask ``cols[j]``.

    Returned vectors are bitmasks over column indices.
    """
    pivots: dict[int, tuple[int, int]] = {}
    kernel = []
    for j in range(n_cols):
        v, combo = cols[j], 1 << j
        while v:
            top = v.bit_length() - 1
            if top in pivots:
                pv, pc = pivots[top]
                v ^= pv
                combo ^= pc
            else:
                pivots[top] = (v, combo)
                break
        if not v:
            kernel.append(combo)
    return kernel


def betti_rank_oracle(filtration: Filtration, query: PersistentBettiQuery,
                      max_simplices: int = 300) -> int:
    """Persistent Betti number by direct linear algebra on sublevel complexes.

    beta = dim Z_q(K_r) - dim(Z_q(K_r) intersect B_q(K_s)), with the
    intersection dimension from dim Z + dim B - dim(Z + B).
    """
    if len(filtration) > max_simplices:
        raise GuardError(f"oracle refuses filtrations larger than {max_simplices} simplices")
    q, r, s = query.q, query.r, query.s
    simplices = [(v, x) for v, x in zip(filtration.vertices, filtration.values.tolist())]
    q_simp = sorted(v for v, x in simplices if len(v) == q + 1 and x <= s)
    if not q_simp:
        return 0
    index = {v: i for i, v in enumerate(q_simp)}
    values = dict(simplices)
    in_r = [v for v in q_simp if values[v] <= r]

    # cycles of K_r: kernel of the q-boundary restricted to q-simplices in K_r
    if q == 0:
        z_basis = [1 << index[v] for v in in_r]
    else:
        face_index: dict[tuple[int, ...], int] = {}
        cols = []
        for v in in_r:
            mask = 0
            for drop in range(len(v)):
                f = v[:drop] + v[drop + 1:]
                mask ^= 1 << face_index.setdefault(f, len(face_index))
            cols.append(mask)
        kern = _gf2_nullspace(cols, len(in_r))
        z_basis = []
        for combo in kern:
            vec = 0
            for j, v in enumerate(in_r):
                if combo >> j & 1:
                    vec ^= 1 << index[v]
            z_basis.append(vec)
    if not z_basis:
        return 0

    # boundaries in K_s: images of (q+1)-simplices present at s
    b_basis = []
    for v, x in simplices:
        if len(v) == q + 2 and x <= s:
            mask = 0
            for drop in range(len(v)):
                mask ^= 1 << index[v[:drop] + v[drop + 1:]]
            b_basis.append(mask)
    dim_z = _gf2_rank(z_basis)
    dim_b = _gf2_rank(b_basis)
    dim_sum = _gf2_rank(z_basis + b_basis)
    return dim_z - (dim_z + dim_b - dim_sum)


# ---------------------------------------------------------------------------
# CSV serialization: columns dim,birth,death with "inf" for infinity


def write_diagram_csv(diagram: PersistenceDiagram, path: str | Path | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dim", "birth", "death"])
    for b, d, k in diagram.points():
        w.writerow([k, repr(b), "inf" if math.isinf(d) else repr(d)])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_diagram_csv(path_or_text: str | Path, label: str | None = None) -> PersistenceDiagram:
    p = Path(path_or_text) if not str(path_or_text).lstrip().startswith("dim") else None
    text = p.read_text() if p is not None else str(path_or_text)
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip().lower() for c in rows[0]] != ["dim", "birth", "death"]:
        raise InputError("diagram CSV must start with header dim,birth,death")
    pts = []
    for n, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            k, b, d = int(row[0]), float(row[1]), float(row[2])
        except (ValueError, IndexError) as exc:
            raise InputError(f"bad diagram row {n}: {row}") from exc
        pts.append((b, d, k))
    if label is None and p is not None:
        label = p.stem
    return PersistenceDiagram.from_points(pts, label)
