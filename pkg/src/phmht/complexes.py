"""Filtered simplicial complexes built from point clouds.

Two families are provided: the planar alpha complex (Delaunay based, the
workhorse for all simulations) and a capped Vietoris-Rips complex for
arbitrary ambient dimension.  Alpha filtration values are circumradii, i.e.
they live in the same length units as the coordinates.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from scipy.spatial import Delaunay, QhullError, cKDTree

from .errors import InputError, ParameterError

log = logging.getLogger(__name__)

__all__ = [
    "PointCloud",
    "Simplex",
    "Filtration",
    "build_distance_matrix",
    "vietoris_rips",
    "delaunay_2d",
    "alpha_filtration_2d",
]


@dataclass(frozen=True)
class PointCloud:
    """A finite set of points in R^d.

    Parameters
    ----------
    points : array_like, shape (n, d)
    label : str, optional
        Free-form identifier carried into reports.
    """

    points: np.ndarray
    label: str | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(1, -1) if pts.size else pts.reshape(0, 0)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise InputError("a point cloud needs at least one point with >= 1 coordinate")
        if not np.all(np.isfinite(pts)):
            raise InputError("point cloud contains non-finite coordinates")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def ambient_dim(self) -> int:
        return int(self.points.shape[1])

    def __len__(self) -> int:
        return int(self.points.shape[0])


@dataclass(frozen=True)
class Simplex:
    vertices: tuple[int, ...]
    filtration_value: float

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


def _encode(verts: np.ndarray, base: int) -> np.ndarray:
    """Integer key of each sorted vertex row (rows of equal length)."""
    key = np.zeros(verts.shape[0], dtype=np.int64)
    for c in range(verts.shape[1]):
        key = key * base + verts[:, c]
    return key


@dataclass(frozen=True, eq=False)
class Filtration:
    """Simplices in filtration order with a precomputed boundary structure.

    Ordering is by (value, dimension, lexicographic vertices), which refines
    the face order whenever faces never carry larger values than cofaces.

    Attributes
    ----------
    vertices : tuple of tuple of int
    values : ndarray of float
    dims : ndarray of int
    max_dim : int
    n_vertices : int
        Size of the vertex set the simplices index into.
    notes : tuple of str
        Warnings raised while building (e.g. merged duplicate points).
    """

    vertices: tuple[tuple[int, ...], ...]
    values: np.ndarray
    dims: np.ndarray
    max_dim: int
    n_vertices: int
    boundary_indptr: np.ndarray = field(repr=False)
    boundary_indices: np.ndarray = field(repr=False)
    notes: tuple[str, ...] = ()

    @classmethod
    def from_arrays(
        cls,
        by_dim: Sequence[np.ndarray],
        values_by_dim: Sequence[np.ndarray],
        n_vertices: int,
        notes: Sequence[str] = (),
    ) -> "Filtration":
        """Assemble from per-dimension simplex arrays.

        ``by_dim[k]`` is an integer array of shape (m_k, k+1) whose rows are
        sorted vertex indices; ``values_by_dim[k]`` the matching values.
        Raises InputError if a face is missing or enters after its coface.
        """
        blocks = []
        for k, (s, v) in enumerate(zip(by_dim, values_by_dim)):
            s = np.asarray(s, dtype=np.int64).reshape(-1, k + 1)
            v = np.asarray(v, dtype=float).reshape(-1)
            if s.shape[0] != v.shape[0]:
                raise InputError(f"dimension {k}: {s.shape[0]} simplices but {v.shape[0]} values")
            if s.shape[0] == 0:
                continue
            if np.any(np.diff(s, axis=1) <= 0):
                raise InputError(f"dimension {k}: vertices must be strictly increasing")
            if np.any(v < 0) or not np.all(np.isfinite(v)):
                raise InputError(f"dimension {k}: filtration values must be finite and >= 0")
            blocks.append((k, s, v))
        max_dim = max((k for k, _, _ in blocks), default=0)
        width = max_dim + 1
        total = sum(s.shape[0] for _, s, _ in blocks)
        padded = np.full((total, width), -1, dtype=np.int64)
        vals = np.empty(total)
        dims = np.empty(total, dtype=np.int64)
        row = 0
        for k, s, v in blocks:
            m = s.shape[0]
            padded[row:row + m, : k + 1] = s
            vals[row:row + m] = v
            dims[row:row + m] = k
            row += m
        keys = [padded[:, c] for c in range(width - 1, -1, -1)] + [dims, vals]
        order = np.lexsort(keys)
        padded, vals, dims = padded[order], vals[order], dims[order]

        base = max(int(n_vertices), 1)
        if base ** width >= 2**62:
            raise InputError("complex too large to index")
        position = np.empty(total, dtype=np.int64)
        position[:] = np.arange(total)
        indptr = np.zeros(total + 1, dtype=np.int64)
        counts = np.where(dims > 0, dims + 1, 0)
        np.cumsum(counts, out=indptr[1:])
        indices = np.empty(int(indptr[-1]), dtype=np.int64)
        for k in range(1, max_dim + 1):
            cols = np.flatnonzero(dims == k)
            if cols.size == 0:
                continue
            faces_here = np.flatnonzero(dims == k - 1)
            face_keys = _encode(padded[faces_here, :k], base)
            face_sort = np.argsort(face_keys, kind="stable")
            sorted_keys = face_keys[face_sort]
            simp = padded[cols, : k + 1]
            found = np.empty((cols.size, k + 1), dtype=np.int64)
            for drop in range(k + 1):
                face = np.delete(simp, drop, axis=1)
                fk = _encode(face, base)
                loc = np.searchsorted(sorted_keys, fk)
                loc = np.minimum(loc, max(sorted_keys.size - 1, 0))
                if sorted_keys.size == 0 or np.any(sorted_keys[loc] != fk):
                    raise InputError(f"a face of a {k}-simplex is missing from the filtration")
                found[:, drop] = faces_here[face_sort[loc]]
            found.sort(axis=1)
            if np.any(found[:, -1] >= cols):
                raise InputError("filtration property violated: a face enters after its coface")
            for c in range(k + 1):
                indices[indptr[cols] + c] = found[:, c]

        verts = tuple(tuple(int(x) for x in r if x >= 0) for r in padded.tolist())
        vals.setflags(write=False)
        dims.setflags(write=False)
        return cls(verts, vals, dims, max_dim, int(n_vertices), indptr, indices, tuple(notes))

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self) -> Iterator[Simplex]:
        for v, x in zip(self.vertices, self.values.tolist()):
            yield Simplex(v, x)

    @property
    def simplices(self) -> list[Simplex]:
        return list(self)

    def boundary(self, j: int) -> np.ndarray:
        """Filtration indices of the facets of simplex ``j`` (ascending)."""
        return self.boundary_indices[self.boundary_indptr[j]:self.boundary_indptr[j + 1]]


def build_distance_matrix(cloud: PointCloud) -> np.ndarray:
    pts = cloud.points
    diff = pts[:, None, :] - pts[None, :, :]
    dm = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    np.fill_diagonal(dm, 0.0)
    return dm


def vietoris_rips(dm: np.ndarray, max_dim: int, max_radius: float) -> Filtration:
    """Vietoris-Rips filtration truncated at ``max_radius`` and ``max_dim``.

    A simplex is present iff all its pairwise distances are <= max_radius,
    and enters at its longest edge.
    """
    if max_dim < 0:
        raise ParameterError("max_dim must be >= 0")
    if not max_radius > 0:
        raise ParameterError("max_radius must be > 0")
    dm = np.asarray(dm, dtype=float)
    if dm.ndim != 2 or dm.shape[0] != dm.shape[1]:
        raise InputError("distance matrix must be square")
    if not np.all(np.isfinite(dm)):
        raise InputError("distance matrix contains non-finite values")
    n = dm.shape[0]
    nbrs = [set(np.flatnonzero((dm[i] <= max_radius) & (np.arange(n) > i)).tolist()) for i in range(n)]

    by_dim: list[list[tuple[int, ...]]] = [[(i,) for i in range(n)]]
    vals: list[list[float]] = [[0.0] * n]
    frontier = [((i,), nbrs[i]) for i in range(n)]
    for _ in range(max_dim):
        nxt = []
        simp, sv = [], []
        for s, cand in frontier:
            for v in sorted(cand):
                t = s + (v,)
                simp.append(t)
                sv.append(float(max(dm[a, b] for a, b in itertools.combinations(t, 2))))
                nxt.append((t, cand & nbrs[v]))
        if not simp:
            break
        by_dim.append(simp)
        vals.append(sv)
        frontier = nxt
    arrays = [np.array(s, dtype=np.int64).reshape(-1, k + 1) for k, s in enumerate(by_dim)]
    return Filtration.from_arrays(arrays, [np.array(v) for v in vals], n)


def _dedupe(points: np.ndarray) -> tuple[np.ndarray, list[str]]:
    # points closer than this fraction of the extent are merged; qhull
    # otherwise drops them from the triangulation and the complex falls apart
    extent = float(np.ptp(points, axis=0).max()) if points.shape[0] > 1 else 0.0
    tol = 1e-10 * extent
    if tol > 0:
        pairs = cKDTree(points).query_pairs(tol, output_type="ndarray")
        drop = set()
        for i, j in sorted(map(tuple, pairs.tolist())):
            if i not in drop:
                drop.add(j)
        keep = np.array([i for i in range(points.shape[0]) if i not in drop], dtype=np.int64)
    else:
        keep = np.arange(min(points.shape[0], 1), dtype=np.int64)
    if keep.size == points.shape[0]:
        return points, []
    msg = f"merged {points.shape[0] - keep.size} duplicate point(s)"
    log.warning(msg)
    return points[keep], [msg]


def delaunay_2d(cloud: PointCloud) -> np.ndarray:
    """Delaunay triangles of a planar cloud, shape (T, 3), rows sorted.

    Degenerate input (fewer than three points, or all collinear) yields an
    empty array rather than an error.
    """
    if cloud.ambient_dim != 2:
        raise InputError("delaunay_2d needs a planar point cloud")
    pts = cloud.points
    if len(cloud) < 3:
        return np.empty((0, 3), dtype=np.int64)
    try:
        tri = Delaunay(pts)
    except QhullError:
        return np.empty((0, 3), dtype=np.int64)
    simp = np.sort(tri.simplices.astype(np.int64), axis=1)
    a, b, c = pts[simp[:, 0]], pts[simp[:, 1]], pts[simp[:, 2]]
    cross = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    simp = simp[cross != 0]
    order = np.lexsort((simp[:, 2], simp[:, 1], simp[:, 0]))
    return simp[order]


def _collinear_edges(pts: np.ndarray) -> np.ndarray:
    n = pts.shape[0]
    if n < 2:
        return np.empty((0, 2), dtype=np.int64)
    direction = pts[np.argmax(np.linalg.norm(pts - pts[0], axis=1))] - pts[0]
    order = np.argsort(pts @ direction, kind="stable")
    edges = np.sort(np.column_stack([order[:-1], order[1:]]), axis=1)
    return edges.astype(np.int64)


def alpha_filtration_2d(cloud: PointCloud, squared: bool = False) -> Filtration:
    """Planar alpha filtration with circumradius (length) values.

    Triangles enter at their circumradius.  An edge enters at half its
    length unless an opposite vertex of an incident triangle lies strictly
    inside its diametral disk, in which case it enters with the cheapest
    incident triangle.  Duplicate and near-coincident points are merged first
    and the merge is recorded in ``Filtration.notes``.

    ``squared=True`` reports squared circumradii instead, the convention of
    GUDHI and R's TDA package.  The simplex order is unchanged.
    """
    if cloud.ambient_dim != 2:
        raise InputError("alpha_filtration_2d needs a planar point cloud")
    pts, notes = _dedupe(cloud.points)
    n = pts.shape[0]
    tris = delaunay_2d(PointCloud(pts)) if n >= 3 else np.empty((0, 3), dtype=np.int64)
    verts = np.arange(n, dtype=np.int64).reshape(-1, 1)
    vvals = np.zeros(n)

    if tris.shape[0] == 0:
        edges = _collinear_edges(pts)
        evals = 0.5 * np.linalg.norm(pts[edges[:, 0]] - pts[edges[:, 1]], axis=1)
        if squared:
            evals = evals * evals
        return Filtration.from_arrays([verts, edges], [vvals, evals], n, notes)

    a, b, c = pts[tris[:, 0]], pts[tris[:, 1]], pts[tris[:, 2]]
    la = np.linalg.norm(b - c, axis=1)
    lb = np.linalg.norm(a - c, axis=1)
    lc = np.linalg.norm(a - b, axis=1)
    area2 = np.abs((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))
    tvals = la * lb * lc / (2.0 * area2)

    # edge slots: (edge vertices, opposite vertex, triangle id)
    t_ids = np.repeat(np.arange(tris.shape[0]), 3)
    e_all = np.concatenate(
        [tris[:, [0, 1]], tris[:, [0, 2]], tris[:, [1, 2]]]
    ).reshape(3, -1, 2).transpose(1, 0, 2).reshape(-1, 2)
    opp = tris[:, [2, 1, 0]].reshape(-1)
    keys = e_all[:, 0] * n + e_all[:, 1]
    ukeys, inv = np.unique(keys, return_inverse=True)
    edges = np.column_stack([ukeys // n, ukeys % n]).astype(np.int64)

    p, q, o = pts[e_all[:, 0]], pts[e_all[:, 1]], pts[opp]
    obtuse = np.einsum("ij,ij->i", p - o, q - o) < 0
    attached = np.zeros(edges.shape[0], dtype=bool)
    np.logical_or.at(attached, inv, obtuse)
    min_tri = np.full(edges.shape[0], np.inf)
    np.minimum.at(min_tri, inv, tvals[t_ids])
    half = 0.5 * np.linalg.norm(pts[edges[:, 0]] - pts[edges[:, 1]], axis=1)
    evals = np.where(attached, min_tri, half)
    # float guard: a triangle never enters before its edges
    tri_edge_max = evals[inv].reshape(-1, 3).max(axis=1)
    tvals = np.maximum(tvals, tri_edge_max)
    if squared:
        evals, tvals = evals * evals, tvals * tvals

    return Filtration.from_arrays([verts, edges, tris], [vvals, evals, tvals], n, notes)
