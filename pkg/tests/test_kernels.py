import os
import subprocess
import sys

import numpy as np
import pytest

from phmht import _kernels, _reduce_py
from phmht.complexes import PointCloud, alpha_filtration_2d, build_distance_matrix, vietoris_rips

try:
    from phmht._reduce import reduce_columns as compiled
except ImportError:  # extension not built
    compiled = None


def _args(f):
    return f.boundary_indptr, f.boundary_indices, np.ascontiguousarray(f.dims, dtype=np.int64)


@pytest.mark.skipif(compiled is None, reason="compiled kernel not built")
@pytest.mark.parametrize("seed", range(8))
def test_compiled_matches_python(seed):
    rng = np.random.default_rng(seed)
    pts = PointCloud(rng.uniform(size=(int(rng.integers(3, 400)), 2)))
    for f in (alpha_filtration_2d(pts),
              vietoris_rips(build_distance_matrix(PointCloud(pts.points[:25])), 2, 0.4)):
        a = _args(f)
        np.testing.assert_array_equal(np.asarray(compiled(*a)), _reduce_py.reduce_columns(*a))


def test_python_kernel_handles_empty_and_vertices():
    empty = (np.zeros(1, np.int64), np.empty(0, np.int64), np.empty(0, np.int64))
    assert _reduce_py.reduce_columns(*empty).size == 0
    verts = (np.zeros(4, np.int64), np.empty(0, np.int64), np.zeros(3, np.int64))
    assert _reduce_py.reduce_columns(*verts).tolist() == [-1, -1, -1]


def test_backend_selection_env():
    code = "from phmht import _kernels; print(_kernels.BACKEND)"
    env = dict(os.environ, PHMHT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"
    assert _kernels.BACKEND in ("python", "cython")
