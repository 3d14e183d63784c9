"""Pure-Python Z/2 column reduction with clearing.

Columns are Python integers used as bitsets, so column addition is a single
XOR and the pivot is ``bit_length() - 1``.
"""
import numpy as np


def reduce_columns(indptr, indices, dims):
    """Return the pivot row of every reduced column (-1 for zero columns)."""
    m = len(dims)
    low = np.full(m, -1, dtype=np.int64)
    if m == 0:
        return low
    indptr = np.asarray(indptr).tolist()
    indices = np.asarray(indices).tolist()
    dims = np.asarray(dims).tolist()
    owner: dict[int, int] = {}
    reduced: dict[int, int] = {}
    cleared = set()
    for d in range(max(dims), 0, -1):
        for j in range(m):
            if dims[j] != d or j in cleared:
                continue
            col = 0
            for r in indices[indptr[j]:indptr[j + 1]]:
                col ^= 1 << r
            while col:
                piv = col.bit_length() - 1
                other = owner.get(piv)
                if other is None:
                    break
                col ^= reduced[other]
            if col:
                piv = col.bit_length() - 1
                low[j] = piv
                owner[piv] = j
                reduced[j] = col
                cleared.add(piv)
    return low
