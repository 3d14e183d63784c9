# cython: boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled Z/2 column reduction with clearing."""
import numpy as np
cimport numpy as cnp
from libcpp.vector cimport vector

cnp.import_array()

ctypedef long long i64


cdef inline void _sym_diff(vector[i64]& acc, const vector[i64]& other,
                           vector[i64]& tmp) noexcept nogil:
    # acc <- acc xor other; both sorted ascending
    cdef size_t i = 0, j = 0
    cdef size_t na = acc.size(), nb = other.size()
    tmp.clear()
    while i < na and j < nb:
        if acc[i] < other[j]:
            tmp.push_back(acc[i]); i += 1
        elif acc[i] > other[j]:
            tmp.push_back(other[j]); j += 1
        else:
            i += 1; j += 1
    while i < na:
        tmp.push_back(acc[i]); i += 1
    while j < nb:
        tmp.push_back(other[j]); j += 1
    acc.swap(tmp)


def reduce_columns(const long long[:] indptr, const long long[:] indices,
                   const long long[:] dims):
    """Return the pivot row of every reduced column (-1 for zero columns)."""
    cdef Py_ssize_t m = dims.shape[0]
    low_arr = np.full(m, -1, dtype=np.int64)
    cdef long long[:] low = low_arr
    if m == 0:
        return low_arr
    cdef vector[i64] owner
    cdef vector[char] cleared
    cdef vector[vector[i64]] cols
    owner.assign(m, -1)
    cleared.assign(m, 0)
    cols.resize(m)
    cdef vector[i64] col, tmp
    cdef i64 d, maxd = 0, piv, j, k
    cdef Py_ssize_t jj
    with nogil:
        for jj in range(m):
            if dims[jj] > maxd:
                maxd = dims[jj]
        d = maxd
        while d >= 1:
            for jj in range(m):
                if dims[jj] != d or cleared[jj]:
                    continue
                col.clear()
                for k in range(indptr[jj], indptr[jj + 1]):
                    col.push_back(indices[k])
                while col.size() > 0:
                    piv = col.back()
                    j = owner[piv]
                    if j < 0:
                        break
                    _sym_diff(col, cols[j], tmp)
                if col.size() > 0:
                    piv = col.back()
                    low[jj] = piv
                    owner[piv] = jj
                    cleared[piv] = 1
                    cols[jj].swap(col)
            d -= 1
    return low_arr
