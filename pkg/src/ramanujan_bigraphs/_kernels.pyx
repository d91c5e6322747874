# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Closed non-backtracking walk counts by meeting forward and backward frontiers."""

import numpy as np


cdef Py_ssize_t _expand(const long long[::1] indptr, const long long[::1] indices,
                        long long[:, ::1] val, long long[:, ::1] supp, Py_ssize_t[::1] size,
                        Py_ssize_t level) nogil:
    """val[level + 1] = walk counts one step past the support of val[level]."""
    cdef Py_ssize_t i, j, n = 0
    cdef long long x, y, c
    for i in range(size[level]):
        x = supp[level, i]
        c = val[level, x]
        for j in range(indptr[x], indptr[x + 1]):
            y = indices[j]
            if val[level + 1, y] == 0:
                supp[level + 1, n] = y
                n += 1
            val[level + 1, y] += c
    size[level + 1] = n
    return n


def closed_walk_counts(const long long[::1] indptr, const long long[::1] indices,
                       const long long[::1] rev_indptr, const long long[::1] rev_indices,
                       const long long[::1] starts, int m_max):
    """counts[m] = number of closed NB walks of length m through the given start edges.

    Successor lists may repeat an edge (multiplicities). A walk of length m
    splits into m // 2 forward steps from the start and m - m // 2 backward
    steps into it; the count is the dot product of the two frontiers.
    """
    cdef Py_ssize_t n_edges = indptr.shape[0] - 1
    cdef Py_ssize_t la = m_max // 2, lb = m_max - m_max // 2
    cdef long long[::1] counts = np.zeros(m_max + 1, dtype=np.int64)
    cdef long long[:, ::1] fval = np.zeros((la + 1, n_edges), dtype=np.int64)
    cdef long long[:, ::1] bval = np.zeros((lb + 1, n_edges), dtype=np.int64)
    cdef long long[:, ::1] fsupp = np.empty((la + 1, n_edges), dtype=np.int64)
    cdef long long[:, ::1] bsupp = np.empty((lb + 1, n_edges), dtype=np.int64)
    cdef Py_ssize_t[::1] fsize = np.zeros(la + 1, dtype=np.intp)
    cdef Py_ssize_t[::1] bsize = np.zeros(lb + 1, dtype=np.intp)
    cdef Py_ssize_t si, t, i, m, a, b
    cdef long long e0, x, s
    with nogil:
        for si in range(starts.shape[0]):
            e0 = starts[si]
            fval[0, e0] = 1
            fsupp[0, 0] = e0
            fsize[0] = 1
            bval[0, e0] = 1
            bsupp[0, 0] = e0
            bsize[0] = 1
            for t in range(la):
                _expand(indptr, indices, fval, fsupp, fsize, t)
            for t in range(lb):
                _expand(rev_indptr, rev_indices, bval, bsupp, bsize, t)
            for m in range(1, m_max + 1):
                a = m // 2
                b = m - a
                s = 0
                for i in range(fsize[a]):
                    x = fsupp[a, i]
                    s += fval[a, x] * bval[b, x]
                counts[m] += s
            for t in range(la + 1):
                for i in range(fsize[t]):
                    fval[t, fsupp[t, i]] = 0
            for t in range(lb + 1):
                for i in range(bsize[t]):
                    bval[t, bsupp[t, i]] = 0
    return np.asarray(counts)
