# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Must stay bit-for-bit in step with _kernels_py."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def sorted_tails(const double[:, ::1] profiles):
    """Row-wise descending sort followed by suffix sums.

    out[r, l - 2] is the sum of the entries of row r ranked l..d, for l = 2..d.
    """
    cdef Py_ssize_t n = profiles.shape[0], d = profiles.shape[1]
    cdef Py_ssize_t r, i, j
    cdef double v, acc
    width = d - 1 if d > 1 else 0
    out = np.zeros((n, width), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double[::1] buf = np.empty(d, dtype=np.float64)
    for r in range(n):
        # insertion sort, descending; d is small
        for i in range(d):
            v = profiles[r, i]
            j = i
            while j > 0 and buf[j - 1] < v:
                buf[j] = buf[j - 1]
                j -= 1
            buf[j] = v
        acc = 0.0
        for i in range(d - 1, 0, -1):
            acc = acc + buf[i]
            o[r, i - 1] = acc
    return out


def weighted_min_sums(const double[::1] weights, const double[::1] values, const double[::1] ks):
    """out[c] = sum_j weights[j] * min(values[j], ks[c]), accumulated in j order."""
    cdef Py_ssize_t m = weights.shape[0], nk = ks.shape[0]
    cdef Py_ssize_t c, j
    cdef double acc, v, k
    out = np.empty(nk, dtype=np.float64)
    cdef double[::1] o = out
    for c in range(nk):
        k = ks[c]
        acc = 0.0
        for j in range(m):
            v = values[j]
            if k < v:
                v = k
            acc = acc + weights[j] * v
        o[c] = acc
    return out


def phase1_simplex(double[:, ::1] tab, long[::1] basis, Py_ssize_t n_enter,
                   double eps, long max_iter):
    """Bland's-rule simplex iterations on a phase-1 tableau, in place.

    Rows 0..M-1 are constraints, row M holds reduced costs; the last column is
    the right-hand side. Only columns < n_enter may enter the basis.
    Returns (status, iterations): status 0 optimal, 1 unbounded, 2 iteration cap.
    """
    cdef Py_ssize_t M = tab.shape[0] - 1
    cdef Py_ssize_t R = tab.shape[1] - 1
    cdef Py_ssize_t i, j, c, enter, leave
    cdef long it = 0
    cdef double best, ratio, piv, f
    while True:
        enter = -1
        for j in range(n_enter):
            if tab[M, j] < -eps:
                enter = j
                break
        if enter < 0:
            return 0, it
        if it >= max_iter:
            return 2, it
        leave = -1
        best = 0.0
        for i in range(M):
            if tab[i, enter] > eps:
                ratio = tab[i, R] / tab[i, enter]
                if leave < 0 or ratio < best - eps:
                    leave = i
                    best = ratio
                elif ratio <= best + eps and basis[i] < basis[leave]:
                    leave = i
                    best = ratio
        if leave < 0:
            return 1, it
        piv = tab[leave, enter]
        for c in range(R + 1):
            tab[leave, c] = tab[leave, c] / piv
        for i in range(M + 1):
            if i == leave:
                continue
            f = tab[i, enter]
            if f != 0.0:
                for c in range(R + 1):
                    tab[i, c] = tab[i, c] - f * tab[leave, c]
        basis[leave] = enter
        it += 1
