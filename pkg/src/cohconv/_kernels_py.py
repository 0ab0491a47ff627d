"""Pure-Python/numpy versions of the compiled kernels in _kernels.pyx.

Accumulation order matches the compiled loops so both backends agree to the bit.
"""

import numpy as np


def sorted_tails(profiles):
    profiles = np.ascontiguousarray(profiles, dtype=np.float64)
    n, d = profiles.shape
    out = np.zeros((n, max(d - 1, 0)), dtype=np.float64)
    for r in range(n):
        buf = sorted(profiles[r].tolist(), reverse=True)
        acc = 0.0
        for i in range(d - 1, 0, -1):
            acc = acc + buf[i]
            out[r, i - 1] = acc
    return out


def weighted_min_sums(weights, values, ks):
    weights = np.asarray(weights, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    ks = np.asarray(ks, dtype=np.float64)
    acc = np.zeros(ks.shape[0], dtype=np.float64)
    for w, v in zip(weights, values):
        acc = acc + w * np.minimum(v, ks)
    return acc


def phase1_simplex(tab, basis, n_enter, eps, max_iter):
    M = tab.shape[0] - 1
    R = tab.shape[1] - 1
    it = 0
    while True:
        negative = np.flatnonzero(tab[M, :n_enter] < -eps)
        if negative.size == 0:
            return 0, it
        if it >= max_iter:
            return 2, it
        enter = int(negative[0])
        leave = -1
        best = 0.0
        for i in range(M):
            a = tab[i, enter]
            if a > eps:
                ratio = tab[i, R] / a
                if leave < 0 or ratio < best - eps:
                    leave, best = i, ratio
                elif ratio <= best + eps and basis[i] < basis[leave]:
                    leave, best = i, ratio
        if leave < 0:
            return 1, it
        tab[leave] = tab[leave] / tab[leave, enter]
        for i in range(M + 1):
            if i == leave:
                continue
            f = tab[i, enter]
            if f != 0.0:
                tab[i] = tab[i] - f * tab[leave]
        basis[leave] = enter
        it += 1
