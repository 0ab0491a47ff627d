"""Tail-sum coherence measures and their capped variants.

For a profile x sorted in descending order,

    tail_sum(x, l)       = x[l] + ... + x[d]
    capped_tail(x, l, k) = min(x[l]/k, 1) + ... + min(x[d]/k, 1)

(1-based ranks). Both are symmetric, concave and vanish on basis states, so
their convex roofs are coherence monotones. ``capped_tail`` with k = 1 is
``tail_sum``.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .states import (
    TAU_ZERO,
    DensityMatrix,
    Ensemble,
    PureState,
    ProbVector,
    ValidationError,
    profile,
)

DEFAULT_K_GRID = (0.01, 0.1, 0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class MeasureId:
    kind: str  # "tail" or "capped"
    l: int
    k: float = None

    def __post_init__(self):
        if self.kind not in ("tail", "capped"):
            raise ValidationError(f"unknown measure kind {self.kind!r}")
        if self.l < 2:
            raise ValidationError("measure index l must be at least 2")
        if self.kind == "capped":
            if self.k is None or not (0.0 < self.k <= 1.0):
                raise ValidationError("capped measure needs k in (0, 1]")
        elif self.k is not None:
            raise ValidationError("tail measure takes no k")

    def to_json(self):
        out = {"kind": self.kind, "l": self.l}
        if self.kind == "capped":
            out["k"] = self.k
        return out

    @classmethod
    def from_json(cls, obj):
        k = obj.get("k")
        return cls(obj["kind"], int(obj["l"]), None if k is None else float(k))


def _entries(x):
    return x.entries if isinstance(x, ProbVector) else np.asarray(x, dtype=np.float64)


def _check_l(l, d):
    if not 2 <= l <= d:
        raise ValidationError(f"l={l} outside [2, {d}]")


def sorted_desc(x):
    # stable on ties by original index
    x = _entries(x)
    return x[np.argsort(-x, kind="stable")]


def tail_sums(x):
    """All tail sums (tail_sum(x, l) for l = 2..d) in one pass."""
    x = _entries(x)
    return kernels.sorted_tails(np.ascontiguousarray(x[None, :]))[0]


def tail_sum(x, l):
    x = _entries(x)
    _check_l(l, x.size)
    return float(tail_sums(x)[l - 2])


def capped_tail(x, l, k):
    x = _entries(x)
    _check_l(l, x.size)
    if not 0.0 < k <= 1.0:
        raise ValidationError(f"k={k} outside (0, 1]")
    tail = sorted_desc(x)[l - 1:]
    acc = 0.0
    for v in tail[::-1]:
        acc += min(v / k, 1.0)
    return acc


def evaluate(x, measure):
    if measure.kind == "tail":
        return tail_sum(x, measure.l)
    return capped_tail(x, measure.l, measure.k)


def pure_coherence(psi, measure):
    return evaluate(profile(psi), measure)


def ensemble_coherence(ensemble, measure):
    return float(sum(w * pure_coherence(s, measure) for w, s in ensemble))


def coherence_fingerprint(psi):
    """(tail_sum(profile, l) for l = 2..d); empty for d = 1."""
    return tail_sums(profile(psi))


def measure_grid(d, ks=DEFAULT_K_GRID):
    """Every tail measure for l = 2..d plus capped measures at the given k values."""
    out = [MeasureId("tail", l) for l in range(2, d + 1)]
    out += [MeasureId("capped", l, float(k)) for l in range(2, d + 1) for k in ks]
    return out


def _decomposition(vectors, isometry):
    """Ensemble from rows of isometry @ vectors.T; vectors holds sqrt(lambda) e_i columns."""
    w = isometry @ vectors.T
    weights = np.einsum("ij,ij->i", w.conj(), w).real
    keep = weights > TAU_ZERO
    w, weights = w[keep], weights[keep]
    states = tuple(PureState.normalized(row) for row in w)
    return Ensemble(weights / weights.sum(), states)


def _random_isometry(rng, rows, cols):
    z = rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _random_unitary_near_identity(rng, n, scale):
    h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = (h + h.conj().T) * (scale / 2)
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(1j * vals)) @ vecs.conj().T


def convex_roof_upper_bound(rho, measure, trials=200, seed=0, hint=None, refine=200):
    """Best ensemble average over sampled decompositions of ``rho``.

    Decompositions come from sqrt(rho) mixed by random isometries, starting with
    the eigen-decomposition, then a local random walk around the incumbent.
    The returned value is an upper bound on the convex roof, never a claim of
    optimality. ``hint`` is an optional known decomposition of ``rho``.

    Returns (value, witnessing ensemble).
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    d = m.shape[0]
    vals, vecs = np.linalg.eigh(m)
    keep = vals > TAU_ZERO
    vectors = vecs[:, keep] * np.sqrt(vals[keep])
    r = vectors.shape[1]
    rng = np.random.default_rng(seed)

    best_u = np.eye(r, dtype=np.complex128)
    best_e = _decomposition(vectors, best_u)
    best = ensemble_coherence(best_e, measure)
    if r == 1:
        return best, best_e

    for _ in range(max(trials, 1) - 1):
        rows = int(rng.integers(r, min(d * d, 2 * r + 2) + 1))
        u = _random_isometry(rng, rows, r)
        e = _decomposition(vectors, u)
        v = ensemble_coherence(e, measure)
        if v < best:
            best, best_u, best_e = v, u, e

    scale = 0.3
    for _ in range(refine):
        n = best_u.shape[0]
        u = _random_unitary_near_identity(rng, n, scale) @ best_u
        e = _decomposition(vectors, u)
        v = ensemble_coherence(e, measure)
        if v < best:
            best, best_u, best_e = v, u, e
        else:
            scale = max(scale * 0.97, 1e-4)

    if hint is not None:
        v = ensemble_coherence(hint, measure)
        if v < best:
            best, best_e = v, hint
    return best, best_e
