"""Decision procedures for conversion under incoherent operations.

Source is always the first argument.

Ensemble to ensemble uses the capped family in its aggregate form,
min(tail_l / k, 1), for every l and k in (0, 1]. Multiplying by k > 0 turns
the comparison into

    sum_j p_j min(S_j, k)  >=  sum_i q_i min(T_i, k)

with S_j, T_i the l-th tail sums. Both sides are piecewise linear in k, zero at
k = 0 and with kinks only at tail-sum values, so it suffices to check the
kinks inside (0, 1] together with k = 1. Rational k alone would also do, but
the finite kink set is both smaller and exact.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .measures import tail_sums
from .states import TAU_ZERO, DimensionMismatch, Ensemble, PureState, profile

DEFAULT_TOL = 1e-9


class InfeasibleError(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    l: int
    k: float
    lhs: float
    rhs: float

    def to_json(self):
        return {"l": self.l, "k": self.k, "lhs": self.lhs, "rhs": self.rhs}


@dataclass(frozen=True)
class ConversionVerdict:
    convertible: bool
    violations: tuple = field(default_factory=tuple)

    def __post_init__(self):
        assert self.convertible == (len(self.violations) == 0)

    def __bool__(self):
        return self.convertible

    @property
    def worst(self):
        """Largest rhs - lhs over the recorded violations, 0 when convertible."""
        return max((v.rhs - v.lhs for v in self.violations), default=0.0)

    def to_json(self):
        return {"convertible": self.convertible, "violations": [v.to_json() for v in self.violations]}


def _verdict(violations):
    return ConversionVerdict(not violations, tuple(violations))


def _same_dim(a, b):
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions differ: {a.dim} vs {b.dim}")


def ensemble_tails(ensemble):
    """Matrix of tail sums, one row per member, columns l = 2..d."""
    prof = np.array([profile(s).entries for s in ensemble.states])
    return kernels.sorted_tails(np.ascontiguousarray(prof))


def can_convert_pure_pure(phi, psi, tol=DEFAULT_TOL):
    _same_dim(phi, psi)
    return can_convert_pure_ensemble(phi, Ensemble.singleton(psi), tol)


def can_convert_pure_ensemble(phi, target, tol=DEFAULT_TOL):
    _same_dim(phi, target)
    lhs = tail_sums(profile(phi))
    rhs = target.weights @ ensemble_tails(target) if target.dim > 1 else np.zeros(0)
    violations = [
        Violation(l, 1.0, float(a), float(b))
        for l, a, b in zip(range(2, phi.dim + 1), lhs, rhs)
        if a < b - tol
    ]
    return _verdict(violations)


def _breakpoints_from(src_col, tgt_col):
    vals = np.concatenate([src_col, tgt_col, [1.0]])
    vals = vals[(vals > 0.0) & (vals <= 1.0)]
    return np.unique(vals)


def breakpoints(source, target, l):
    """Kinks of the k-comparison for index l: tail sums in (0, 1] plus k = 1."""
    _same_dim(source, target)
    return _breakpoints_from(ensemble_tails(source)[:, l - 2], ensemble_tails(target)[:, l - 2]).tolist()


def can_convert_ensembles(source, target, tol=DEFAULT_TOL):
    """Check every l and every breakpoint k; keeps the worst violating k per l."""
    _same_dim(source, target)
    s_tails = ensemble_tails(source)
    t_tails = ensemble_tails(target)
    p, q = source.weights, target.weights
    violations = []
    for col in range(source.dim - 1):
        s = np.ascontiguousarray(s_tails[:, col])
        t = np.ascontiguousarray(t_tails[:, col])
        ks = _breakpoints_from(s, t)
        lhs = kernels.weighted_min_sums(p, s, ks)
        rhs = kernels.weighted_min_sums(q, t, ks)
        gap = rhs - lhs
        worst = int(np.argmax(gap))
        if gap[worst] > tol:
            violations.append(Violation(col + 2, float(ks[worst]), float(lhs[worst]), float(rhs[worst])))
    return _verdict(violations)


def can_convert(source, target, tol=DEFAULT_TOL):
    """Dispatch on pure states vs ensembles."""
    if isinstance(target, PureState):
        target = Ensemble.singleton(target)
    if isinstance(source, PureState):
        return can_convert_pure_ensemble(source, target, tol)
    return can_convert_ensembles(source, target, tol)


def reduce_to_target(p, a_prime, a, tol=TAU_ZERO):
    """Lower a_prime entrywise, scanning in index order, until sum(p * a) == a.

    Raises InfeasibleError when sum(p * a_prime) < a - tol.
    """
    p = np.asarray(p, dtype=np.float64)
    out = np.array(a_prime, dtype=np.float64)
    if p.shape != out.shape:
        raise ValueError("p and a_prime must have equal length")
    if np.any(p < 0) or np.any(p > 1) or not 0.0 <= a <= 1.0:
        raise ValueError("p entries and a must lie in [0, 1]")
    if np.any(out < 0):
        raise ValueError("a_prime entries must be nonnegative")
    surplus = float(p @ out) - a
    if surplus < -tol:
        raise InfeasibleError(f"weighted sum {float(p @ out)!r} is below target {a!r}")
    # surpluses at rounding level leave a_prime untouched
    noise = 4 * np.finfo(float).eps * max(1.0, out.size)
    for i in range(out.size):
        if surplus <= noise:
            break
        if p[i] == 0.0:
            continue
        cut = min(out[i], surplus / p[i])
        out[i] -= cut
        surplus -= p[i] * cut
    return out
