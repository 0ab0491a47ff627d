"""Random instances and brute-force checkers for the decision and synthesis code.

Nothing here calls the breakpoint logic in ``convertibility``: the grid check
evaluates the capped comparison directly at many k, and verification works
from raw Kraus action on state vectors.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .convertibility import DEFAULT_TOL, ConversionVerdict, Violation, can_convert_ensembles
from .jsonio import ensemble_to_json
from .feasibility import DEFAULT_FEAS_TOL, find_transition_matrix, solve_feasibility, transition_program
from .states import (
    TAU_SUM,
    Ensemble,
    IncoherentChannel,
    PureState,
    branch_outcomes,
    merge_members,
    overlap_error,
    phase_canonical,
    raw_branches,
)
from .synthesis import two_level_step


def make_rng(seed, *stream):
    """Generator for (seed, *stream); independent streams per trial index."""
    return np.random.default_rng([int(seed), *map(int, stream)])


def random_pure_state(d, rng):
    z = rng.normal(size=d) + 1j * rng.normal(size=d)
    return PureState(z / np.linalg.norm(z))


def random_weights(m, rng):
    """Flat sample from the simplex via sorted uniform spacings."""
    cuts = np.sort(rng.random(m - 1))
    return np.diff(np.concatenate([[0.0], cuts, [1.0]]))


def random_ensemble(d, m, rng):
    w = random_weights(m, rng)
    return Ensemble(w, tuple(random_pure_state(d, rng) for _ in range(m)))


def _random_factor(d, rng):
    kind = rng.integers(3) if d > 1 else 1
    if kind == 0:
        P = np.zeros((d, d), dtype=np.complex128)
        P[np.arange(d), rng.permutation(d)] = 1.0
        return [P]
    if kind == 1:
        return [np.diag(np.exp(2j * np.pi * rng.random(d)))]
    a, b = rng.choice(d, size=2, replace=False)
    x1, x2 = rng.random(2) + 1e-3
    s = x1 + x2
    y1 = rng.uniform(max(x1, x2), s)
    return [k.astype(np.complex128) for k in two_level_step(d, int(a), int(b), x1, x2, y1, s - y1)]


def random_incoherent_channel(d, depth, rng):
    """Product of ``depth`` random permutations, diagonal phases or two-level steps."""
    kraus = [np.eye(d, dtype=np.complex128)]
    for _ in range(depth):
        factor = _random_factor(d, rng)
        kraus = [f @ k for f in factor for k in kraus]
    return IncoherentChannel(tuple(kraus))


def _g_aggregate(tails, k):
    """min(tail / k, 1), the capped comparison in its original (undivided) form."""
    return np.minimum(tails / k, 1.0)


def _tails_direct(ensemble):
    # independent of the compiled kernels: plain sort and cumulative sums
    rows = []
    for s in ensemble.states:
        x = np.sort(np.abs(s.amplitudes) ** 2)[::-1]
        rows.append([x[l - 1:].sum() for l in range(2, s.dim + 1)])
    return np.array(rows).reshape(len(ensemble), ensemble.dim - 1)


def grid_check_ensembles(source, target, grid_points=1000, tol=DEFAULT_TOL):
    """Evaluate the capped comparison for every l on a uniform k grid plus all tail values."""
    if grid_points < 2:
        raise ValueError("grid_points must be at least 2")
    S, T = _tails_direct(source), _tails_direct(target)
    p, q = source.weights, target.weights
    base = np.arange(1, grid_points + 1) / grid_points
    violations = []
    for col in range(source.dim - 1):
        extra = np.concatenate([S[:, col], T[:, col]])
        ks = np.union1d(base, extra[(extra > 0) & (extra <= 1)])
        lhs = p @ _g_aggregate(S[:, col][:, None], ks[None, :])
        rhs = q @ _g_aggregate(T[:, col][:, None], ks[None, :])
        gap = rhs - lhs
        if gap.max() > tol:
            # on the undivided scale the gap is flat for small k; rank by k * gap
            worst = int(np.argmax(np.where(gap > tol, ks * gap, -np.inf)))
            violations.append(Violation(col + 2, float(ks[worst]), float(lhs[worst]), float(rhs[worst])))
    return ConversionVerdict(not violations, tuple(violations))


@dataclass
class VerificationReport:
    passed: bool
    max_weight_err: float
    max_state_err: float
    unmatched_expected: list = field(default_factory=list)
    unmatched_outcomes: list = field(default_factory=list)

    def to_json(self):
        return {
            "pass": self.passed,
            "max_weight_err": self.max_weight_err,
            "max_state_err": self.max_state_err,
            "unmatched_expected": self.unmatched_expected,
            "unmatched_outcomes": self.unmatched_outcomes,
        }


def verify_transformation(kraus, state, expected, tol=1e-8):
    """Match the branch outcomes of ``kraus`` on ``state`` against ``expected``.

    ``kraus`` may be an IncoherentChannel or any list of operators. State error
    is 1 - |<a|b>| per matched pair. Unmatched members on either side count
    their full weight as weight error.
    """
    ops = kraus.kraus if isinstance(kraus, IncoherentChannel) else kraus
    out_w, out_v = raw_branches(ops, state.amplitudes, tol=1e-14)
    exp_w, exp_v = merge_members(
        expected.weights.tolist(), [phase_canonical(s.amplitudes) for s in expected.states], TAU_SUM
    )
    free = list(range(len(out_v)))
    w_err, s_err = 0.0, 0.0
    unmatched_expected = []
    for e, (w, v) in enumerate(zip(exp_w, exp_v)):
        errs = [overlap_error(v, out_v[o]) for o in free]
        if errs and min(errs) < max(tol, 1e-6):
            pick = free.pop(int(np.argmin(errs)))
            s_err = max(s_err, min(errs))
            w_err = max(w_err, abs(w - out_w[pick]))
        else:
            unmatched_expected.append(e)
            w_err = max(w_err, w)
    for o in free:
        w_err = max(w_err, out_w[o])
    unmatched_outcomes = [o for o in free if out_w[o] > tol]
    passed = w_err <= tol and s_err <= tol
    return VerificationReport(passed, float(w_err), float(s_err), unmatched_expected, unmatched_outcomes)


# -- decision vs transition LP fuzzing ----------------------------------------


def _hex_ensemble(e):
    return {
        "weights": [float(w).hex() for w in e.weights],
        "amplitudes": [[[float(z.real).hex(), float(z.imag).hex()] for z in s.amplitudes] for s in e.states],
    }


def realizable_pair(d, m, rng, depth=2):
    """D1 random; D2 is what random incoherent channels make of D1's members."""
    source = random_ensemble(d, m, rng)
    weights, states = [], []
    for p, phi in source:
        out = branch_outcomes(random_incoherent_channel(d, depth, rng), phi)
        for w, s in out:
            weights.append(p * w)
            states.append(s)
    w = np.array(weights)
    return source, Ensemble(w / w.sum(), tuple(states))


def _trial(args):
    d, m, n, seed, index, tol, feas_tol, grid = args
    rng = make_rng(seed, index)
    pool = "realizable" if index % 2 == 0 else "random"
    if pool == "realizable":
        source, target = realizable_pair(d, m, rng)
    else:
        source, target = random_ensemble(d, m, rng), random_ensemble(d, n, rng)
    verdict = can_convert_ensembles(source, target, tol)
    grid_ok = grid_check_ensembles(source, target, grid, tol).convertible == verdict.convertible
    t = find_transition_matrix(source, target, feas_tol)
    feasible = t is not None
    if verdict.convertible == feasible:
        return None if grid_ok else {"trial": index, "grid_disagreement": True}
    if verdict.convertible:
        # inequalities pass but no transition: does a small relaxation rescue it?
        relaxed = solve_feasibility(transition_program(source, target, relax=10 * tol), feas_tol)
        ambiguous = relaxed is not None
        magnitude = None
    else:
        magnitude = verdict.worst
        ambiguous = magnitude < 10 * tol
    return {
        "trial": index,
        "grid_disagreement": not grid_ok,
        "pool": pool,
        "class": "tolerance-ambiguous" if ambiguous else "hard",
        "decision": verdict.to_json(),
        "feasible": feasible,
        "violation_magnitude": magnitude,
        "source": ensemble_to_json(source),
        "target": ensemble_to_json(target),
        "hex": {"source": _hex_ensemble(source), "target": _hex_ensemble(target)},
    }


@dataclass
class FuzzReport:
    d: int
    m: int
    n: int
    trials: int
    agreements: int
    seed: int
    counterexamples: list
    grid_disagreements: int = 0

    @property
    def strict_regime(self):
        """d=3, m=n=2: the case where decision and LP are expected to agree."""
        return self.d == 3 and self.m == 2 and self.n == 2

    @property
    def hard(self):
        return [c for c in self.counterexamples if c["class"] == "hard"]

    @property
    def ambiguous(self):
        return [c for c in self.counterexamples if c["class"] != "hard"]

    @property
    def failing(self):
        """Hard disagreements that count as failures.

        Realizable instances must always agree. Random instances fail only in
        the d=3, m=n=2 regime; elsewhere they are warnings.
        """
        return [c for c in self.hard if c["pool"] == "realizable" or self.strict_regime]

    def to_json(self):
        return {
            "d": self.d,
            "m": self.m,
            "n": self.n,
            "seed": self.seed,
            "trials": self.trials,
            "agreements": self.agreements,
            "strict_regime": self.strict_regime,
            "hard_counterexamples": len(self.hard),
            "tolerance_ambiguous": len(self.ambiguous),
            "failing": len(self.failing),
            "grid_disagreements": self.grid_disagreements,
            "counterexamples": self.counterexamples,
        }


def fuzz_theorem2(d, m, n, trials, seed, tol=DEFAULT_TOL, feas_tol=DEFAULT_FEAS_TOL, jobs=1, grid=1000):
    """Compare the breakpoint decision with transition-LP feasibility on random instances.

    Even trial indices draw realizable pairs, odd ones unconstrained pairs.
    Each decision is also re-derived by the k-grid check; mismatches there are
    counted separately (they would indicate a bug, not a counterexample).
    """
    if trials < 1 or d < 1 or m < 1 or n < 1:
        raise ValueError("d, m, n and trials must be positive")
    args = [(d, m, n, seed, i, tol, feas_tol, grid) for i in range(trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_trial, args, chunksize=max(1, trials // (4 * jobs))))
    else:
        results = [_trial(a) for a in args]
    grid_bad = sum(1 for r in results if r is not None and r["grid_disagreement"])
    bad = [r for r in results if r is not None and "pool" in r]
    return FuzzReport(d, m, n, trials, trials - len(bad), seed, bad, grid_bad)
