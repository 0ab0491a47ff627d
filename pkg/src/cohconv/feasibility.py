"""Dense phase-1 simplex for small feasibility problems, and the transition LP.

A transition matrix t (m x n) couples source member j to target member i. It is
admissible when

    t >= 0,   sum_i t[j, i] = 1,   sum_j p_j t[j, i] = q_i,
    sum_i t[j, i] * tail_l(psi_i) <= tail_l(phi_j)   for every j and l = 2..d,

the last line being the pure-to-ensemble criterion applied to each source.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .convertibility import ensemble_tails
from .states import TAU_ZERO, DimensionMismatch, TransitionMatrix

DEFAULT_FEAS_TOL = 1e-8
PIVOT_EPS = 1e-9
PIVOT_LADDER = (PIVOT_EPS, 1e-7, 1e-5)


class UnboundedPhase1Error(RuntimeError):
    """Phase 1 reported an unbounded ray; only possible on malformed input."""


@dataclass
class LinearProgram:
    num_vars: int
    equalities: list = field(default_factory=list)  # (coeffs, rhs): coeffs . x == rhs
    inequalities: list = field(default_factory=list)  # (coeffs, rhs): coeffs . x <= rhs
    bounds: list = None  # per-variable (lo, hi); default (0, inf)

    def __post_init__(self):
        if self.bounds is None:
            self.bounds = [(0.0, np.inf)] * self.num_vars
        for coeffs, _ in list(self.equalities) + list(self.inequalities):
            if len(coeffs) != self.num_vars:
                raise ValueError("coefficient list length must equal num_vars")
        if len(self.bounds) != self.num_vars:
            raise ValueError("need one (lo, hi) bound per variable")

    def max_violation(self, x):
        x = np.asarray(x, dtype=np.float64)
        worst = 0.0
        for coeffs, rhs in self.equalities:
            worst = max(worst, abs(float(np.dot(coeffs, x)) - rhs))
        for coeffs, rhs in self.inequalities:
            worst = max(worst, float(np.dot(coeffs, x)) - rhs)
        for xi, (lo, hi) in zip(x, self.bounds):
            worst = max(worst, lo - xi, xi - hi)
        return worst


def _standard_form(lp):
    """Rows [A | slack | artificial | b] with b >= 0, shifted so x = lo + y, y >= 0."""
    n = lp.num_vars
    lo = np.array([b[0] for b in lp.bounds], dtype=np.float64)
    hi = np.array([b[1] for b in lp.bounds], dtype=np.float64)
    if not np.all(np.isfinite(lo)) or np.any(np.isnan(hi)) or np.any(hi < lo):
        raise ValueError("bounds must have finite lower ends and lo <= hi")

    rows, rhs, has_slack = [], [], []
    for coeffs, b in lp.equalities:
        a = np.asarray(coeffs, dtype=np.float64)
        rows.append(a)
        rhs.append(b - a @ lo)
        has_slack.append(False)
    for coeffs, b in lp.inequalities:
        a = np.asarray(coeffs, dtype=np.float64)
        rows.append(a)
        rhs.append(b - a @ lo)
        has_slack.append(True)
    for v in np.flatnonzero(np.isfinite(hi)):
        a = np.zeros(n)
        a[v] = 1.0
        rows.append(a)
        rhs.append(hi[v] - lo[v])
        has_slack.append(True)

    M = len(rows)
    A = np.array(rows, dtype=np.float64).reshape(M, n)
    b = np.array(rhs, dtype=np.float64)
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ValueError("non-finite coefficients")
    n_slack = int(sum(has_slack))
    S = np.zeros((M, n_slack))
    slack_col = {}
    c = 0
    for r, hs in enumerate(has_slack):
        if hs:
            S[r, c] = 1.0
            slack_col[r] = n + c
            c += 1
    sign = np.where(b < 0, -1.0, 1.0)
    A, S, b = A * sign[:, None], S * sign[:, None], b * sign

    # slack is a ready basic column when its sign survived; else an artificial
    need_art = [r for r in range(M) if not (r in slack_col and sign[r] > 0)]
    n_art = len(need_art)
    tab = np.zeros((M + 1, n + n_slack + n_art + 1))
    tab[:M, :n] = A
    tab[:M, n:n + n_slack] = S
    tab[:M, -1] = b
    basis = np.empty(M, dtype=np.int_)
    for r in range(M):
        if r in slack_col and sign[r] > 0:
            basis[r] = slack_col[r]
    for a_idx, r in enumerate(need_art):
        col = n + n_slack + a_idx
        tab[r, col] = 1.0
        basis[r] = col
        tab[M] -= tab[r]
        tab[M, col] = 0.0
    return tab, basis, n + n_slack, lo


def _refresh(orig, basis, costs):
    """Rebuild the tableau for ``basis`` from the original rows (reinversion)."""
    M = orig.shape[0] - 1
    body = np.linalg.solve(orig[:M, basis], orig[:M])
    tab = np.empty_like(orig)
    tab[:M] = body
    tab[M] = costs - costs[basis] @ body
    return tab


def _point(lp, tab, basis, lo, tol):
    """Basic solution of ``tab`` if it satisfies ``lp`` within ``tol``, else None."""
    M = tab.shape[0] - 1
    y = np.zeros(tab.shape[1] - 1)
    y[basis] = tab[:M, -1]
    x = lo + y[:lp.num_vars]
    return x if lp.max_violation(x) <= tol else None


def _phase1(lp, tol, eps):
    """(point or None, sane) for a simplex run at pivot threshold ``eps``.

    Pivots run in short chunks. After each chunk the tableau is rebuilt from
    the original data, so rounding cannot accumulate, and the run stops as
    soon as the basic solution is feasible.
    """
    tab, basis, n_enter, lo = _standard_form(lp)
    M = tab.shape[0] - 1
    if M == 0:
        return lo.copy(), True
    orig = tab.copy()
    costs = np.zeros(tab.shape[1])
    costs[n_enter:-1] = 1.0  # artificial columns
    chunk = max(4, M // 4)
    max_iter = 50 * (tab.shape[0] + tab.shape[1])
    total = 0
    while True:
        if -tab[M, -1] <= tol:
            x = _point(lp, tab, basis, lo, tol)
            if x is not None:
                return x, True
        status, it = kernels.phase1_simplex(tab, basis, n_enter, eps, chunk)
        total += it
        if status == 1:
            raise UnboundedPhase1Error("phase-1 objective unbounded; input is malformed")
        try:
            tab = _refresh(orig, basis, costs)
        except np.linalg.LinAlgError:
            return None, False
        if status == 0 and tab[M, :n_enter].min() >= -eps:
            break
        if total >= max_iter:
            raise RuntimeError("simplex iteration cap reached")
    # a clearly negative basic value means a pivot lost precision
    sane = tab[:M, -1].min() >= -tol
    if -tab[M, -1] <= tol:
        x = _point(lp, tab, basis, lo, tol)
        return x, x is not None
    return None, sane


def solve_feasibility(lp, tol=DEFAULT_FEAS_TOL):
    """A point satisfying all constraints within ``tol``, or None if infeasible.

    Deterministic: Bland's rule, fixed column order. Runs that end with a
    numerically broken tableau are repeated with a coarser pivot threshold.
    """
    for eps in PIVOT_LADDER:
        x, sane = _phase1(lp, tol, eps)
        if x is not None or sane:
            return x
    return None


def transition_program(source, target, relax=0.0):
    """LP in t[j, i] (row-major). ``relax`` loosens the tail inequalities by that amount."""
    if source.dim != target.dim:
        raise DimensionMismatch(f"dimensions differ: {source.dim} vs {target.dim}")
    m, n = len(source), len(target)
    p, q = source.weights, target.weights
    S, T = ensemble_tails(source), ensemble_tails(target)
    nv = m * n
    eqs, ineqs = [], []
    for j in range(m):
        row = np.zeros(nv)
        row[j * n:(j + 1) * n] = 1.0
        eqs.append((row, 1.0))
    # the last mass equation follows from the others (both sides total 1);
    # keeping it would leave the equality system rank-deficient
    for i in range(n - 1):
        row = np.zeros(nv)
        row[i::n] = p
        eqs.append((row, float(q[i])))
    for j in range(m):
        for col in range(source.dim - 1):
            row = np.zeros(nv)
            row[j * n:(j + 1) * n] = T[:, col]
            ineqs.append((row, float(S[j, col]) + relax))
    # a vanishing target weight pins its column to zero
    bounds = [(0.0, 0.0) if q[v % n] <= TAU_ZERO else (0.0, 1.0) for v in range(nv)]
    return LinearProgram(nv, eqs, ineqs, bounds)


def check_transition(t, source, target, tol=DEFAULT_FEAS_TOL):
    """Independent re-check of every admissibility constraint; returns the worst violation."""
    t = np.asarray(t)
    S, T = ensemble_tails(source), ensemble_tails(target)
    worst = max(0.0, -float(t.min()))
    worst = max(worst, float(np.abs(t.sum(axis=1) - 1.0).max()))
    worst = max(worst, float(np.abs(source.weights @ t - target.weights).max()))
    if source.dim > 1:
        worst = max(worst, float((t @ T - S).max()))
    return worst


def find_transition_matrix(source, target, tol=DEFAULT_FEAS_TOL):
    lp = transition_program(source, target)
    x = solve_feasibility(lp, tol)
    if x is None:
        return None
    t = np.clip(x.reshape(len(source), len(target)), 0.0, 1.0)
    t = t / t.sum(axis=1, keepdims=True)
    if check_transition(t, source, target) > tol:
        return None
    return TransitionMatrix(t)
