"""Explicit incoherent channels for admissible conversions.

Pure to pure goes through a chain of two-coordinate measurements, each of which
moves probability mass between two basis levels with both outcomes landing on
the same state. Pure to ensemble first concentrates the source into the
averaged state eta, then splits eta with diagonal Kraus operators. Ensemble to
ensemble runs one pure-to-ensemble channel per source member, with
conditional weights from a transition matrix.
"""

from dataclasses import dataclass

import numpy as np

from .convertibility import can_convert_pure_ensemble, can_convert_pure_pure
from .feasibility import DEFAULT_FEAS_TOL, find_transition_matrix
from .states import (
    TAU_ZERO,
    Ensemble,
    IncoherentChannel,
    PureState,
    TransitionMatrix,
    profile,
)

PRUNE_WEIGHT = 1e-12
# majorization mismatches below this are treated as closed
CHAIN_EPS = 1e-15


class NotConvertibleError(ValueError):
    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict


@dataclass(frozen=True)
class EnsembleMapPlan:
    transition: TransitionMatrix
    per_source_channels: tuple
    conditionals: tuple  # per source: the Ensemble its channel must produce


def _desc_order(values):
    return np.argsort(-np.asarray(values), kind="stable")


def _permutation(order, d):
    """P with P e_{order[i]} = e_i: gathers coordinates into sorted position."""
    P = np.zeros((d, d))
    P[np.arange(d), order] = 1.0
    return P


def _phases(amplitudes):
    a = np.asarray(amplitudes)
    out = np.ones(a.size, dtype=np.complex128)
    nz = np.abs(a) > 0
    out[nz] = a[nz] / np.abs(a[nz])
    return out


def two_level_step(d, a, b, x1, x2, y1, y2):
    """Two-outcome measurement taking masses (x1, x2) on levels (a, b) to (y1, y2).

    Requires x1 + x2 == y1 + y2 and (x1, x2) majorized by (y1, y2). Each Kraus
    operator acts on the remaining levels as a multiple of the identity, so the
    untouched amplitudes keep their relative size in both branches.
    """
    if y1 < y2:
        return two_level_step(d, b, a, x2, x1, y2, y1)
    gap = y1 - y2
    q = 1.0 if gap <= 0.0 else min(max((x1 - y2) / gap, 0.0), 1.0)
    k1 = np.eye(d) * np.sqrt(q)
    k2 = np.eye(d) * np.sqrt(1.0 - q)
    k1[a, a] = np.sqrt(q * y1 / x1) if x1 > TAU_ZERO else 0.0
    k1[b, b] = np.sqrt(q * y2 / x2) if x2 > TAU_ZERO else 0.0
    k2[a, a] = 0.0
    k2[b, b] = 0.0
    # second outcome swaps the two levels
    k2[b, a] = np.sqrt((1.0 - q) * y2 / x1) if x1 > TAU_ZERO else 0.0
    k2[a, b] = np.sqrt((1.0 - q) * y1 / x2) if x2 > TAU_ZERO else 0.0
    return [k for k, w in ((k1, q), (k2, 1.0 - q)) if w > 0.0]


def majorization_chain(x, y):
    """Two-level transfers turning sorted profile x into sorted profile y (x majorized by y).

    Returns a list of (a, b, x1, x2, y1, y2) steps and the final profile reached.
    Each step fixes the first mismatched coordinate by pulling mass from the
    first later coordinate holding a surplus.
    """
    z = np.array(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    d = z.size
    steps = []
    for _ in range(d):
        deficit = np.flatnonzero(y - z > CHAIN_EPS)
        if deficit.size == 0:
            break
        j = int(deficit[0])
        later = np.flatnonzero(z[j + 1:] - y[j + 1:] > CHAIN_EPS)
        if later.size == 0:
            break
        k = j + 1 + int(later[0])
        delta = min(y[j] - z[j], z[k] - y[k])
        x1, x2 = z[j], z[k]
        if delta == y[j] - z[j]:
            y1, y2 = y[j], x1 + x2 - y[j]
        else:
            y1, y2 = x1 + x2 - y[k], y[k]
        steps.append((j, k, x1, x2, y1, y2))
        z[j], z[k] = y1, y2
    return steps, z


def _compose(outer, inner):
    return [a @ b for a in outer for b in inner]


def _repair_completeness(kraus, d):
    """Add |0><i| operators for any diagonal deficit of sum K^dag K.

    Every operator built here has one nonzero per column, so sum K^dag K is diagonal.
    """
    total = sum(k.conj().T @ k for k in kraus).real
    extra = []
    for i in range(d):
        deficit = 1.0 - total[i, i]
        if deficit > 1e-15:
            op = np.zeros((d, d), dtype=np.complex128)
            op[0, i] = np.sqrt(deficit)
            extra.append(op)
    return kraus + extra


def _drop_zero(kraus):
    return [k for k in kraus if np.abs(k).max() > 0.0]


def synthesize_pure_pure(phi, psi, tol=1e-9):
    verdict = can_convert_pure_pure(phi, psi, tol)
    if not verdict:
        raise NotConvertibleError("source profile is not majorized by target profile", verdict)
    d = phi.dim
    x, y = profile(phi).entries, profile(psi).entries
    ox, oy = _desc_order(x), _desc_order(y)
    # strip source phases and sort; at the end unsort and attach target phases
    start = _permutation(ox, d) @ np.diag(_phases(phi.amplitudes).conj())
    finish = np.diag(_phases(psi.amplitudes)) @ _permutation(oy, d).T
    steps, _ = majorization_chain(x[ox], y[oy])
    middle = [np.eye(d, dtype=np.complex128)]
    for step in steps:
        middle = _compose(two_level_step(d, *step), middle)
    assert len(middle) <= 2 ** max(d - 1, 0)
    kraus = [finish @ k @ start for k in _drop_zero(middle)]
    return IncoherentChannel(tuple(_repair_completeness(kraus, d)))


def build_eta(ensemble):
    """sqrt of the weighted average of the members' descending-sorted profiles."""
    sorted_profiles = np.array([np.sort(profile(s).entries)[::-1] for s in ensemble.states])
    mix = ensemble.weights @ sorted_profiles
    return PureState.normalized(np.sqrt(np.maximum(mix, 0.0)))


def splitter_kraus(eta, ensemble):
    """Diagonal splitters sending eta to member j with probability p_j, then relabeled.

    The operator for member j is P_j diag(sqrt(p_j) sigma_j / eta), where sigma_j
    holds member j's amplitudes (phases included) in descending-modulus order and
    P_j puts them back in their original positions.
    """
    d = eta.dim
    eta_amp = eta.amplitudes.real
    live = eta_amp > TAU_ZERO
    kraus = []
    for w, s in ensemble:
        amp = s.amplitudes
        order = _desc_order(np.abs(amp) ** 2)
        sigma = amp[order]
        diag = np.zeros(d, dtype=np.complex128)
        diag[live] = np.sqrt(w) * sigma[live] / eta_amp[live]
        kraus.append(_permutation(order, d).T @ np.diag(diag))
    return IncoherentChannel(tuple(_repair_completeness(kraus, d)))


def synthesize_pure_ensemble(phi, ensemble, tol=1e-9):
    verdict = can_convert_pure_ensemble(phi, ensemble, tol)
    if not verdict:
        raise NotConvertibleError("tail-sum conditions fail for this source and ensemble", verdict)
    eta = build_eta(ensemble)
    first = synthesize_pure_pure(phi, eta, tol)
    second = splitter_kraus(eta, ensemble)
    kraus = _drop_zero(_compose(second.kraus, first.kraus))
    return IncoherentChannel(tuple(kraus))


def synthesize_ensemble_map(source, target, tol=1e-9, feas_tol=DEFAULT_FEAS_TOL):
    t = find_transition_matrix(source, target, feas_tol)
    if t is None:
        raise NotConvertibleError("no admissible transition matrix exists")
    channels, conditionals = [], []
    for j, phi in enumerate(source.states):
        row = t.t[j]
        keep = row > PRUNE_WEIGHT
        cond = Ensemble(row[keep] / row[keep].sum(), tuple(s for s, k in zip(target.states, keep) if k))
        # the transition constraints imply this up to the feasibility tolerance
        channels.append(synthesize_pure_ensemble(phi, cond, max(tol, 10 * feas_tol)))
        conditionals.append(cond)
    return EnsembleMapPlan(t, tuple(channels), tuple(conditionals))
