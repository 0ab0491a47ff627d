"""States, ensembles, density matrices and incoherent channels in a fixed basis.

All objects hold read-only numpy arrays and are safe to share.
"""

from dataclasses import dataclass

import numpy as np

TAU_ZERO = 1e-12
TAU_SUM = 1e-9
TAU_COMPLETE = 1e-9


class ValidationError(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ProbVector:
    entries: np.ndarray

    def __post_init__(self):
        x = _frozen(self.entries, np.float64)
        if x.ndim != 1 or x.size < 1:
            raise ValidationError("probability vector must be a nonempty 1-d array")
        if not np.all(np.isfinite(x)) or x.min() < -TAU_ZERO:
            raise ValidationError("probability vector has negative or non-finite entries")
        if abs(x.sum() - 1.0) > TAU_SUM:
            raise ValidationError(f"probabilities sum to {x.sum()!r}, not 1")
        object.__setattr__(self, "entries", x)

    def __len__(self):
        return self.entries.size


@dataclass(frozen=True, eq=False)
class PureState:
    """Amplitude vector in the incoherent basis."""

    amplitudes: np.ndarray

    def __post_init__(self):
        a = _frozen(self.amplitudes, np.complex128)
        if a.ndim != 1 or a.size < 1:
            raise ValidationError("state must be a nonempty 1-d amplitude vector")
        if not np.all(np.isfinite(a)):
            raise ValidationError("state has non-finite amplitudes")
        norm2 = float(np.vdot(a, a).real)
        if abs(norm2 - 1.0) > TAU_SUM:
            raise ValidationError(f"state has squared norm {norm2!r}, not 1")
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def normalized(cls, amplitudes):
        a = np.asarray(amplitudes, dtype=np.complex128)
        return cls(a / np.linalg.norm(a))

    @classmethod
    def basis(cls, d, i):
        a = np.zeros(d, dtype=np.complex128)
        a[i] = 1.0
        return cls(a)

    @property
    def dim(self):
        return self.amplitudes.size

    def projector(self):
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Weighted pure states. Zero-weight members are dropped, weights renormalized."""

    weights: np.ndarray
    states: tuple

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64).reshape(-1)
        states = tuple(self.states)
        if w.size != len(states) or w.size == 0:
            raise ValidationError("ensemble needs one weight per member and at least one member")
        if not np.all(np.isfinite(w)) or w.min() < -TAU_ZERO:
            raise ValidationError("ensemble weights must be nonnegative")
        if abs(w.sum() - 1.0) > TAU_SUM:
            raise ValidationError(f"ensemble weights sum to {w.sum()!r}, not 1")
        dims = {s.dim for s in states}
        if len(dims) != 1:
            raise DimensionMismatch(f"ensemble members have dimensions {sorted(dims)}")
        keep = w > TAU_ZERO
        w = w[keep]
        states = tuple(s for s, k in zip(states, keep) if k)
        object.__setattr__(self, "weights", _frozen(w / w.sum(), np.float64))
        object.__setattr__(self, "states", states)

    @classmethod
    def singleton(cls, state):
        return cls([1.0], (state,))

    @property
    def dim(self):
        return self.states[0].dim

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(zip(self.weights.tolist(), self.states))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        rho = _frozen(self.matrix, np.complex128)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValidationError("density matrix must be square")
        if np.abs(rho - rho.conj().T).max() > TAU_ZERO:
            raise ValidationError("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > TAU_SUM:
            raise ValidationError("density matrix does not have unit trace")
        if np.linalg.eigvalsh(rho).min() < -TAU_ZERO:
            raise ValidationError("density matrix is not positive semidefinite")
        object.__setattr__(self, "matrix", rho)

    @property
    def dim(self):
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class IncoherentChannel:
    """Complete list of incoherent Kraus operators.

    Pass ``check=False`` only for objects already known to be valid.
    """

    kraus: tuple
    check: bool = True

    def __post_init__(self):
        ops = tuple(_frozen(k, np.complex128) for k in self.kraus)
        if not ops:
            raise ValidationError("channel needs at least one Kraus operator")
        shape = ops[0].shape
        if len(shape) != 2 or shape[0] != shape[1] or any(k.shape != shape for k in ops):
            raise DimensionMismatch("Kraus operators must be square and of equal size")
        if self.check:
            res = completeness_residual(ops)
            if res > TAU_COMPLETE:
                raise ValidationError(f"Kraus operators are incomplete (residual {res:.3g})")
            bad = incoherence_violations(ops)
            if bad:
                raise ValidationError(f"Kraus operators {bad} are not incoherent")
        object.__setattr__(self, "kraus", ops)

    @property
    def dim(self):
        return self.kraus[0].shape[0]

    def __len__(self):
        return len(self.kraus)


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Row-stochastic t[j, i]: probability that source j becomes target i."""

    t: np.ndarray

    def __post_init__(self):
        t = _frozen(self.t, np.float64)
        if t.ndim != 2:
            raise ValidationError("transition matrix must be 2-d")
        if t.min() < -TAU_SUM or t.max() > 1 + TAU_SUM:
            raise ValidationError("transition entries must lie in [0, 1]")
        if np.abs(t.sum(axis=1) - 1.0).max() > TAU_SUM:
            raise ValidationError("transition rows must sum to 1")
        object.__setattr__(self, "t", t)

    @property
    def shape(self):
        return self.t.shape


def completeness_residual(kraus):
    """Max-norm of sum_n K_n^dag K_n - I."""
    kraus = [np.asarray(k) for k in kraus]
    total = sum(k.conj().T @ k for k in kraus)
    return float(np.abs(total - np.eye(kraus[0].shape[0])).max())


def incoherence_violations(kraus, tol=TAU_ZERO):
    return [n for n, k in enumerate(kraus) if not is_incoherent_operator(k, tol)]


def profile(psi):
    a = psi.amplitudes
    return ProbVector(a.real * a.real + a.imag * a.imag)


def is_incoherent_state(rho, tol=TAU_ZERO):
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    off = m - np.diag(np.diag(m))
    return bool(np.abs(off).max(initial=0.0) <= tol)


def is_incoherent_operator(K, tol=TAU_ZERO):
    """At most one entry per column with modulus above ``tol``."""
    K = np.asarray(K)
    return bool(np.all((np.abs(K) > tol).sum(axis=0) <= 1))


def density_of(ensemble):
    d = ensemble.dim
    rho = np.zeros((d, d), dtype=np.complex128)
    for w, s in ensemble:
        rho += w * s.projector()
    return DensityMatrix(rho)


def apply_channel(channel, rho):
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if m.shape[0] != channel.dim:
        raise DimensionMismatch(f"channel acts on d={channel.dim}, state has d={m.shape[0]}")
    out = sum(k @ m @ k.conj().T for k in channel.kraus)
    return DensityMatrix((out + out.conj().T) / 2)


def phase_canonical(amplitudes, tol=TAU_ZERO):
    """Rotate the global phase so the first entry with modulus above ``tol`` is real positive."""
    a = np.asarray(amplitudes, dtype=np.complex128)
    nz = np.flatnonzero(np.abs(a) > tol)
    if nz.size == 0:
        return a.copy()
    lead = a[nz[0]]
    return a * (abs(lead) / lead)


def overlap_error(a, b):
    """1 - |<a|b>| for unit vectors; zero iff equal up to global phase."""
    a = a.amplitudes if isinstance(a, PureState) else np.asarray(a)
    b = b.amplitudes if isinstance(b, PureState) else np.asarray(b)
    return max(0.0, 1.0 - abs(np.vdot(a, b)))


def merge_members(weights, vectors, tol=TAU_SUM):
    """Greedy merge, in input order, of members equal up to global phase."""
    merged_w, merged_v = [], []
    for w, v in zip(weights, vectors):
        for idx, u in enumerate(merged_v):
            if overlap_error(u, v) < tol:
                merged_w[idx] += w
                break
        else:
            merged_w.append(float(w))
            merged_v.append(v)
    return merged_w, merged_v


def raw_branches(kraus, amplitudes, tol=TAU_SUM):
    """Unnormalized branch weights and phase-canonical output vectors, merged.

    Works on any operator list, complete or not.
    """
    weights, vectors = [], []
    for k in kraus:
        v = np.asarray(k) @ amplitudes
        w = float(np.vdot(v, v).real)
        if w > tol:
            weights.append(w)
            vectors.append(phase_canonical(v / np.sqrt(w)))
    return merge_members(weights, vectors, tol)


def branch_outcomes(channel, psi, tol=TAU_SUM):
    """Post-measurement ensemble {(||K psi||^2, K psi / ||K psi||)} with phase-equal branches merged."""
    if psi.dim != channel.dim:
        raise DimensionMismatch(f"channel acts on d={channel.dim}, state has d={psi.dim}")
    weights, vectors = raw_branches(channel.kraus, psi.amplitudes, tol)
    w = np.array(weights)
    return Ensemble(w / w.sum(), tuple(PureState.normalized(v) for v in vectors))
