import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cohconv import (
    DensityMatrix,
    Ensemble,
    MeasureId,
    PureState,
    branch_outcomes,
    capped_tail,
    coherence_fingerprint,
    convex_roof_upper_bound,
    density_of,
    ensemble_coherence,
    pure_coherence,
    tail_sum,
)
from cohconv.measures import measure_grid
from cohconv.oracle import random_incoherent_channel, random_pure_state
from cohconv.states import ValidationError

from conftest import ens, sqrt_state, uniform

X = (0.5, 0.3, 0.2)


def test_tail_sum_examples():
    assert tail_sum((1.0, 0.0, 0.0), 2) == 0.0
    assert tail_sum(X, 2) == 0.5
    assert tail_sum(X, 3) == 0.2
    assert abs(tail_sum((1 / 3,) * 3, 2) - 2 / 3) < 1e-15


def test_capped_tail_examples():
    assert abs(capped_tail(X, 2, 0.25) - 1.8) < 1e-12
    for l in (2, 3):
        for k in (0.01, 0.3, 1.0):
            assert capped_tail((1.0, 0.0, 0.0), l, k) == 0.0
        assert capped_tail(X, l, 1.0) == tail_sum(X, l)


def test_argument_validation():
    with pytest.raises(ValidationError):
        tail_sum(X, 1)
    with pytest.raises(ValidationError):
        tail_sum(X, 4)
    with pytest.raises(ValidationError):
        capped_tail(X, 2, 0.0)
    with pytest.raises(ValidationError):
        MeasureId("capped", 2)
    with pytest.raises(ValidationError):
        MeasureId("tail", 2, 0.5)


def test_measure_id_json_round_trip():
    for m in (MeasureId("tail", 3), MeasureId("capped", 2, 0.25)):
        assert MeasureId.from_json(m.to_json()) == m


def test_pure_and_ensemble_coherence_examples():
    m = MeasureId("tail", 2)
    assert pure_coherence(PureState.basis(3, 0), m) == 0.0
    assert pure_coherence(sqrt_state(*X), m) == pytest.approx(0.5, abs=1e-15)
    assert pure_coherence(uniform(3), MeasureId("tail", 3)) == pytest.approx(1 / 3, abs=1e-15)
    psi = sqrt_state(0.6, 0.3, 0.1)
    assert ensemble_coherence(Ensemble.singleton(psi), m) == pure_coherence(psi, m)
    basis = ens((0.5, PureState.basis(3, 0)), (0.5, PureState.basis(3, 1)))
    assert all(ensemble_coherence(basis, mm) == 0.0 for mm in measure_grid(3))
    pair = ens((0.5, sqrt_state(0.7, 0.2, 0.1)), (0.5, sqrt_state(0.6, 0.3, 0.1)))
    assert ensemble_coherence(pair, m) == pytest.approx(0.35, abs=1e-15)


def test_fingerprint_examples():
    assert coherence_fingerprint(PureState.basis(3, 0)).tolist() == [0.0, 0.0]
    assert np.allclose(coherence_fingerprint(uniform(3)), [2 / 3, 1 / 3], atol=1e-15)
    assert np.allclose(coherence_fingerprint(sqrt_state(*X)), [0.5, 0.2], atol=1e-15)
    assert coherence_fingerprint(PureState.basis(1, 0)).size == 0


profiles = st.integers(2, 6).flatmap(
    lambda d: st.lists(st.floats(0.0, 1.0), min_size=d, max_size=d).filter(lambda v: sum(v) > 1e-3)
).map(lambda v: np.array(v) / sum(v))


@settings(max_examples=300, deadline=None)
@given(x=profiles, data=st.data())
def test_symmetry_exact(x, data):
    perm = np.array(data.draw(st.permutations(range(x.size))))
    l = data.draw(st.integers(2, x.size))
    k = data.draw(st.floats(1e-3, 1.0))
    assert tail_sum(x[perm], l) == tail_sum(x, l)
    assert capped_tail(x[perm], l, k) == capped_tail(x, l, k)


@settings(max_examples=300, deadline=None)
@given(x=profiles, data=st.data())
def test_concavity(x, data):
    d = x.size
    y = np.array(data.draw(st.lists(st.floats(0.0, 1.0), min_size=d, max_size=d)))
    if y.sum() < 1e-3:
        y = np.ones(d)
    y = y / y.sum()
    lam = data.draw(st.floats(0.0, 1.0))
    l = data.draw(st.integers(2, d))
    k = data.draw(st.floats(1e-3, 1.0))
    z = lam * x + (1 - lam) * y
    assert tail_sum(z, l) >= lam * tail_sum(x, l) + (1 - lam) * tail_sum(y, l) - 1e-12
    assert capped_tail(z, l, k) >= lam * capped_tail(x, l, k) + (1 - lam) * capped_tail(y, l, k) - 1e-12


@settings(max_examples=200, deadline=None)
@given(x=profiles, data=st.data())
def test_monotone_in_k_and_dominates_tail(x, data):
    l = data.draw(st.integers(2, x.size))
    ks = sorted(data.draw(st.lists(st.floats(1e-3, 1.0), min_size=2, max_size=6)))
    vals = [capped_tail(x, l, k) for k in ks]
    assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))
    assert min(vals) >= tail_sum(x, l) - 1e-15


def test_small_k_limit_counts_nonzero_tail_entries():
    x = np.array([0.6, 0.25, 0.15, 0.0, 0.0])
    for l in range(2, 6):
        nonzero = int(np.count_nonzero(np.sort(x)[::-1][l - 1:]))
        assert capped_tail(x, l, 1e-9) == nonzero


def test_c2b_monotonicity_on_random_channels():
    rng = np.random.default_rng(17)
    for _ in range(150):
        d = int(rng.integers(2, 6))
        psi = random_pure_state(d, rng)
        ch = random_incoherent_channel(d, int(rng.integers(1, 7)), rng)
        out = branch_outcomes(ch, psi)
        for m in measure_grid(d):
            assert ensemble_coherence(out, m) <= pure_coherence(psi, m) + 1e-9


# convex roof


def test_convex_roof_pure_state_is_exact():
    psi = sqrt_state(0.6, 0.3, 0.1, phases=(0, 1.0, 2.0))
    m = MeasureId("tail", 2)
    value, witness = convex_roof_upper_bound(DensityMatrix(psi.projector()), m, trials=5)
    assert value == pytest.approx(pure_coherence(psi, m), abs=1e-12)
    assert len(witness) == 1


def test_convex_roof_diagonal_is_zero():
    value, witness = convex_roof_upper_bound(DensityMatrix(np.diag([0.5, 0.3, 0.2])), MeasureId("capped", 2, 0.5))
    assert value == 0.0
    assert sorted(witness.weights.tolist()) == pytest.approx([0.2, 0.3, 0.5])


def test_convex_roof_qubit_mixture():
    # 0.5|+><+| + 0.5|1><1|; the given decomposition averages 0.25
    plus = PureState(np.array([1, 1]) / np.sqrt(2))
    given = ens((0.5, plus), (0.5, PureState.basis(2, 1)))
    rho = density_of(given)
    m = MeasureId("tail", 2)
    value, witness = convex_roof_upper_bound(rho, m, trials=200, seed=0)
    # two-member angle sweep optimum and the closed form (1 - sqrt(3/4)) / 2
    sweep, closed = 0.066987311763916, (1 - np.sqrt(0.75)) / 2
    assert closed - 1e-12 <= value <= sweep + 1e-6
    assert value <= 0.25
    assert np.abs(density_of(witness).matrix - rho.matrix).max() < 1e-12
    assert ensemble_coherence(witness, m) == pytest.approx(value, abs=1e-15)


def test_convex_roof_never_exceeds_hint():
    rng = np.random.default_rng(5)
    for _ in range(10):
        d = int(rng.integers(2, 5))
        hint = Ensemble(np.full(3, 1 / 3), tuple(random_pure_state(d, rng) for _ in range(3)))
        m = MeasureId("capped", 2, 0.3)
        value, _ = convex_roof_upper_bound(density_of(hint), m, trials=3, refine=0, hint=hint)
        assert value <= ensemble_coherence(hint, m)


def test_convex_roof_is_deterministic():
    rho = density_of(ens((0.4, uniform(3)), (0.6, sqrt_state(0.7, 0.3, 0.0))))
    m = MeasureId("tail", 2)
    a = convex_roof_upper_bound(rho, m, trials=20, seed=4)[0]
    b = convex_roof_upper_bound(rho, m, trials=20, seed=4)[0]
    assert a == b
