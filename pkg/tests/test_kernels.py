import os
import subprocess
import sys

import numpy as np
import pytest

from cohconv import kernels
from cohconv.feasibility import LinearProgram, _standard_form
from cohconv.kernels import backends


def test_compiled_backend_is_built():
    # the package ships the extension; the fallback is only for unbuilt installs
    assert "cython" in backends()


def test_sorted_tails_small(kernel_module):
    out = kernel_module.sorted_tails(np.array([[0.2, 0.5, 0.3], [1.0, 0.0, 0.0]]))
    assert np.allclose(out, [[0.5, 0.2], [0.0, 0.0]], atol=1e-15)


def test_weighted_min_sums_small(kernel_module):
    out = kernel_module.weighted_min_sums(np.array([0.5, 0.5]), np.array([0.5, 0.0]), np.array([0.25, 1.0]))
    assert out.tolist() == [0.125, 0.25]


@pytest.mark.skipif(len(backends()) < 2, reason="compiled backend not built")
def test_backends_agree_bitwise_on_tails_and_sums():
    py, cy = backends()["python"], backends()["cython"]
    rng = np.random.default_rng(0)
    for _ in range(200):
        d, m = rng.integers(1, 9), rng.integers(1, 6)
        prof = rng.dirichlet(np.ones(d), size=m)
        assert np.array_equal(py.sorted_tails(prof), cy.sorted_tails(prof))
        w, v, ks = rng.random(m), rng.random(m), rng.random(7)
        assert np.array_equal(py.weighted_min_sums(w, v, ks), cy.weighted_min_sums(w, v, ks))


def _random_lp(rng):
    n = int(rng.integers(2, 7))
    eqs = [(rng.normal(size=n), float(rng.normal())) for _ in range(rng.integers(0, 3))]
    ineqs = [(rng.normal(size=n), float(rng.normal())) for _ in range(rng.integers(1, 5))]
    return LinearProgram(n, eqs, ineqs, [(0.0, 2.0)] * n)


@pytest.mark.skipif(len(backends()) < 2, reason="compiled backend not built")
def test_backends_agree_on_simplex_tableaus():
    py, cy = backends()["python"], backends()["cython"]
    rng = np.random.default_rng(1)
    for _ in range(300):
        tab, basis, n_enter, _ = _standard_form(_random_lp(rng))
        t1, b1 = tab.copy(), basis.copy()
        t2, b2 = tab.copy(), basis.copy()
        s1 = py.phase1_simplex(t1, b1, n_enter, 1e-11, 1000)
        s2 = cy.phase1_simplex(t2, b2, n_enter, 1e-11, 1000)
        assert s1 == s2
        assert np.array_equal(b1, b2)
        assert np.array_equal(t1, t2)


def test_selected_backend_is_exported():
    assert kernels.BACKEND in backends()


@pytest.mark.skipif(len(backends()) < 2, reason="compiled backend not built")
def test_backends_give_identical_fuzz_reports():
    cmd = [sys.executable, "-m", "cohconv", "fuzz", "--d", "4", "--m", "3", "--n", "3", "--trials", "200", "--seed", "9"]
    outs = [
        subprocess.run(cmd, env=dict(os.environ, COHCONV_PURE_PYTHON=flag), capture_output=True, check=False).stdout
        for flag in ("0", "1")
    ]
    assert outs[0] and outs[0] == outs[1]
