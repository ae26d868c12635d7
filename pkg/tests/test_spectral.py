import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regbip.generators import circulant, complete, cycle, petersen, random_regular
from regbip.graph import Graph
from regbip.spectral import EigenSolverError, certify, jacobi_eigenvalues, mixing_check


def _lambda_oracle(g):
    ev = np.linalg.eigvalsh(g.adjacency_matrix().astype(float))
    return max(abs(ev[-2]), abs(ev[0]))


@pytest.mark.parametrize(
    "g, lam",
    [(complete(4), 1.0), (complete(9), 1.0), (cycle(6), 2.0), (petersen(), 2.0)],
)
def test_known_spectra(g, lam):
    cert = certify(g, method="dense")
    assert cert.lambda_ == pytest.approx(lam, abs=1e-9)
    assert certify(g, method="jacobi").lambda_ == pytest.approx(lam, abs=1e-8)


def test_cycle_spectrum_matches_cosines():
    # C_n has eigenvalues 2 cos(2 pi k / n)
    for n in (5, 7, 10):
        want = sorted(2 * math.cos(2 * math.pi * k / n) for k in range(n))
        got = jacobi_eigenvalues(cycle(n).adjacency_matrix().astype(float))
        assert np.allclose(got, want, atol=1e-9)


def test_budget_flag():
    # lambda(K_6) = 1 against 5/12 of d=5
    cert = certify(complete(6), 0.0833)
    assert cert.lambda_ == pytest.approx(1.0)
    assert not cert.satisfied
    assert certify(complete(6), 0.25).satisfied


def test_random_regular_fixture_lambda():
    g = random_regular(100, 10, seed=7)
    cert = certify(g)
    assert cert.lambda_ == pytest.approx(_lambda_oracle(g), abs=1e-9)
    # frozen value observed for this fixture, near 2 sqrt(d - 1) = 6
    assert cert.lambda_ == pytest.approx(5.670483717, abs=1e-6)


def test_power_estimate_agrees_on_fixture():
    g = random_regular(100, 10, seed=7)
    est = certify(g, method="power")
    assert est.estimated
    assert est.lambda_ == pytest.approx(certify(g).lambda_, rel=1e-3)


def test_non_regular_rejected():
    with pytest.raises(ValueError):
        certify(Graph(3, [(0, 1)]))


def test_jacobi_sweep_cap():
    a = np.random.default_rng(0).standard_normal((12, 12))
    with pytest.raises(EigenSolverError):
        jacobi_eigenvalues(a + a.T, max_sweeps=1)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_dense_and_jacobi_agree(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 16))
    a = rng.standard_normal((n, n))
    a = a + a.T
    assert np.allclose(jacobi_eigenvalues(a), np.linalg.eigvalsh(a), atol=1e-8)


def test_mixing_small_cases():
    k4 = complete(4)
    cert = certify(k4)
    lhs, rhs, ok = mixing_check(k4, cert, range(4), range(4))
    assert lhs == pytest.approx(0.0) and ok
    lhs, rhs, ok = mixing_check(k4, cert, [], range(4))
    assert lhs == rhs == 0 and ok


def test_mixing_petersen_cycle_split():
    g = petersen()
    outer, inner = range(5), range(5, 10)
    lhs, rhs, ok = mixing_check(g, certify(g), outer, inner)
    # e(S,T) = 5 spokes, (d/n)|S||T| = 7.5, lambda sqrt(|S||T|) = 10
    assert lhs == pytest.approx(2.5)
    assert rhs == pytest.approx(10.0)
    assert ok


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_mixing_holds_on_circulants(data):
    n = data.draw(st.integers(6, 20))
    offs = data.draw(st.sets(st.integers(1, n // 2), min_size=1, max_size=3))
    g = circulant(n, offs)
    if g.regular_degree() is None:
        return
    cert = certify(g)
    s = data.draw(st.sets(st.integers(0, n - 1)))
    t = data.draw(st.sets(st.integers(0, n - 1)))
    assert mixing_check(g, cert, s, t)[2]
