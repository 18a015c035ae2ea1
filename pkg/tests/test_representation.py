import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coaxial.exceptions import DegenerateCoefficientsError, NotCoaxialError
from coaxial.representation import (
    BetaCoefficients,
    GammaCoefficients,
    IllConditionedWarning,
    beta_from_gamma,
    closed_form_psi,
    gamma_coefficients,
    psi_direct,
    psi_from_beta,
)
from coaxial.symmat import Invariants, invariants, random_rotation

from conftest import rotated


def psi_oracle(B, sigma):
    """Solve B = p0 id + p1 sigma + p2 sigma^2 in sigma's eigenbasis with numpy."""
    s, Q = np.linalg.eigh(sigma)
    b = np.diag(Q.T @ B @ Q)
    return np.linalg.solve(np.vander(s, 3, increasing=True), b)


def corrected_psi(beta, inv):
    """Closed form with the constant term using I1 / I3; derived independently via Cayley-Hamilton."""
    bm, b0, b1 = beta.beta_m1, beta.beta_0, beta.beta_1
    i1, i2, i3 = inv
    area = i1 * b1 ** 2 - i3 * b1 ** 3 / bm + bm ** 2 / i3 - i2 / i3 * b1 * bm
    psi0 = (b0 ** 2 - 2 * bm * b1 + i2 * b1 ** 2 + i3 * b0 * b1 ** 2 / bm + i1 / i3 * bm ** 2
            + i2 / i3 * b0 * bm) / area
    psi1 = -(2 * b0 + i3 * b1 ** 2 / bm + i2 / i3 * bm) / area
    return psi0, psi1, 1.0 / area


# --- gamma -----------------------------------------------------------------

@pytest.mark.parametrize("A, B, expected", [
    (np.diag([1.0, 2.0, 3.0]), np.diag([2.0, 4.0, 6.0]), (0, 2, 0)),
    (np.diag([1.0, 1.0, 2.0]), np.diag([5.0, 5.0, 7.0]), (3, 2, 0)),
    (np.diag([1.0, 2.0, 4.0]), np.diag([1.0, 4.0, 16.0]), (0, 0, 1)),
])
def test_gamma_examples(A, B, expected):
    g = gamma_coefficients(A, B)
    np.testing.assert_allclose(g.gamma, expected, atol=1e-12)
    np.testing.assert_allclose(g.evaluate(A), B, atol=1e-12)


def test_gamma_minimal_degree_is_zero_padded():
    g = gamma_coefficients(np.eye(3), 5 * np.eye(3))
    assert g.gamma == (5.0, 0.0, 0.0)


def test_gamma_refuses_non_coaxial():
    with pytest.raises(NotCoaxialError):
        gamma_coefficients(np.eye(2), np.diag([1.0, 0.0]))
    with pytest.raises(NotCoaxialError):
        gamma_coefficients(np.diag([1.0, 2.0]), np.array([[0.0, 1.0], [1.0, 0.0]]))


def test_gamma_ill_conditioned_warning():
    A = np.diag([1.0, 1.0 + 2e-8, 1e3])
    with pytest.warns(IllConditionedWarning):
        g = gamma_coefficients(A, A @ A)
    assert g.ill_conditioned


@given(st.lists(st.floats(-4, 4), min_size=3, max_size=3, unique=True),
       st.lists(st.floats(-4, 4), min_size=3, max_size=3), st.integers(0, 2 ** 31))
def test_gamma_reconstruction(a, b, seed):
    a = np.array(a)
    if np.min(np.abs(np.subtract.outer(a, a)) + np.eye(3)) < 0.05:
        return
    Q = random_rotation(np.random.default_rng(seed))
    A, B = (Q * a) @ Q.T, (Q * np.array(b)) @ Q.T
    g = gamma_coefficients(A, B)
    assert np.linalg.norm(g.evaluate(A) - B) <= 1e-8 * max(1.0, np.linalg.norm(B))


# --- beta from gamma ---------------------------------------------------------

def test_beta_from_gamma_examples(rng):
    B = rotated(rng, [3.0, 2.0, 0.5])
    inv = invariants(B)
    beta = beta_from_gamma(GammaCoefficients((0.0, 0.0, 1.0)), inv)
    assert (beta.beta_m1, beta.beta_0, beta.beta_1) == pytest.approx((inv.i3, -inv.i2, inv.i1))
    # Cayley-Hamilton oracle by direct matrix arithmetic
    np.testing.assert_allclose(beta.stress(B), B @ B, rtol=1e-12, atol=1e-12)
    assert beta_from_gamma(GammaCoefficients((2.5, 0.0, 0.0)), inv) == BetaCoefficients(0.0, 2.5, 0.0)
    assert beta_from_gamma(GammaCoefficients((0.0, 1.0, 0.0)), inv) == BetaCoefficients(0.0, 0.0, 1.0)


def test_beta_from_gamma_needs_nonzero_i3():
    with pytest.raises(ValueError):
        beta_from_gamma(GammaCoefficients((0.0, 0.0, 1.0)), Invariants(1.0, 1.0, 0.0))


def test_beta_gamma_roundtrip_reproduces_stress(rng):
    for _ in range(1000):
        x = np.exp(rng.uniform(-1.5, 1.5, 3))
        Q = random_rotation(rng)
        B = (Q * x) @ Q.T
        sigma = (Q * (np.log(x) + 0.3 * x)) @ Q.T
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IllConditionedWarning)
            g = gamma_coefficients(B, sigma)
        if g.ill_conditioned:
            continue
        beta = beta_from_gamma(g, invariants(B))
        assert np.linalg.norm(beta.stress(B) - sigma) <= 1e-10 * max(1.0, np.linalg.norm(sigma))


def test_beta_serialization():
    assert BetaCoefficients(-1.0, 0.0, 2.0).to_dict() == {"beta_m1": -1.0, "beta_0": 0.0, "beta_1": 2.0}


# --- psi ---------------------------------------------------------------------

def test_psi_direct_examples():
    B = np.diag([4.0, 2.0, 1.0])
    psi = psi_direct(B, B - np.trace(B) / 3 * np.eye(3))
    np.testing.assert_allclose((psi.psi0, psi.psi1, psi.psi2), (7 / 3, 1, 0), atol=1e-12)
    psi = psi_direct(B, B)
    np.testing.assert_allclose((psi.psi0, psi.psi1, psi.psi2), (0, 1, 0), atol=1e-12)
    with pytest.raises(NotCoaxialError):
        psi_direct(B, np.diag([1.0, 1.0, 2.0]))
    with pytest.raises(NotCoaxialError):
        psi_direct(B, np.ones((3, 3)))


@pytest.mark.parametrize("beta, diag", [
    (BetaCoefficients(-1.0, 0.0, 1.0), [4.0, 2.0, 1.0]),
    (BetaCoefficients(-1.0, -1.0, 2.0), [9.0, 4.0, 1.0]),
])
def test_psi_from_beta_examples(beta, diag):
    B = np.diag(diag)
    sigma = beta.stress(B)
    psi = psi_from_beta(beta, B)
    assert psi.residual(B, sigma) <= 1e-8
    np.testing.assert_allclose((psi.psi0, psi.psi1, psi.psi2), psi_oracle(B, sigma), rtol=1e-8)


def test_psi_from_beta_degenerate():
    with pytest.raises(DegenerateCoefficientsError):
        psi_from_beta(BetaCoefficients(0.0, 1.0, 1.0), np.diag([4.0, 2.0, 1.0]))


def test_literal_constant_term_measured_not_assumed():
    # I3 = 72 here, so the literal and corrected constant terms differ
    beta, B = BetaCoefficients(-1.0, -1.0, 2.0), np.diag([9.0, 4.0, 1.0]) * 2
    psi = psi_from_beta(beta, B)
    assert psi.formula_discrepancy and psi.source == "direct"
    assert psi.formula_residual > 1e-8
    np.testing.assert_allclose(corrected_psi(beta, invariants(B)), (psi.psi0, psi.psi1, psi.psi2), rtol=1e-8)
    # with unit determinant the literal form is exact
    Bu = np.diag([4.0, 1.0, 0.25])
    psi_u = psi_from_beta(beta, Bu)
    assert psi_u.source == "formula" and not psi_u.formula_discrepancy
    np.testing.assert_allclose(closed_form_psi(beta, invariants(Bu)), corrected_psi(beta, invariants(Bu)))


def test_psi_routes_agree_or_flag(rng):
    checked = 0
    for _ in range(10_000):
        x = np.exp(rng.uniform(-1.2, 1.2, 3))
        beta = BetaCoefficients(*rng.uniform(-2, 2, 3))
        s = beta.principal(x)
        gaps = np.abs(np.subtract.outer(s, s))[np.triu_indices(3, 1)]
        if gaps.min() < 1e-3 * max(1.0, np.abs(s).max()) or abs(beta.beta_m1) < 1e-3:
            continue
        B = (lambda Q: (Q * x) @ Q.T)(random_rotation(rng))
        try:
            psi = psi_from_beta(beta, B)
        except DegenerateCoefficientsError:
            continue
        sigma = beta.stress(B)
        direct = psi_direct(B, sigma)
        assert psi.residual(B, sigma) <= 1e-8 or psi.formula_discrepancy
        if psi.formula_discrepancy:
            assert (psi.psi0, psi.psi1, psi.psi2) == (direct.psi0, direct.psi1, direct.psi2)
        else:
            ref = np.array([direct.psi0, direct.psi1, direct.psi2])
            assert np.all(np.abs(np.array([psi.psi0, psi.psi1, psi.psi2]) - ref) <= 1e-8 * np.maximum(1, np.abs(ref)))
        checked += 1
    assert checked > 5000
