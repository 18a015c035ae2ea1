"""
Polynomial representations of coaxial pairs and semi-inversion.

For A coaxial to B there are scalars with ``B = sum_k gamma_k A^k``; on SPD
3x3 inputs the Cayley-Hamilton theorem rewrites this as
``beta_0 id + beta_1 B + beta_m1 B^-1``. Semi-inversion goes the other way,
``B = psi_0 id + psi_1 sigma + psi_2 sigma^2``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateCoefficientsError, NotCoaxialError, NotCommutingError
from .symmat import (
    CLUSTER_ATOL,
    CLUSTER_RTOL,
    COMMUTE_TOL,
    Invariants,
    _pattern_ok,
    as_symmetric,
    commutes,
    invariants,
    simultaneous_diagonalize,
)

VANDERMONDE_COND_LIMIT = 1e12
PSI_AGREEMENT_RTOL = 1e-8


class IllConditionedWarning(UserWarning):
    pass


@dataclass(frozen=True)
class GammaCoefficients:
    """Power-basis coefficients (gamma_0, ..., gamma_{n-1}); unused degrees are zero."""

    gamma: tuple[float, ...]
    condition: float = 1.0

    @property
    def ill_conditioned(self) -> bool:
        return self.condition > VANDERMONDE_COND_LIMIT

    def evaluate(self, A) -> np.ndarray:
        A = as_symmetric(A)
        out = np.zeros_like(A)
        power = np.eye(A.shape[0])
        for g in self.gamma:
            out += g * power
            power = power @ A
        return out


@dataclass(frozen=True)
class BetaCoefficients:
    beta_m1: float
    beta_0: float
    beta_1: float

    def stress(self, B) -> np.ndarray:
        """``beta_0 id + beta_1 B + beta_m1 B^-1``."""
        B = as_symmetric(B, dims=(3,))
        return self.beta_0 * np.eye(3) + self.beta_1 * B + self.beta_m1 * np.linalg.inv(B)

    def principal(self, x) -> np.ndarray:
        """Same map on eigenvalues ``x`` of B."""
        x = np.asarray(x, dtype=float)
        return self.beta_0 + self.beta_1 * x + self.beta_m1 / x

    def to_dict(self) -> dict:
        return {"beta_m1": self.beta_m1, "beta_0": self.beta_0, "beta_1": self.beta_1}


@dataclass(frozen=True)
class PsiCoefficients:
    """Semi-inversion coefficients, ``B = psi_0 id + psi_1 sigma + psi_2 sigma^2``.

    ``source`` says which route produced the values. When the closed-form
    route was attempted, ``formula_residual`` holds the relative Frobenius
    residual of the closed-form coefficients and ``formula_discrepancy`` is set
    if they disagreed with the direct solve.
    """

    psi0: float
    psi1: float
    psi2: float
    source: str = "direct"
    formula_residual: float | None = None
    formula_discrepancy: bool = False
    formula_values: tuple[float, float, float] | None = field(default=None, compare=False)
    center: float = 0.0
    centered: tuple[float, float, float] | None = field(default=None, compare=False)

    def stretch(self, sigma) -> np.ndarray:
        sigma = as_symmetric(sigma)
        n = sigma.shape[0]
        if self.centered is not None:
            # same polynomial, evaluated in sigma - center * id to avoid cancellation
            p0, p1, p2 = self.centered
            s = sigma - self.center * np.eye(n)
            return p0 * np.eye(n) + p1 * s + p2 * s @ s
        return self.psi0 * np.eye(n) + self.psi1 * sigma + self.psi2 * sigma @ sigma

    def residual(self, B, sigma) -> float:
        """``||B - (psi_0 id + psi_1 sigma + psi_2 sigma^2)||_F / ||B||_F``."""
        B = as_symmetric(B)
        return float(np.linalg.norm(B - self.stretch(sigma)) / np.linalg.norm(B))

    def to_dict(self) -> dict:
        out = {"psi_0": self.psi0, "psi_1": self.psi1, "psi_2": self.psi2, "source": self.source}
        if self.formula_residual is not None:
            out["formula_residual"] = self.formula_residual
            out["formula_discrepancy"] = self.formula_discrepancy
        return out


def gamma_coefficients(A, B, tol: float = COMMUTE_TOL, rtol: float = CLUSTER_RTOL,
                       atol: float = CLUSTER_ATOL, spec_a=None) -> GammaCoefficients:
    """Coefficients of B as a polynomial in A.

    Solves the Vandermonde system on the distinct (clustered) eigenvalues of A
    only, so the result has minimal degree. A condition number above 1e12
    emits :class:`IllConditionedWarning` but still returns.

    Raises
    ------
    NotCoaxialError
        If A is not coaxial to B.
    """
    A, B = as_symmetric(A), as_symmetric(B)
    try:
        _, _, b, dec = simultaneous_diagonalize(A, B, tol, rtol, atol, spec_a)
    except NotCommutingError as exc:
        raise NotCoaxialError("A and B do not commute, so A is not coaxial to B") from exc
    if not _pattern_ok(dec.clusters, b, rtol, atol):
        raise NotCoaxialError("A is not coaxial to B: a repeated eigenvalue of A carries distinct values of B")
    a_vals = dec.distinct_values()
    b_vals = np.array([np.mean(b[list(c)]) for c in dec.clusters])
    m = len(a_vals)
    V = np.vander(a_vals, m, increasing=True)
    condition = float(np.linalg.cond(V)) if m > 1 else 1.0
    if condition > VANDERMONDE_COND_LIMIT:
        warnings.warn(f"Vandermonde system condition number {condition:.3e}", IllConditionedWarning,
                      stacklevel=2)
    coeffs = np.linalg.solve(V, b_vals)
    gamma = tuple(float(c) for c in coeffs) + (0.0,) * (A.shape[0] - m)
    return GammaCoefficients(gamma, condition)


def beta_from_gamma(g: GammaCoefficients, inv: Invariants) -> BetaCoefficients:
    """Eliminate ``B^2`` with ``B^2 = I1 B - I2 id + I3 B^-1``."""
    if len(g.gamma) != 3:
        raise ValueError("beta coefficients are defined for 3x3 tensors only")
    if inv[2] == 0.0:
        raise ValueError("I3 must be non-zero")
    g0, g1, g2 = g.gamma
    i1, i2, i3 = inv
    return BetaCoefficients(beta_m1=g2 * i3, beta_0=g0 - g2 * i2, beta_1=g1 + g2 * i1)


def psi_direct(B, sigma, tol: float = COMMUTE_TOL, rtol: float = CLUSTER_RTOL,
               atol: float = CLUSTER_ATOL, centered_spectrum=None) -> PsiCoefficients:
    """Semi-inversion coefficients from a Vandermonde solve in the eigenvalues of sigma.

    The solve runs on ``sigma - tr(sigma)/n id``, which has the same
    eigenvectors and polynomial span but no large spherical offset to swamp
    the eigenvalue gaps. The returned ``psi`` values are expanded back to
    powers of sigma; :meth:`PsiCoefficients.stretch` evaluates the centered
    form. ``centered_spectrum`` may carry a decomposition of the centered
    stress to skip its eigensolve.

    Raises
    ------
    NotCoaxialError
        If sigma is not coaxial to B, i.e. the pair is not bi-coaxial.
    """
    sigma, B = as_symmetric(sigma), as_symmetric(B)
    if sigma.shape != B.shape:
        raise NotCoaxialError(f"dimension mismatch {sigma.shape} vs {B.shape}")
    # commutation is judged at the scale of sigma itself; the centered copy
    # inherits sigma's rounding and would fail a test scaled to its own norm
    if not commutes(sigma, B, tol):
        raise NotCoaxialError("sigma and B do not commute, so sigma is not coaxial to B")
    n = sigma.shape[0]
    c = float(np.trace(sigma)) / n
    g = gamma_coefficients(sigma - c * np.eye(n), B, math.inf, rtol, atol, centered_spectrum)
    p0, p1, p2 = (g.gamma + (0.0,) * (3 - len(g.gamma)))[:3]
    return PsiCoefficients(p0 - p1 * c + p2 * c * c, p1 - 2.0 * p2 * c, p2, source="direct",
                           center=c, centered=(p0, p1, p2))


def closed_form_psi(beta: BetaCoefficients, inv: Invariants) -> tuple[float, float, float]:
    """Literal closed-form semi-inversion coefficients, as commonly quoted.

    The constant coefficient contains an ``I1 * beta_m1**2`` term; the exact
    identity needs ``I1 / I3 * beta_m1**2``, so this value is only exact when
    ``I3 == 1``. Callers should go through :func:`psi_from_beta`, which checks
    the result against :func:`psi_direct`.
    """
    bm, b0, b1 = beta.beta_m1, beta.beta_0, beta.beta_1
    i1, i2, i3 = inv
    scale = max(abs(bm), abs(b0), abs(b1), 1e-300)
    if abs(bm) <= 1e-14 * scale:
        raise DegenerateCoefficientsError("beta_m1 = 0: closed form undefined, use psi_direct")
    area = i1 * b1 ** 2 - i3 * b1 ** 3 / bm + bm ** 2 / i3 - i2 / i3 * b1 * bm
    if abs(area) <= 1e-14 * max(1.0, i1, i3, 1.0 / i3) * scale ** 2:
        raise DegenerateCoefficientsError("closed-form denominator vanishes, use psi_direct")
    psi0 = (b0 ** 2 - 2 * bm * b1 + i2 * b1 ** 2 + i3 * b0 * b1 ** 2 / bm + i1 * bm ** 2
            + i2 / i3 * b0 * bm) / area
    psi1 = -(2 * b0 + i3 * b1 ** 2 / bm + i2 / i3 * bm) / area
    psi2 = 1.0 / area
    return float(psi0), float(psi1), float(psi2)


def psi_from_beta(beta: BetaCoefficients, B, tol: float = COMMUTE_TOL) -> PsiCoefficients:
    """Closed-form semi-inversion, validated against the direct solve.

    The closed-form coefficients are returned only if they match
    :func:`psi_direct` to 1e-8 relative. Otherwise the direct values come back
    with ``formula_discrepancy=True`` and the measured residual of the closed
    form recorded.

    Raises
    ------
    DegenerateCoefficientsError
        If ``beta_m1 == 0`` or the closed-form denominator vanishes.
    """
    B = as_symmetric(B, dims=(3,))
    inv = invariants(B)
    formula = closed_form_psi(beta, inv)
    sigma = beta.stress(B)
    direct = psi_direct(B, sigma, tol)
    trial = PsiCoefficients(*formula)
    residual = trial.residual(B, sigma)
    ref = np.array([direct.psi0, direct.psi1, direct.psi2])
    agree = bool(np.all(np.abs(np.array(formula) - ref) <= PSI_AGREEMENT_RTOL * np.maximum(1.0, np.abs(ref))))
    if agree:
        return PsiCoefficients(*formula, source="formula", formula_residual=residual,
                               formula_discrepancy=False, formula_values=formula)
    return PsiCoefficients(direct.psi0, direct.psi1, direct.psi2, source="direct",
                           formula_residual=residual, formula_discrepancy=True,
                           formula_values=formula)
