"""
Isotropic stress-response models and their coefficient functions.

Every model maps the left Cauchy-Green tensor ``B`` to Cauchy stress. The
hyperelastic ones are built from an energy in the principal stretches and
evaluate stress on the principal axes,
``sigma_i = lambda_i / J * dW/dlambda_i``. Invariant derivatives
``dW/dI_k`` come either in closed form or from central differences in the
stretches followed by a 3x3 solve.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass
from typing import Callable, ClassVar

import numpy as np

from .exceptions import DomainError, UnsupportedModelError
from .representation import BetaCoefficients, beta_from_gamma, gamma_coefficients
from .symmat import (
    CLUSTER_ATOL,
    CLUSTER_RTOL,
    Invariants,
    as_symmetric,
    cluster_indices,
    eigendecompose,
    invariants_of_values,
)

FD_REL_STEP = 1e-6
# five-point stencil for dW/dlambda; the step is relative to the stretch
GRAD_REL_STEP = 1e-3
# below this relative gap in B's eigenvalues the chain-rule system is too
# ill-conditioned to solve directly
NEAR_GAP = 1e-2
# log-stretch half-split used to interpolate across near-coincident stretches
SPLIT_LOG = 3e-2


def _fd_step(x: float) -> float:
    return max(FD_REL_STEP, FD_REL_STEP * abs(x))


def _derivative(f: Callable[[float], float], x: float) -> float:
    h = _fd_step(x)
    return (f(x + h) - f(x - h)) / (2.0 * h)


# --------------------------------------------------------------------------
# volumetric parts f(I3), f'(1) = 0


@dataclass(frozen=True)
class Volumetric:
    """Volumetric energy ``f(I3)``; subclasses implement value and derivative."""

    kind: ClassVar[str] = "zero"

    def value(self, i3: float) -> float:
        return 0.0

    def derivative(self, i3: float) -> float:
        return 0.0

    def to_dict(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class LogQuadraticVolumetric(Volumetric):
    """``f = kappa/8 (log I3)^2``, i.e. ``kappa/2 (log det F)^2``."""

    kappa: float = 1.0
    kind: ClassVar[str] = "log-quadratic"

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError("kappa must be non-negative")

    def value(self, i3):
        return self.kappa / 8.0 * math.log(i3) ** 2

    def derivative(self, i3):
        return self.kappa / 4.0 * math.log(i3) / i3

    def to_dict(self):
        return {"kind": self.kind, "kappa": self.kappa}


@dataclass(frozen=True)
class QuadraticJVolumetric(Volumetric):
    """``f = kappa/2 (sqrt(I3) - 1)^2``."""

    kappa: float = 1.0
    kind: ClassVar[str] = "quadratic-j"

    def value(self, i3):
        return 0.5 * self.kappa * (math.sqrt(i3) - 1.0) ** 2

    def derivative(self, i3):
        r = math.sqrt(i3)
        return 0.5 * self.kappa * (r - 1.0) / r

    def to_dict(self):
        return {"kind": self.kind, "kappa": self.kappa}


@dataclass(frozen=True)
class CustomVolumetric(Volumetric):
    f: Callable[[float], float] = None
    df: Callable[[float], float] | None = None
    kind: ClassVar[str] = "custom"

    def value(self, i3):
        return float(self.f(i3))

    def derivative(self, i3):
        if self.df is not None:
            return float(self.df(i3))
        return _derivative(self.f, i3)

    def to_dict(self):
        raise TypeError("custom volumetric functions are not serializable")


VOLUMETRIC_KINDS = {
    "zero": Volumetric,
    "log-quadratic": LogQuadraticVolumetric,
    "quadratic-j": QuadraticJVolumetric,
}


def volumetric_from_spec(spec) -> Volumetric:
    if spec is None:
        return LogQuadraticVolumetric()
    if isinstance(spec, Volumetric):
        return spec
    if isinstance(spec, str):
        spec = {"kind": spec}
    spec = dict(spec)
    kind = spec.pop("kind", "log-quadratic")
    try:
        cls = VOLUMETRIC_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown volumetric kind {kind!r}; choose from {sorted(VOLUMETRIC_KINDS)}") from None
    return cls(**spec)


# --------------------------------------------------------------------------
# value types


@dataclass(frozen=True)
class PrincipalState:
    """Principal stretches (descending) and the principal axes as columns of ``basis``."""

    lambdas: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        if lam.shape != (3,) or np.any(lam <= 0) or not np.all(np.isfinite(lam)):
            raise DomainError(f"principal stretches must be 3 positive numbers, got {self.lambdas}")
        basis = np.asarray(self.basis, dtype=float)
        if np.linalg.norm(basis.T @ basis - np.eye(3)) > 1e-8:
            raise DomainError("basis is not orthogonal")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "basis", basis)

    @classmethod
    def from_lambdas(cls, lambdas, basis=None) -> "PrincipalState":
        return cls(np.asarray(lambdas, dtype=float), np.eye(3) if basis is None else basis)

    @classmethod
    def from_B(cls, B) -> "PrincipalState":
        dec = eigendecompose(as_symmetric(B, dims=(3,)))
        if dec.eigenvalues[-1] <= 0:
            raise DomainError("B is not positive definite")
        return cls(np.sqrt(dec.eigenvalues), dec.basis)

    @property
    def B(self) -> np.ndarray:
        return (self.basis * self.lambdas ** 2) @ self.basis.T

    @property
    def V(self) -> np.ndarray:
        return (self.basis * self.lambdas) @ self.basis.T


@dataclass(frozen=True)
class DerivativeTriple:
    dW_dI1: float
    dW_dI2: float
    dW_dI3: float
    scheme: str = "analytic"
    reduced_accuracy: bool = False

    def as_array(self) -> np.ndarray:
        return np.array([self.dW_dI1, self.dW_dI2, self.dW_dI3])


def _spd_spectrum(B):
    B = as_symmetric(B, dims=(3,))
    dec = eigendecompose(B)
    if dec.eigenvalues[-1] <= 0.0:
        raise DomainError("B is not positive definite")
    return B, dec


# --------------------------------------------------------------------------
# models


class ResponseModel(abc.ABC):
    """Isotropic Cauchy stress response ``B -> sigma``."""

    tag: ClassVar[str]
    hyperelastic: ClassVar[bool] = False
    #: True / False when known analytically, None when unknown
    invertible: ClassVar[bool | None] = None

    @abc.abstractmethod
    def principal_stress(self, lambdas: np.ndarray) -> np.ndarray:
        """Principal Cauchy stresses for principal stretches ``lambdas``."""

    def stress(self, B) -> np.ndarray:
        _, dec = _spd_spectrum(B)
        return self.stress_from_spectrum(dec)

    def stress_from_spectrum(self, dec) -> np.ndarray:
        return dec.apply(lambda x: self.principal_stress(np.sqrt(x)))

    def params(self) -> dict:
        return {}

    def to_dict(self) -> dict:
        return {"model": self.tag, "params": self.params()}

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"


class HyperelasticModel(ResponseModel):
    hyperelastic = True

    @abc.abstractmethod
    def energy(self, lambdas) -> float:
        """Stored energy as a symmetric function of the principal stretches."""

    def energy_gradient(self, lambdas) -> np.ndarray:
        """``dW/dlambda_i``; the default is finite differences."""
        return _fd_energy_gradient(self, np.asarray(lambdas, dtype=float))

    def principal_stress(self, lambdas):
        lam = np.asarray(lambdas, dtype=float)
        return lam * self.energy_gradient(lam) / np.prod(lam)

    @abc.abstractmethod
    def analytic_invariant_derivatives(self, x: np.ndarray) -> np.ndarray:
        """``dW/dI_k`` at eigenvalues ``x`` of B (descending)."""

    def iso_vol_split(self):
        """``(bound, volumetric)`` for iso-vol split energies, else None.

        ``bound`` is ``dW_iso/dJ1 + 2 dW_iso/dJ2`` at ``J1 = J2 = 3``.
        """
        return None


class InvariantModel(HyperelasticModel):
    """Energy given in closed form in the principal invariants of B."""

    @abc.abstractmethod
    def energy_invariants(self, i1: float, i2: float, i3: float) -> float:
        ...

    @abc.abstractmethod
    def invariant_gradient(self, i1: float, i2: float, i3: float) -> np.ndarray:
        ...

    def energy(self, lambdas):
        return self.energy_invariants(*invariants_of_values(np.asarray(lambdas, float) ** 2))

    def energy_gradient(self, lambdas):
        lam = np.asarray(lambdas, dtype=float)
        x = lam ** 2
        inv = invariants_of_values(x)
        d = self.invariant_gradient(*inv)
        dI_dx = np.stack([np.ones(3), inv.i1 - x, inv.i3 / x], axis=1)
        return 2.0 * lam * (dI_dx @ d)

    def analytic_invariant_derivatives(self, x):
        return np.asarray(self.invariant_gradient(*invariants_of_values(x)), dtype=float)


class IsoVolSplit(InvariantModel):
    """``W = W_iso(J1, J2) + f(I3)`` with ``J1 = I1 I3^-1/3``, ``J2 = I2 I3^-2/3``.

    The default isochoric part is ``c1 (J1 - 3) + c2 (J2 - 3)``; a custom
    ``w_iso(J1, J2)`` with optional gradient ``dw_iso`` may be passed instead.
    """

    tag = "iso-vol-split"

    def __init__(self, c1: float = 0.5, c2: float = 0.0, f=None, w_iso=None, dw_iso=None):
        self.c1 = float(c1)
        self.c2 = float(c2)
        self.f = volumetric_from_spec(f)
        self.w_iso = w_iso
        self.dw_iso = dw_iso

    def params(self):
        return {"c1": self.c1, "c2": self.c2, "f": self.f.to_dict()}

    def _iso(self, j1, j2):
        if self.w_iso is not None:
            return float(self.w_iso(j1, j2))
        return self.c1 * (j1 - 3.0) + self.c2 * (j2 - 3.0)

    def _iso_grad(self, j1, j2):
        if self.w_iso is None:
            return self.c1, self.c2
        if self.dw_iso is not None:
            return tuple(float(v) for v in self.dw_iso(j1, j2))
        return (_derivative(lambda s: self.w_iso(s, j2), j1),
                _derivative(lambda s: self.w_iso(j1, s), j2))

    def energy_invariants(self, i1, i2, i3):
        return self._iso(i1 * i3 ** (-1 / 3), i2 * i3 ** (-2 / 3)) + self.f.value(i3)

    def invariant_gradient(self, i1, i2, i3):
        w1, w2 = self._iso_grad(i1 * i3 ** (-1 / 3), i2 * i3 ** (-2 / 3))
        d3 = (-i1 * w1 * i3 ** (-4 / 3) / 3.0 - 2.0 * i2 * w2 * i3 ** (-5 / 3) / 3.0
              + self.f.derivative(i3))
        return np.array([w1 * i3 ** (-1 / 3), w2 * i3 ** (-2 / 3), d3])

    def iso_vol_split(self):
        w1, w2 = self._iso_grad(3.0, 3.0)
        return w1 + 2.0 * w2, self.f


class NeoHookeCompressible(IsoVolSplit):
    """``W = mu/2 (I1 I3^-1/3 - 3) + f(I3)``."""

    tag = "neo-hooke"

    def __init__(self, mu: float = 1.0, f=None):
        if mu <= 0:
            raise ValueError("mu must be positive")
        self.mu = float(mu)
        super().__init__(c1=0.5 * mu, c2=0.0, f=f)

    def params(self):
        return {"mu": self.mu, "f": self.f.to_dict()}


class MooneyRivlinCompressible(InvariantModel):
    """``W = c1 (I1 - 3) + c2 (I2 - 3) + f(I3)``.

    Written in the plain invariants, so ``dW/dI1 = c1`` and ``dW/dI2 = c2``
    exactly. This form is not stress free at ``B = id`` unless
    ``c1 + 2 c2 + f'(1) = 0``.
    """

    tag = "mooney-rivlin"

    def __init__(self, c1: float = 1.0, c2: float = 1.0, f="zero"):
        self.c1 = float(c1)
        self.c2 = float(c2)
        self.f = volumetric_from_spec(f)

    def params(self):
        return {"c1": self.c1, "c2": self.c2, "f": self.f.to_dict()}

    def energy_invariants(self, i1, i2, i3):
        return self.c1 * (i1 - 3.0) + self.c2 * (i2 - 3.0) + self.f.value(i3)

    def invariant_gradient(self, i1, i2, i3):
        return np.array([self.c1, self.c2, self.f.derivative(i3)])


def _log_divided_differences(x: np.ndarray, rtol: float, atol: float):
    """First and second divided differences of log on descending nodes.

    Coincident nodes (same cluster) use derivatives, so the interpolant is
    the Hermite one.
    """
    def first(u, v):
        if abs(u - v) <= max(rtol * max(1.0, u, v), atol):
            return 2.0 / (u + v)
        return math.log1p((u - v) / v) / (u - v)

    x1, x2, x3 = (float(v) for v in x)
    d12 = first(x1, x2)
    d23 = first(x2, x3)
    if abs(x1 - x3) <= max(rtol * max(1.0, x1, x3), atol):
        m = (x1 + x2 + x3) / 3.0
        d123 = -0.5 / (m * m)
    else:
        d123 = (d12 - d23) / (x1 - x3)
    return d12, d123


def log_norm_invariant_gradient(x, rtol: float = CLUSTER_RTOL, atol: float = CLUSTER_ATOL) -> np.ndarray:
    """Gradient of ``||log U||^2 = 1/4 sum (log x_i)^2`` with respect to (I1, I2, I3).

    With ``q(x) = 1/2 log x`` one has ``x_i dS/dx_i = q(x_i)`` and, by the
    chain rule, ``x dS/dx = -b x^2 + (a + b I1) x + c I3`` for
    ``(a, b, c) = dS/dI``. The right side is the quadratic interpolant of
    ``q`` at the eigenvalues of B, which stays well defined for repeated ones.
    """
    x = np.sort(np.asarray(x, dtype=float))[::-1]
    i1, _, i3 = invariants_of_values(x)
    d1, d2 = _log_divided_differences(x, rtol, atol)
    d1, d2 = 0.5 * d1, 0.5 * d2
    q1 = 0.5 * math.log(x[0])
    c2 = d2
    c1 = d1 - d2 * (x[0] + x[1])
    c0 = q1 - d1 * x[0] + d2 * x[0] * x[1]
    b = -c2
    return np.array([c1 - b * i1, b, c0 / i3])


class LogStrainModel(HyperelasticModel):
    """Energy ``G(S, t)`` with ``S = ||log U||^2`` and ``t = tr log U``."""

    @abc.abstractmethod
    def g(self, s: float, t: float) -> float:
        ...

    @abc.abstractmethod
    def g_grad(self, s: float, t: float) -> tuple[float, float]:
        ...

    def energy(self, lambdas):
        logs = np.log(np.asarray(lambdas, dtype=float))
        return self.g(float(logs @ logs), float(logs.sum()))

    def energy_gradient(self, lambdas):
        lam = np.asarray(lambdas, dtype=float)
        logs = np.log(lam)
        gs, gt = self.g_grad(float(logs @ logs), float(logs.sum()))
        return (2.0 * gs * logs + gt) / lam

    def analytic_invariant_derivatives(self, x):
        x = np.asarray(x, dtype=float)
        logs = 0.5 * np.log(x)
        gs, gt = self.g_grad(float(logs @ logs), float(logs.sum()))
        grad = gs * log_norm_invariant_gradient(x)
        grad[2] += gt / (2.0 * float(np.prod(x)))
        return grad


class QuadraticHencky(LogStrainModel):
    """``W = mu ||log U||^2 + lambda/2 (tr log U)^2``; requires mu > 0, 3 lambda + 2 mu >= 0."""

    tag = "quadratic-hencky"

    def __init__(self, mu: float = 1.0, lam: float = 0.0):
        if mu <= 0 or 3 * lam + 2 * mu < 0:
            raise ValueError("quadratic Hencky needs mu > 0 and 3 lambda + 2 mu >= 0")
        self.mu = float(mu)
        self.lam = float(lam)

    @classmethod
    def from_bulk(cls, mu: float, kappa: float) -> "QuadraticHencky":
        return cls(mu, kappa - 2.0 * mu / 3.0)

    @property
    def kappa(self) -> float:
        return self.lam + 2.0 * self.mu / 3.0

    def params(self):
        return {"mu": self.mu, "lambda": self.lam}

    def g(self, s, t):
        return self.mu * s + 0.5 * self.lam * t * t

    def g_grad(self, s, t):
        return self.mu, self.lam * t

    def iso_vol_split(self):
        # mu ||dev log U||^2 has dS/dJ1 = dS/dJ2 = 1/4 at the undistorted state
        return 0.75 * self.mu, LogQuadraticVolumetric(self.kappa)


class ExponentialHencky(LogStrainModel):
    """``W = mu/k exp(k ||dev log U||^2) + kappa/(2 k_hat) exp(k_hat (tr log U)^2)``."""

    tag = "exponential-hencky"

    def __init__(self, mu: float = 1.0, k: float = 0.25, kappa: float = 1.0, k_hat: float = 0.125):
        if min(mu, k, kappa, k_hat) <= 0:
            raise ValueError("exponential Hencky parameters must be positive")
        self.mu, self.k, self.kappa, self.k_hat = float(mu), float(k), float(kappa), float(k_hat)

    def params(self):
        return {"mu": self.mu, "k": self.k, "kappa": self.kappa, "k_hat": self.k_hat}

    def g(self, s, t):
        d = s - t * t / 3.0
        return (self.mu / self.k * math.exp(self.k * d)
                + self.kappa / (2.0 * self.k_hat) * math.exp(self.k_hat * t * t))

    def g_grad(self, s, t):
        e = self.mu * math.exp(self.k * (s - t * t / 3.0))
        return e, -2.0 * t / 3.0 * e + self.kappa * t * math.exp(self.k_hat * t * t)

    def iso_vol_split(self):
        kappa, k_hat = self.kappa, self.k_hat
        vol = CustomVolumetric(
            f=lambda i3: kappa / (2 * k_hat) * math.exp(k_hat * (0.5 * math.log(i3)) ** 2),
            df=lambda i3: kappa * 0.25 * math.log(i3) / i3 * math.exp(k_hat * (0.5 * math.log(i3)) ** 2),
        )
        return 0.75 * self.mu, vol


class LogNormSquared(LogStrainModel):
    """``W = ||log U||^2``."""

    tag = "log-norm-squared"

    def g(self, s, t):
        return s

    def g_grad(self, s, t):
        return 1.0, 0.0


MONOTONE_FUNCTIONS: dict[str, tuple[Callable[[float], float], Callable[[float], float]]] = {
    "exp": (math.exp, math.exp),
    "identity": (lambda s: s, lambda s: 1.0),
    "log1p": (math.log1p, lambda s: 1.0 / (1.0 + s)),
}


class MonotoneOfLogNorm(LogStrainModel):
    """``W = f(||log U||^2)`` for increasing ``f``.

    ``f`` is a name from :data:`MONOTONE_FUNCTIONS` or a callable; a callable
    without ``df`` is differentiated numerically.
    """

    tag = "monotone-log-norm"

    def __init__(self, f="exp", df=None):
        if isinstance(f, str):
            try:
                self._f, self._df = MONOTONE_FUNCTIONS[f]
            except KeyError:
                raise ValueError(f"unknown function {f!r}; choose from {sorted(MONOTONE_FUNCTIONS)}") from None
            self.name = f
        else:
            self._f, self._df, self.name = f, df, None

    def params(self):
        if self.name is None:
            raise TypeError("models built from callables are not serializable")
        return {"f": self.name}

    def g(self, s, t):
        return float(self._f(s))

    def g_grad(self, s, t):
        d = self._df(s) if self._df is not None else _derivative(self._f, s)
        return float(d), 0.0


def _polynomial_hencky(mu=1.0, a=0.0, b=0.0, kappa=1.0):
    if mu <= 0 or a < 0 or b < 0:
        raise ValueError("polynomial Hencky-type energy needs mu > 0, a >= 0, b >= 0")

    def w(x1, x2):
        return mu * x1 + a * x1 * x1 + b * x1 * x2 + 0.5 * kappa * x2

    def dw(x1, x2):
        return mu + 2 * a * x1 + b * x2, b * x1 + 0.5 * kappa

    return w, dw


def _exponential_hencky_form(mu=1.0, k=0.25, kappa=1.0, k_hat=0.125):
    def w(x1, x2):
        return mu / k * math.exp(k * x1) + kappa / (2 * k_hat) * math.exp(k_hat * x2)

    def dw(x1, x2):
        return mu * math.exp(k * x1), 0.5 * kappa * math.exp(k_hat * x2)

    return w, dw


HENCKY_FORMS = {"polynomial": _polynomial_hencky, "exponential": _exponential_hencky_form}


class HenckyType(LogStrainModel):
    """``W = w(||dev log U||^2, (tr log U)^2)`` with ``dw/dx1 > 0``.

    ``form`` names an entry of :data:`HENCKY_FORMS` (configured through
    keyword parameters) or is a callable ``w(x1, x2)``; ``dw`` is its gradient
    and is differentiated numerically when omitted.
    """

    tag = "hencky-type"

    def __init__(self, form="polynomial", dw=None, **form_params):
        if isinstance(form, str):
            try:
                self._w, self._dw = HENCKY_FORMS[form](**form_params)
            except KeyError:
                raise ValueError(f"unknown Hencky-type form {form!r}; choose from {sorted(HENCKY_FORMS)}") from None
            self.form = form
            self.form_params = {k: float(v) for k, v in form_params.items()}
        else:
            self._w, self._dw, self.form, self.form_params = form, dw, None, {}

    def params(self):
        if self.form is None:
            raise TypeError("models built from callables are not serializable")
        return {"form": self.form, **self.form_params}

    def _grad_w(self, x1, x2):
        if self._dw is not None:
            return self._dw(x1, x2)
        return (_derivative(lambda s: self._w(s, x2), x1), _derivative(lambda s: self._w(x1, s), x2))

    def g(self, s, t):
        return float(self._w(s - t * t / 3.0, t * t))

    def g_grad(self, s, t):
        w1, w2 = self._grad_w(s - t * t / 3.0, t * t)
        return float(w1), float(-2.0 * t / 3.0 * w1 + 2.0 * t * w2)


class DirectDev3(ResponseModel):
    """``sigma = dev_3 B``: strict Baker-Ericksen, semi-invertible, not injective."""

    tag = "dev3"
    invertible = False

    def principal_stress(self, lambdas):
        x = np.asarray(lambdas, dtype=float) ** 2
        return x - x.mean()

    def stress(self, B):
        B, _ = _spd_spectrum(B)
        return B - np.trace(B) / 3.0 * np.eye(3)


class DirectIdMinusB(ResponseModel):
    """``sigma = id - B``: invertible, violates Baker-Ericksen."""

    tag = "id-minus-b"
    invertible = True

    def principal_stress(self, lambdas):
        return 1.0 - np.asarray(lambdas, dtype=float) ** 2

    def stress(self, B):
        B, _ = _spd_spectrum(B)
        return np.eye(3) - B

    def inverse(self, sigma) -> np.ndarray:
        return np.eye(3) - as_symmetric(sigma, dims=(3,))


def marzano_h(lambdas) -> float:
    l1, l2, l3 = (float(v) for v in lambdas)
    return (l1 - l2) ** 2 * (l1 - l3) ** 2 * (l2 - l3) ** 2


class MarzanoCounterexample(ResponseModel):
    """``sigma = (1 - h) V - id`` with ``h`` the squared Vandermonde product of the stretches.

    Uniaxial tension only arises from simple stretches, yet the law violates
    Baker-Ericksen, e.g. at ``V = diag(3, 2, 1)``.
    """

    tag = "marzano"

    def principal_stress(self, lambdas):
        lam = np.asarray(lambdas, dtype=float)
        return (1.0 - marzano_h(lam)) * lam - 1.0


class SpectralResponse(ResponseModel):
    """``sigma = g(B)`` for a scalar function ``g`` applied to the eigenvalues of B."""

    tag = "spectral"

    def __init__(self, g: Callable[[np.ndarray], np.ndarray]):
        self.g = g

    def principal_stress(self, lambdas):
        return np.asarray(self.g(np.asarray(lambdas, dtype=float) ** 2), dtype=float)

    def params(self):
        raise TypeError("spectral responses are not serializable")


# --------------------------------------------------------------------------
# registry / configuration


MODELS: dict[str, type[ResponseModel]] = {
    cls.tag: cls
    for cls in (
        QuadraticHencky, ExponentialHencky, LogNormSquared, MonotoneOfLogNorm, HenckyType,
        NeoHookeCompressible, MooneyRivlinCompressible, IsoVolSplit, DirectDev3, DirectIdMinusB,
        MarzanoCounterexample,
    )
}


def model_from_dict(config: dict) -> ResponseModel:
    """Build a model from ``{"model": tag, "params": {...}}``."""
    if not isinstance(config, dict) or "model" not in config:
        raise ValueError('model configuration must be an object with a "model" key')
    tag = config["model"]
    try:
        cls = MODELS[tag]
    except KeyError:
        raise ValueError(f"unknown model {tag!r}; choose from {sorted(MODELS)}") from None
    params = dict(config.get("params") or {})
    if cls is QuadraticHencky:
        if "lambda" in params:
            params["lam"] = params.pop("lambda")
        if "kappa" in params:
            return QuadraticHencky.from_bulk(params.get("mu", 1.0), params["kappa"])
    try:
        return cls(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {tag}: {exc}") from None


def default_catalog() -> list[ResponseModel]:
    """One representative instance of every catalog tag."""
    return [
        QuadraticHencky(1.0, 0.0),
        ExponentialHencky(1.0, 0.25, 1.0, 0.125),
        LogNormSquared(),
        MonotoneOfLogNorm("exp"),
        HenckyType("polynomial", mu=1.0, a=0.5, b=0.25, kappa=2.0),
        NeoHookeCompressible(1.0, LogQuadraticVolumetric(2.0)),
        MooneyRivlinCompressible(1.0, 1.0, "zero"),
        IsoVolSplit(0.5, 0.25, LogQuadraticVolumetric(2.0)),
        DirectDev3(),
        DirectIdMinusB(),
        MarzanoCounterexample(),
    ]


# --------------------------------------------------------------------------
# operations


def energy(model: ResponseModel, state: PrincipalState) -> float:
    if not model.hyperelastic:
        raise UnsupportedModelError(f"{model.tag} is a direct stress response without an energy")
    return float(model.energy(state.lambdas))


def cauchy_stress(model: ResponseModel, B) -> np.ndarray:
    return model.stress(B)


def _lambda_system(lam: np.ndarray, grad: np.ndarray) -> np.ndarray:
    x = lam ** 2
    inv = invariants_of_values(x)
    M = np.stack([2 * lam, 2 * lam * (inv.i1 - x), 2 * inv.i3 / lam], axis=1)
    return np.linalg.solve(M, grad)


def _fd_energy_gradient(model: HyperelasticModel, lam: np.ndarray) -> np.ndarray:
    """``dW/dlambda_i`` by the five-point central stencil."""
    grad = np.empty(3)
    for i in range(3):
        h = GRAD_REL_STEP * lam[i]

        def w(t):
            p = lam.copy()
            p[i] += t * h
            return model.energy(p)

        grad[i] = (8.0 * (w(1) - w(-1)) - (w(2) - w(-2))) / (12.0 * h)
    return grad


def _fd_invariant_derivatives(model: HyperelasticModel, lam: np.ndarray) -> np.ndarray:
    return _lambda_system(lam, _fd_energy_gradient(model, lam))


def _near_groups(x: np.ndarray) -> list[list[int]]:
    """Chain descending eigenvalues whose relative gap is below ``NEAR_GAP``."""
    groups = [[0]]
    for i in range(1, len(x)):
        if x[i - 1] - x[i] < NEAR_GAP * x[i - 1]:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def invariant_derivatives(model: ResponseModel, B, scheme: str = "analytic") -> DerivativeTriple:
    """``(dW/dI1, dW/dI2, dW/dI3)`` at B.

    ``scheme="analytic"`` uses the closed-form gradient of the model.
    ``scheme="finite-difference"`` differentiates the energy in the principal
    stretches with a five-point stencil and solves the 3x3 chain-rule system.
    That system degenerates as stretches approach each other. Nearly repeated
    stretches are instead moved apart in log-stretch by ``d``, ``2 d`` and
    ``3 d`` around their mean, and the result is interpolated back to the
    actual offsets. The derivatives are symmetric in those offsets, so the
    interpolation runs in their power sums and is exact to O(d^6). Results
    from this fallback are marked ``reduced_accuracy``.
    """
    if not model.hyperelastic:
        raise UnsupportedModelError(f"{model.tag} has no energy")
    _, dec = _spd_spectrum(B)
    x = dec.eigenvalues
    if scheme == "analytic":
        d = model.analytic_invariant_derivatives(x)
        return DerivativeTriple(*(float(v) for v in d), scheme="analytic")
    if scheme != "finite-difference":
        raise ValueError(f"unknown scheme {scheme!r}")
    u = 0.5 * np.log(x)
    groups = _near_groups(x)
    if len(groups) == 3:
        d = _fd_invariant_derivatives(model, np.exp(u))
        return DerivativeTriple(*(float(v) for v in d), scheme="finite-difference")

    members = next(g for g in groups if len(g) > 1)
    centre = u[members].mean()
    e = u[members] - centre

    def at(offsets):
        out = u.copy()
        out[members] = centre + offsets
        return _fd_invariant_derivatives(model, np.exp(out))

    # the derivatives are symmetric in the offsets, hence functions of the
    # power sums p2, p3 (p4 = p2^2 / 2 for three mean-zero values)
    line = np.array([1.0, -1.0]) if len(members) == 2 else np.array([1.0, 0.0, -1.0])
    samples = [at(k * SPLIT_LOG * line) for k in (1, 2, 3)]
    # quadratic in r = p2 / p2(first sample), through r = 1, 4, 9
    coef = np.linalg.solve(np.vander([1.0, 4.0, 9.0], 3, increasing=True), np.array(samples))
    r = float(e @ e) / (2.0 * SPLIT_LOG ** 2)
    d = coef[0] + coef[1] * r + coef[2] * r * r
    if len(members) == 3:
        # same p2 and p4 as the first sample, so the difference isolates p3
        skew = SPLIT_LOG * np.array([3.0, -1.0, -2.0]) / math.sqrt(7.0)
        d = d + (at(skew) - samples[0]) * float(np.sum(e ** 3)) / float(np.sum(skew ** 3))
    return DerivativeTriple(*(float(v) for v in d), scheme="finite-difference", reduced_accuracy=True)


def beta_from_derivatives(d: DerivativeTriple, inv: Invariants) -> BetaCoefficients:
    """Response coefficients of a hyperelastic law from its invariant derivatives."""
    i1, i2, i3 = inv
    r = math.sqrt(i3)
    return BetaCoefficients(
        beta_m1=-2.0 * r * d.dW_dI2,
        beta_0=2.0 / r * (i2 * d.dW_dI2 + i3 * d.dW_dI3),
        beta_1=2.0 / r * d.dW_dI1,
    )


def beta_coefficients(model: ResponseModel, B, scheme: str = "analytic") -> BetaCoefficients:
    """``(beta_m1, beta_0, beta_1)`` with ``sigma = beta_0 id + beta_1 B + beta_m1 B^-1``.

    Hyperelastic models use their invariant derivatives; direct responses go
    through the minimal-degree Vandermonde representation of ``sigma(B)`` in
    B.
    """
    B, dec = _spd_spectrum(B)
    return _beta_at(model, B, dec, scheme)


def _beta_at(model, B, dec, scheme="analytic", sigma=None) -> BetaCoefficients:
    inv = invariants_of_values(dec.eigenvalues)
    if model.hyperelastic and scheme == "analytic":
        d = model.analytic_invariant_derivatives(dec.eigenvalues)
        return beta_from_derivatives(DerivativeTriple(*(float(v) for v in d)), inv)
    if model.hyperelastic:
        return beta_from_derivatives(invariant_derivatives(model, B, scheme), inv)
    if sigma is None:
        sigma = model.stress_from_spectrum(dec)
    return beta_from_gamma(gamma_coefficients(B, sigma), inv)


def principal_beta(model: ResponseModel, B) -> BetaCoefficients:
    """Response coefficients recovered from the principal stresses alone.

    Independent of any energy: the Vandermonde representation of ``sigma(B)``
    in B, rewritten by Cayley-Hamilton.
    """
    B, dec = _spd_spectrum(B)
    inv = invariants_of_values(dec.eigenvalues)
    return beta_from_gamma(gamma_coefficients(B, model.stress(B)), inv)


def average_deformed_length(B) -> float:
    """Root-mean-square length of deformed unit vectors, ``sqrt(tr B / 3)``."""
    B, _ = _spd_spectrum(B)
    return math.sqrt(np.trace(B) / 3.0)
