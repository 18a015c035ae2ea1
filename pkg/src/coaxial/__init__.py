"""Coaxiality, semi-invertibility and constitutive-inequality checks for isotropic elasticity."""

from .checks import (
    AuditReport,
    CheckReport,
    SampleSpec,
    Verdict,
    Witness,
    check_be,
    check_be_plus,
    check_bicoaxiality,
    check_etss,
    check_semi,
    check_wetss,
    implication_audit,
    examples_regression,
    replay_witness,
    run_check,
    ssli_check,
    ssli_fuzz,
    uniaxial_inversion,
    volumetric_etss_probe,
)
from .constitutive import (
    MODELS,
    DirectDev3,
    DirectIdMinusB,
    ExponentialHencky,
    HenckyType,
    IsoVolSplit,
    LogNormSquared,
    MarzanoCounterexample,
    MonotoneOfLogNorm,
    MooneyRivlinCompressible,
    NeoHookeCompressible,
    PrincipalState,
    QuadraticHencky,
    beta_coefficients,
    cauchy_stress,
    default_catalog,
    invariant_derivatives,
    model_from_dict,
    principal_beta,
)
from .exceptions import (
    CoaxialError,
    ConvergenceError,
    DegenerateCoefficientsError,
    DimensionError,
    DomainError,
    EigenConvergenceError,
    NotCoaxialError,
    NotCommutingError,
    UnsupportedModelError,
)
from .representation import (
    BetaCoefficients,
    GammaCoefficients,
    PsiCoefficients,
    beta_from_gamma,
    gamma_coefficients,
    psi_direct,
    psi_from_beta,
)
from .symmat import (
    Invariants,
    SpectralDecomposition,
    commutes,
    eigendecompose,
    from_voigt,
    invariants,
    is_bicoaxial,
    is_coaxial,
    simultaneous_diagonalize,
    to_voigt,
)

__version__ = "0.1.0"
