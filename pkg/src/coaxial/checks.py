"""
Constitutive-inequality checks on sampled deformation states.

Point checks evaluate one property of a response model at one left
Cauchy-Green tensor and return a :class:`Verdict`. :func:`run_check` sweeps
a :class:`SampleSpec` and collects failures as replayable witnesses, and
:func:`implication_audit` evaluates every property per sample and counts
violations of the chain

    E-TSS => WE-TSS => BE+ => bi-coaxial <=> semi-invertible.

Sign tests use absolute bands: "strict" means a margin above
``1e-10 * (1 + scale)`` and "non-strict" allows down to minus that, where
``scale`` is the size of the quantities being compared.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .constitutive import (
    DirectDev3,
    DirectIdMinusB,
    HyperelasticModel,
    MarzanoCounterexample,
    PrincipalState,
    ResponseModel,
    _beta_at,
    default_catalog,
    marzano_h,
)
from .exceptions import ConvergenceError, DomainError, NotCoaxialError, UnsupportedModelError
from .representation import BetaCoefficients, IllConditionedWarning, psi_direct
from .symmat import (
    CLUSTER_ATOL,
    CLUSTER_RTOL,
    _same,
    as_symmetric,
    cluster_indices,
    commutes,
    eigendecompose,
    from_voigt,
    is_bicoaxial,
    is_coaxial,
    random_rotation,
    to_voigt,
)

STRICT_TOL = 1e-10
SEMI_TOL = 1e-8

TAGS = ("BE", "BEplus", "ETSS", "WETSS", "BICOAX", "SEMI", "INVERT-witness")
# command-line spellings
TAG_ALIASES = {
    "be": "BE", "be+": "BEplus", "beplus": "BEplus", "etss": "ETSS", "wetss": "WETSS",
    "bicoax": "BICOAX", "semi": "SEMI", "invert": "INVERT-witness",
}


def normalize_tag(tag: str) -> str:
    if tag in TAGS:
        return tag
    try:
        return TAG_ALIASES[tag.lower()]
    except KeyError:
        raise ValueError(f"unknown check {tag!r}; choose from {sorted(TAG_ALIASES)}") from None


def _band(scale: float) -> float:
    return STRICT_TOL * (1.0 + scale)


# --------------------------------------------------------------------------
# verdicts and witnesses


@dataclass(frozen=True)
class Verdict:
    """Outcome of one check at one state.

    ``margins`` are signed: positive means the inequality holds with room to
    spare. A skipped verdict (spherical input for WE-TSS) counts as neither
    holding nor failing.
    """

    tag: str
    holds: bool
    margins: dict = field(default_factory=dict)
    skipped: bool = False
    note: str = ""

    @property
    def fails(self) -> bool:
        return not self.holds and not self.skipped

    def to_dict(self) -> dict:
        out = {"check": self.tag, "holds": self.holds, "skipped": self.skipped,
               "margins": {k: _plain(v) for k, v in self.margins.items()}}
        if self.note:
            out["note"] = self.note
        return out


def _plain(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    return float(v)


@dataclass(frozen=True)
class Witness:
    """A state where a check failed, in the symmetric-matrix wire format."""

    B: np.ndarray
    sigma: np.ndarray
    margins: dict
    note: str = ""

    def to_dict(self) -> dict:
        out = {"B": to_voigt(self.B), "sigma": to_voigt(self.sigma),
               "margins": {k: _plain(v) for k, v in self.margins.items()}}
        if self.note:
            out["note"] = self.note
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Witness":
        return cls(from_voigt(d["B"]), from_voigt(d["sigma"]), dict(d.get("margins", {})), d.get("note", ""))


@dataclass
class CheckReport:
    inequality: str
    model: dict
    verdict: str
    witnesses: list
    samples_tested: int
    samples_skipped: int = 0
    failures: int = 0
    notes: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.verdict == "holds-on-sample"

    def to_dict(self) -> dict:
        out = {
            "inequality": self.inequality,
            "model": self.model,
            "verdict": self.verdict,
            "samples_tested": self.samples_tested,
            "samples_skipped": self.samples_skipped,
            "failures": self.failures,
            "witnesses": [w.to_dict() for w in self.witnesses],
        }
        if self.notes:
            out["notes"] = list(self.notes)
        if self.extra:
            out["extra"] = self.extra
        return out


def _model_dict(model: ResponseModel) -> dict:
    try:
        return model.to_dict()
    except TypeError:
        return {"model": model.tag, "params": None}


# --------------------------------------------------------------------------
# per-state evaluation


class _Point:
    """Lazily evaluated quantities of one model at one state, shared by the checks."""

    def __init__(self, model: ResponseModel, B):
        self.model = model
        self.B = as_symmetric(B, dims=(3,))
        self.dec = eigendecompose(self.B)
        if self.dec.eigenvalues[-1] <= 0.0:
            raise DomainError("B is not positive definite")
        self.sigma = model.stress_from_spectrum(self.dec)
        # coaxiality and the polynomial span are unchanged by a spherical shift;
        # removing the mean keeps large pressures from merging distinct stresses
        self.sigma_c = self.sigma - np.trace(self.sigma) / 3.0 * np.eye(3)
        self._dec_sigma = None
        self._beta = None
        self._bicoax = None
        self._semi = None

    @property
    def spherical(self) -> bool:
        return len(self.dec.clusters) == 1

    def principal(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues of B (descending) and the corresponding principal stresses."""
        Q = self.dec.basis
        s = np.einsum("ik,ij,jk->k", Q, self.sigma, Q)
        return self.dec.eigenvalues, s

    @property
    def beta(self) -> BetaCoefficients:
        if self._beta is None:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", IllConditionedWarning)
                self._beta = _beta_at(self.model, self.B, self.dec, sigma=self.sigma)
        return self._beta

    @property
    def dec_sigma(self):
        if self._dec_sigma is None:
            self._dec_sigma = eigendecompose(self.sigma_c)
        return self._dec_sigma

    @property
    def bicoaxial(self) -> bool:
        if self._bicoax is None:
            # commutation at the scale of sigma, eigenvalue patterns on the centered copy
            self._bicoax = commutes(self.B, self.sigma) and is_bicoaxial(
                self.B, self.sigma_c, math.inf, spec_a=self.dec, spec_b=self.dec_sigma)
        return self._bicoax

    def semi_residual(self) -> float:
        """Relative reconstruction residual of the direct semi-inversion, inf if impossible."""
        if self._semi is None:
            try:
                # the residual is what matters here, not the condition number
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", IllConditionedWarning)
                    psi = psi_direct(self.B, self.sigma, centered_spectrum=self.dec_sigma)
                self._semi = psi.residual(self.B, self.sigma)
            except NotCoaxialError:
                self._semi = math.inf
        return self._semi


def _as_point(model, B) -> _Point:
    return B if isinstance(B, _Point) else _Point(model, B)


def _be_margins(p: _Point):
    x, s = p.principal()
    labels = p.dec.cluster_of()
    # differences only, so the band follows the stress spread rather than the pressure
    scale = float(np.max(s) - np.min(s))
    distinct, equal = math.inf, math.inf
    for i in range(3):
        for j in range(i + 1, 3):
            if labels[i] == labels[j]:
                equal = min(equal, -abs(s[i] - s[j]))
            else:
                # x is descending, so lambda_i > lambda_j
                distinct = min(distinct, s[i] - s[j])
    return distinct, equal, scale


def check_be(model: ResponseModel, B) -> Verdict:
    """Baker-Ericksen: a larger principal stretch never carries a smaller principal stress."""
    p = _as_point(model, B)
    distinct, equal, scale = _be_margins(p)
    band = _band(scale)
    margin = min(distinct, equal)
    holds = margin >= -band
    return Verdict("BE", bool(holds), {"min_stress_gap": margin if math.isfinite(margin) else 0.0,
                                       "band": band})


def check_be_plus(model: ResponseModel, B) -> Verdict:
    """Strict Baker-Ericksen on every pair of distinct principal stretches."""
    p = _as_point(model, B)
    distinct, _, scale = _be_margins(p)
    band = _band(scale)
    if not math.isfinite(distinct):
        return Verdict("BEplus", True, {"min_stress_gap": 0.0, "band": band},
                       note="no distinct stretches")
    return Verdict("BEplus", bool(distinct > band), {"min_stress_gap": distinct, "band": band})


def _beta_margins(beta: BetaCoefficients) -> tuple[dict, float, float]:
    # beta_m1 and beta_1 share one band so that E-TSS implies WE-TSS exactly;
    # beta_0 carries the pressure and gets its own
    band = _band(max(abs(beta.beta_m1), abs(beta.beta_1)))
    return ({"beta_m1": -beta.beta_m1, "beta_0": -beta.beta_0, "beta_1": beta.beta_1},
            band, _band(abs(beta.beta_0)))


def check_etss(model: ResponseModel, B) -> Verdict:
    """Empirical inequalities ``beta_m1 <= 0``, ``beta_0 <= 0``, ``beta_1 > 0``."""
    p = _as_point(model, B)
    m, band, band0 = _beta_margins(p.beta)
    holds = m["beta_m1"] >= -band and m["beta_0"] >= -band0 and m["beta_1"] > band
    return Verdict("ETSS", bool(holds), {**m, "band": band, "band_beta_0": band0})


def _derivative_verdict(model, p: _Point):
    d = np.asarray(model.analytic_invariant_derivatives(p.dec.eigenvalues), dtype=float)
    band = _band(float(np.max(np.abs(d[:2]))))
    ok = d[0] >= -band and d[1] >= -band and (d[0] > band or d[1] > band)
    return bool(ok), float(d[0]), float(d[1])


def check_wetss(model: ResponseModel, B) -> Verdict:
    """Weak empirical inequalities ``beta_m1 <= 0 <= beta_1``, one of them strict.

    Spherical states are excluded by definition and come back skipped. For
    hyperelastic models the margins also carry ``dW/dI1`` and ``dW/dI2`` and
    whether they satisfy the same sign pattern.
    """
    p = _as_point(model, B)
    if p.spherical:
        return Verdict("WETSS", False, {}, skipped=True, note="spherical state excluded")
    m, band, _ = _beta_margins(p.beta)
    strict = max(m["beta_m1"], m["beta_1"])
    holds = m["beta_m1"] >= -band and m["beta_1"] >= -band and strict > band
    margins = {"beta_m1": m["beta_m1"], "beta_1": m["beta_1"], "strict": strict, "band": band}
    if isinstance(model, HyperelasticModel):
        ok, w1, w2 = _derivative_verdict(model, p)
        margins.update(dW_dI1=w1, dW_dI2=w2, derivatives_hold=ok)
    return Verdict("WETSS", bool(holds), margins)


def check_bicoaxiality(model: ResponseModel, B) -> Verdict:
    p = _as_point(model, B)
    return Verdict("BICOAX", bool(p.bicoaxial), {})


def check_semi(model: ResponseModel, B, tol: float = SEMI_TOL) -> Verdict:
    """Bi-coaxiality of ``(B, sigma(B))`` plus a direct semi-inversion within ``tol``."""
    p = _as_point(model, B)
    res = p.semi_residual()
    holds = p.bicoaxial and res <= tol
    return Verdict("SEMI", bool(holds), {"residual": res if math.isfinite(res) else -1.0, "tol": tol})


POINT_CHECKS = {
    "BE": check_be,
    "BEplus": check_be_plus,
    "ETSS": check_etss,
    "WETSS": check_wetss,
    "BICOAX": check_bicoaxiality,
    "SEMI": check_semi,
}


def check_point(model: ResponseModel, tag: str, B) -> Verdict:
    tag = normalize_tag(tag)
    if tag == "INVERT-witness":
        raise ValueError("INVERT-witness is a model-level check, use invertibility_witness")
    return POINT_CHECKS[tag](model, B)


# --------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class SampleSpec:
    """Seeded random states ``B = Q diag(lambda^2) Q^T`` plus optional structured families."""

    count: int = 1000
    lambda_range: tuple[float, float] = (0.2, 5.0)
    log_uniform: bool = True
    seed: int = 0
    exclude_spherical: bool = False
    structured: bool = False

    def __post_init__(self):
        lo, hi = self.lambda_range
        if not (0 < lo < hi) or not math.isfinite(hi):
            raise ValueError(f"lambda_range must satisfy 0 < low < high, got {self.lambda_range}")
        if int(self.count) < 1:
            raise ValueError("count must be at least 1")
        object.__setattr__(self, "lambda_range", (float(lo), float(hi)))
        object.__setattr__(self, "count", int(self.count))
        object.__setattr__(self, "seed", int(self.seed))

    def to_dict(self) -> dict:
        return {"count": self.count, "lambda_range": list(self.lambda_range),
                "log_uniform": self.log_uniform, "seed": self.seed,
                "exclude_spherical": self.exclude_spherical, "structured": self.structured}


def _is_spherical(x) -> bool:
    return len(cluster_indices(sorted(x, reverse=True))) == 1


def structured_states(amplitudes: Sequence[float] = (0.3, 0.5, 0.8, 1.25, 2.0, 3.0),
                      shears: Sequence[float] = (0.1, 0.5, 1.0, 2.0)) -> list[np.ndarray]:
    """Uniaxial, equibiaxial, volumetric and simple-shear families of B."""
    out = []
    for a in amplitudes:
        out.append(np.diag([a * a, 1.0, 1.0]))
        out.append(np.diag([a * a, a * a, a ** -4]))
        out.append(a * a * np.eye(3))
    for g in shears:
        F = np.eye(3)
        F[0, 1] = g
        out.append(F @ F.T)
    return out


def sample_states(spec: SampleSpec) -> Iterator[np.ndarray]:
    """Yield ``spec.count`` states; structured families come first when requested."""
    emitted = 0
    if spec.structured:
        for B in structured_states():
            if emitted == spec.count:
                return
            if spec.exclude_spherical and _is_spherical(np.diag(B)) and np.count_nonzero(B - np.diag(np.diag(B))) == 0:
                continue
            yield B
            emitted += 1
    rng = np.random.default_rng(spec.seed)
    lo, hi = spec.lambda_range
    while emitted < spec.count:
        if spec.log_uniform:
            lam = np.exp(rng.uniform(math.log(lo), math.log(hi), 3))
        else:
            lam = rng.uniform(lo, hi, 3)
        Q = random_rotation(rng)
        x = lam * lam
        if spec.exclude_spherical and _is_spherical(x):
            continue
        B = (Q * x) @ Q.T
        yield 0.5 * (B + B.T)
        emitted += 1


# --------------------------------------------------------------------------
# sweeps, witness minimization and replay


def _scaled_state(B, t: float) -> np.ndarray:
    """Move B toward the spherical state of equal determinant, linearly in log-stretch."""
    dec = eigendecompose(B)
    logx = np.log(dec.eigenvalues)
    target = logx.mean()
    x = np.exp(target + t * (logx - target))
    out = (dec.basis * x) @ dec.basis.T
    return 0.5 * (out + out.T)


def _fails_at(model, tag, B) -> bool:
    return check_point(model, tag, B).fails


def _roundtrip(B) -> np.ndarray:
    return from_voigt(to_voigt(B))


def minimize_witness(model: ResponseModel, tag: str, B, steps: int = 12) -> np.ndarray:
    """Pull a failing state toward the spherical anchor while it keeps failing.

    Bisects the log-stretch interpolation parameter between the anchor
    (``t = 0``) and the failing state (``t = 1``). If the anchor itself fails
    there is no boundary to approach and B is returned unchanged. The result
    is a state that fails again after a round trip through the wire format.
    """
    B = as_symmetric(B, dims=(3,))
    try:
        anchor_fails = _fails_at(model, tag, _scaled_state(B, 0.0))
    except Exception:
        return B
    if anchor_fails:
        return B
    lo, hi = 0.0, 1.0
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        try:
            failing = _fails_at(model, tag, _scaled_state(B, mid))
        except Exception:
            failing = False
        if failing:
            hi = mid
        else:
            lo = mid
    candidate = _roundtrip(_scaled_state(B, hi))
    return candidate if _fails_at(model, tag, candidate) else B


def replay_witness(model: ResponseModel, tag: str, witness) -> Verdict:
    """Re-evaluate a check at a serialized witness state."""
    if isinstance(witness, dict):
        witness = Witness.from_dict(witness)
    return check_point(model, tag, witness.B)


def run_check(model: ResponseModel, tag: str, spec: SampleSpec, max_witnesses: int = 3,
              minimize: bool = True) -> CheckReport:
    """Sweep ``spec`` with one check and report failures as witnesses."""
    tag = normalize_tag(tag)
    if tag == "INVERT-witness":
        return invertibility_report(model)
    tested = skipped = failures = 0
    witnesses = []
    extra = {}
    min_strict = math.inf
    deriv_mismatch = 0
    for B in sample_states(spec):
        v = check_point(model, tag, B)
        if v.skipped:
            skipped += 1
            continue
        tested += 1
        if tag == "WETSS":
            min_strict = min(min_strict, v.margins["strict"] / (1.0 + abs(v.margins["beta_1"])
                                                                  + abs(v.margins["beta_m1"])))
            if "derivatives_hold" in v.margins and v.margins["derivatives_hold"] != v.holds:
                deriv_mismatch += 1
        if v.fails:
            failures += 1
            if len(witnesses) < max_witnesses:
                Bw = minimize_witness(model, tag, B) if minimize else _roundtrip(B)
                vw = check_point(model, tag, Bw)
                witnesses.append(Witness(Bw, model.stress(Bw), vw.margins))
    notes = []
    if tag == "WETSS" and tested:
        extra["min_relative_strict_margin"] = min_strict
        extra["uniformly_strict_on_sample"] = bool(min_strict > STRICT_TOL)
        if isinstance(model, HyperelasticModel):
            extra["derivative_mismatches"] = deriv_mismatch
        notes.append("strictness is per state; the uniform reading is reported separately")
    return CheckReport(tag, _model_dict(model), "fails" if failures else "holds-on-sample",
                       witnesses, tested, skipped, failures, notes, extra)


# --------------------------------------------------------------------------
# invertibility witnesses


def non_injectivity_witness(model: ResponseModel, probes: Sequence[float] = (2.0, 0.5, 3.0)):
    """Two distinct states with equal stress, or None.

    Tries the spherical pairs ``(id, c id)`` and shifts ``(B, B + c id)`` of a
    fixed anisotropic state.
    """
    base = np.diag([4.0, 2.0, 1.0])
    pairs = [(np.eye(3), c * np.eye(3)) for c in probes]
    pairs += [(base, base + c * np.eye(3)) for c in probes]
    for B1, B2 in pairs:
        s1, s2 = model.stress(B1), model.stress(B2)
        if np.linalg.norm(s1 - s2) <= _band(max(np.linalg.norm(s1), np.linalg.norm(s2))):
            return B1, B2, s1
    return None


def invertibility_report(model: ResponseModel) -> CheckReport:
    """Concrete certificate for the model's invertibility flag.

    Non-invertible models get two distinct states with equal stress. Models
    with a known inverse get a round trip ``inverse(sigma(B)) == B``.
    """
    witnesses, notes = [], []
    if model.invertible is False:
        found = non_injectivity_witness(model)
        if found is None:
            notes.append("no collision found among the probe states")
            verdict = "fails"
        else:
            B1, B2, s = found
            witnesses = [Witness(B1, s, {}, "equal stress"), Witness(B2, s, {}, "equal stress")]
            verdict = "holds-on-sample"
        notes.append("not invertible")
    elif model.invertible is True and hasattr(model, "inverse"):
        B = np.diag([4.0, 2.0, 1.0])
        err = float(np.linalg.norm(model.inverse(model.stress(B)) - B))
        witnesses = [Witness(B, model.stress(B), {"roundtrip_error": err}, "inverse round trip")]
        verdict = "holds-on-sample" if err <= 1e-12 else "fails"
        notes.append("invertible")
    else:
        verdict = "fails"
        notes.append("invertibility is not known for this model")
    return CheckReport("INVERT-witness", _model_dict(model), verdict, witnesses, 1, 0,
                       0 if verdict != "fails" else 1, notes)


# --------------------------------------------------------------------------
# implication chain


CHAIN = (("ETSS", "WETSS"), ("WETSS", "BEplus"), ("BEplus", "BICOAX"), ("BICOAX", "SEMI"),
         ("SEMI", "BICOAX"))
PROPERTIES = ("ETSS", "WETSS", "BEplus", "BE", "BICOAX", "SEMI")


@dataclass
class AuditReport:
    model: dict
    samples: int
    counts: dict
    violations: dict
    witnesses: dict
    non_implications: dict
    derivative_mismatches: int | None
    uniformly_strict: bool | None

    @property
    def total_violations(self) -> int:
        return sum(self.violations.values())

    def status(self, prop: str) -> str:
        c = self.counts[prop]
        if c["fails"]:
            return "fails"
        return "holds" if c["holds"] else "skipped"

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "samples": self.samples,
            "counts": self.counts,
            "violations": self.violations,
            "violation_witnesses": {k: [w.to_dict() for w in v] for k, v in self.witnesses.items()},
            "non_implications": self.non_implications,
            "derivative_mismatches": self.derivative_mismatches,
            "wetss_uniformly_strict": self.uniformly_strict,
        }


def implication_audit(model: ResponseModel, spec: SampleSpec, max_witnesses: int = 3) -> AuditReport:
    """Evaluate all properties per sample and count broken implications.

    A link ``P => Q`` is violated at a sample where P holds and Q fails; a
    skipped Q (spherical WE-TSS) is not a violation. Also records the two
    non-implications "invertible but not BE" and "BE+ but not invertible"
    when the model's invertibility flag allows them.
    """
    counts = {p: {"holds": 0, "fails": 0, "skipped": 0} for p in PROPERTIES}
    links = [f"{a}=>{b}" for a, b in CHAIN]
    violations = {k: 0 for k in links}
    witnesses = {k: [] for k in links}
    deriv_mismatch = 0 if isinstance(model, HyperelasticModel) else None
    min_strict = math.inf
    first_not_be = None
    n = 0
    for B in sample_states(spec):
        n += 1
        p = _Point(model, B)
        v = {prop: POINT_CHECKS[prop](model, p) for prop in PROPERTIES}
        for prop, verdict in v.items():
            key = "skipped" if verdict.skipped else ("holds" if verdict.holds else "fails")
            counts[prop][key] += 1
        for (a, b), key in zip(CHAIN, links):
            if v[a].holds and v[b].fails:
                violations[key] += 1
                if len(witnesses[key]) < max_witnesses:
                    witnesses[key].append(Witness(p.B, p.sigma, {**v[a].margins, **v[b].margins}))
        w = v["WETSS"]
        if not w.skipped:
            if deriv_mismatch is not None and w.margins["derivatives_hold"] != w.holds:
                deriv_mismatch += 1
            if w.holds:
                min_strict = min(min_strict, w.margins["strict"])
        if first_not_be is None and v["BE"].fails:
            first_not_be = Witness(p.B, p.sigma, v["BE"].margins)

    non_impl = {}
    if model.invertible is True and first_not_be is not None:
        non_impl["invertible-not-BE"] = {"witness": first_not_be.to_dict()}
    if model.invertible is False and counts["BEplus"]["fails"] == 0:
        found = non_injectivity_witness(model)
        if found is not None:
            B1, B2, s = found
            non_impl["BEplus-not-invertible"] = {"B_first": to_voigt(B1), "B_second": to_voigt(B2),
                                                 "sigma": to_voigt(s)}
    uniform = None
    if counts["WETSS"]["holds"] and not counts["WETSS"]["fails"]:
        uniform = bool(min_strict > STRICT_TOL)
    return AuditReport(_model_dict(model), n, counts, violations, witnesses, non_impl,
                       deriv_mismatch, uniform)


def summary_table(audits: Sequence[AuditReport], digits: int = 6) -> str:
    """Text table with one row per property and one column per model."""
    names = [a.model["model"] for a in audits]
    width = max([len(x) for x in names] + [10])
    head = "property".ljust(10) + "".join(x.rjust(width + 2) for x in names)
    lines = [head, "-" * len(head)]
    for prop in PROPERTIES:
        cells = []
        for a in audits:
            c = a.counts[prop]
            st = a.status(prop)
            cells.append(f"{st}" if st != "fails" else f"fails {c['fails']}/{a.samples}")
        lines.append(prop.ljust(10) + "".join(c.rjust(width + 2) for c in cells))
    lines.append("violations".ljust(10) + "".join(str(a.total_violations).rjust(width + 2) for a in audits))
    return "\n".join(lines)


# --------------------------------------------------------------------------
# sum of squared logarithms


@dataclass(frozen=True)
class SSLIResult:
    hypotheses_hold: bool
    conclusion_holds: bool
    strict: bool


def _ssli_arrays(a: np.ndarray, b: np.ndarray, rtol: float = 1e-12):
    """Vectorized hypothesis and conclusion tests on rows of positive triples."""
    a, b = np.atleast_2d(a).astype(float), np.atleast_2d(b).astype(float)
    e1a, e1b = a.sum(1), b.sum(1)
    e2a = a[:, 0] * a[:, 1] + a[:, 0] * a[:, 2] + a[:, 1] * a[:, 2]
    e2b = b[:, 0] * b[:, 1] + b[:, 0] * b[:, 2] + b[:, 1] * b[:, 2]
    pa, pb = a.prod(1), b.prod(1)
    hyp = ((e1a <= e1b * (1 + rtol)) & (e2a <= e2b * (1 + rtol))
           & (np.abs(pa - pb) <= rtol * np.maximum(pa, pb)))
    lhs = (np.log(a) ** 2).sum(1)
    rhs = (np.log(b) ** 2).sum(1)
    conclusion = lhs <= rhs * (1 + rtol) + rtol
    return hyp, conclusion, rhs > lhs


def _triples_differ(a, b, tol: float = 1e-6) -> np.ndarray:
    la = np.sort(np.log(np.atleast_2d(a)), axis=1)
    lb = np.sort(np.log(np.atleast_2d(b)), axis=1)
    return np.max(np.abs(la - lb), axis=1) > tol


def ssli_check(a: Sequence[float], b: Sequence[float]) -> SSLIResult:
    """Hypotheses and conclusion of the sum-of-squared-logarithms inequality for one pair.

    ``strict`` reports whether ``sum log^2 a < sum log^2 b``.
    """
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != (3,) or b.shape != (3,) or np.any(a <= 0) or np.any(b <= 0):
        raise DomainError("ssli_check needs two triples of positive numbers")
    hyp, conc, strict = _ssli_arrays(a, b)
    return SSLIResult(bool(hyp[0]), bool(conc[0]), bool(strict[0]))


def ssli_pairs(n: int, seed: int = 0, generator: str = "shrink", log_range: float = 2.0):
    """Hypothesis-satisfying pairs ``(a, b)``.

    ``"shrink"`` draws b log-uniform and sets ``a = g (b / g)^t`` with g the
    geometric mean and t uniform in [0, 1); this fixes the product and can only
    lower the elementary symmetric functions. ``"reject"`` draws a and b
    independently at equal product and keeps pairs that pass the hypotheses.
    """
    rng = np.random.default_rng(seed)
    if generator == "shrink":
        lb = rng.uniform(-log_range, log_range, (n, 3))
        t = rng.uniform(0.0, 1.0, (n, 1))
        g = lb.mean(1, keepdims=True)
        return np.exp(g + t * (lb - g)), np.exp(lb)
    if generator != "reject":
        raise ValueError(f"unknown generator {generator!r}")
    out_a, out_b, have = [], [], 0
    while have < n:
        m = 4 * (n - have) + 16
        la = rng.uniform(-log_range, log_range, (m, 3))
        lb = rng.uniform(-log_range, log_range, (m, 3))
        lb += (la.sum(1) - lb.sum(1))[:, None] / 3.0
        a, b = np.exp(la), np.exp(lb)
        hyp, _, _ = _ssli_arrays(a, b)
        out_a.append(a[hyp])
        out_b.append(b[hyp])
        have += int(hyp.sum())
    return np.concatenate(out_a)[:n], np.concatenate(out_b)[:n]


def ssli_fuzz(n: int = 100_000, seed: int = 0, generator: str = "shrink") -> dict:
    """Count conclusion violations and missing strictness over generated pairs."""
    a, b = ssli_pairs(n, seed, generator)
    hyp, conc, strict = _ssli_arrays(a, b)
    differ = _triples_differ(a, b)
    bad = np.flatnonzero(hyp & ~conc)
    return {
        "generator": generator,
        "seed": int(seed),
        "pairs": int(n),
        "hypotheses_hold": int(hyp.sum()),
        "conclusion_violations": int(bad.size),
        "differing_pairs": int((hyp & differ).sum()),
        "strict_missing": int((hyp & differ & ~strict).sum()),
        "first_violation": None if bad.size == 0 else {"a": a[bad[0]].tolist(), "b": b[bad[0]].tolist()},
    }


# --------------------------------------------------------------------------
# volumetric E-TSS probe


@dataclass
class VolumetricProbe:
    model: dict
    bound: float
    grid: list
    lhs: list
    first_exceeding: float | None
    monotone_pressure: bool
    beta0_witness: dict | None

    def to_dict(self) -> dict:
        return {"model": self.model, "bound": self.bound, "grid": self.grid, "lhs": self.lhs,
                "first_exceeding": self.first_exceeding, "monotone_pressure": self.monotone_pressure,
                "beta0_witness": self.beta0_witness}


def volumetric_etss_probe(model: HyperelasticModel, grid: Sequence[float] | None = None) -> VolumetricProbe:
    """Compare ``lam^3 f'(lam^3)`` with the isochoric bound along ``B = lam id``.

    The bound is ``dW_iso/dJ1 + 2 dW_iso/dJ2`` at the undistorted state; E-TSS
    at spherical expansion requires the left side not to exceed it. Also
    reports whether the energy grows with ``lam`` for ``lam > 1`` and the first
    grid state where ``beta_0 > 0``, which is a direct E-TSS failure.

    Raises
    ------
    UnsupportedModelError
        If the model has no isochoric-volumetric split.
    """
    split = model.iso_vol_split() if isinstance(model, HyperelasticModel) else None
    if split is None:
        raise UnsupportedModelError(f"{model.tag} has no isochoric-volumetric split")
    bound, vol = split
    grid = [float(v) for v in (np.linspace(1.05, 3.0, 40) if grid is None else grid)]
    if any(v <= 1.0 for v in grid):
        raise ValueError("grid values must exceed 1")
    lhs = [float(v ** 3 * vol.derivative(v ** 3)) for v in grid]
    first = next((v for v, l in zip(grid, lhs) if l > bound), None)
    monotone = True
    for v in grid:
        h = 1e-6 * v
        dw = (model.energy(np.full(3, math.sqrt(v + h))) - model.energy(np.full(3, math.sqrt(v - h)))) / (2 * h)
        monotone &= bool(dw > 0)
    witness = None
    for v in grid:
        B = v * np.eye(3)
        beta = _Point(model, B).beta
        if beta.beta_0 > _band(abs(beta.beta_0)):
            witness = {"lambda": v, "B": to_voigt(B), "beta": beta.to_dict()}
            break
    return VolumetricProbe(_model_dict(model), float(bound), grid, lhs, first, monotone, witness)


def replay_beta0_witness(model: ResponseModel, witness: dict) -> bool:
    """True iff ``beta_0 > 0`` again at the serialized witness state."""
    B = from_voigt(witness["B"])
    beta = _Point(model, B).beta
    return bool(beta.beta_0 > _band(abs(beta.beta_0)))


# --------------------------------------------------------------------------
# uniaxial inversion


@dataclass
class UniaxialSolution:
    state: PrincipalState
    residual: float
    iterations: int
    simple_extension: bool

    def to_dict(self) -> dict:
        return {"lambdas": [float(v) for v in self.state.lambdas], "residual": self.residual,
                "iterations": self.iterations, "simple_extension": self.simple_extension}


def uniaxial_inversion(model: ResponseModel, s: float, tol: float = 1e-10, max_iter: int = 100,
                       start=(1.0, 1.0, 1.0)) -> UniaxialSolution:
    """Solve ``sigma(V) = diag(s, 0, 0)`` for the principal stretches.

    Damped Newton in log-stretches with a forward-difference Jacobian,
    stopping once the max-norm residual is at most ``tol``.

    Raises
    ------
    ConvergenceError
        If the residual is still above ``tol`` after ``max_iter`` iterations.
    """
    if not s >= 0 or not math.isfinite(s):
        raise ValueError("uniaxial stress must be a non-negative number")
    target = np.array([s, 0.0, 0.0])

    def resid(u):
        return model.principal_stress(np.exp(u)) - target

    u = np.log(np.asarray(start, dtype=float))
    r = resid(u)
    it = 0
    while np.max(np.abs(r)) > tol:
        if it == max_iter:
            raise ConvergenceError(f"uniaxial inversion did not converge in {max_iter} iterations "
                                   f"(residual {np.max(np.abs(r)):.3e})")
        it += 1
        J = np.empty((3, 3))
        for k in range(3):
            h = 1e-7 * max(1.0, abs(u[k]))
            du = u.copy()
            du[k] += h
            J[:, k] = (resid(du) - r) / h
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, -r, rcond=None)[0]
        norm = np.max(np.abs(r))
        t = 1.0
        while t > 1e-4:
            trial = resid(u + t * step)
            if np.all(np.isfinite(trial)) and np.max(np.abs(trial)) < norm:
                break
            t *= 0.5
        u = u + t * step
        r = resid(u)
    lam = np.exp(u)
    state = PrincipalState.from_lambdas(lam)
    simple = _same(lam[1], lam[2], CLUSTER_RTOL, CLUSTER_ATOL)
    return UniaxialSolution(state, float(np.max(np.abs(r))), it, bool(simple))


marzano_uniaxial_demo = uniaxial_inversion


# --------------------------------------------------------------------------
# fixed examples


@dataclass
class ExampleResult:
    name: str
    passed: bool
    details: dict


@dataclass
class RegressionReport:
    results: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_dict(self) -> dict:
        return {"passed": self.passed,
                "examples": [{"name": r.name, "passed": r.passed, "details": r.details} for r in self.results]}

    def table(self) -> str:
        width = max(len(r.name) for r in self.results)
        return "\n".join(f"{r.name.ljust(width)}  {'pass' if r.passed else 'FAIL'}" for r in self.results)


def _coaxial_asymmetry():
    A, B = np.eye(2), np.diag([1.0, 0.0])
    ab, ba = is_coaxial(A, B), is_coaxial(B, A)
    return ab != ba, {"A_coaxial_to_B": ab, "B_coaxial_to_A": ba}


def _commuting_not_coaxial():
    A, B = np.diag([1.0, 1.0, 0.0]), np.diag([0.0, 1.0, 1.0])
    comm = bool(np.allclose(A @ B, B @ A))
    ab, ba = is_coaxial(A, B), is_coaxial(B, A)
    return comm and not ab and not ba, {"commute": comm, "A_coaxial_to_B": ab, "B_coaxial_to_A": ba}


def _non_isotropic_map():
    def phi(X):
        return X[0, 0] * np.eye(2)

    X = np.diag([1.0, 2.0])
    Q = np.array([[0.0, 1.0], [1.0, 0.0]])
    lhs, rhs = phi(Q @ X @ Q.T), Q @ phi(X) @ Q.T
    coax = bool(is_coaxial(X, phi(X)))
    isotropic = bool(np.allclose(lhs, rhs))
    return coax and not isotropic, {"phi_coaxial_to_X": coax, "isotropic": isotropic,
                                    "phi_QXQt": to_voigt(lhs), "Q_phiX_Qt": to_voigt(rhs)}


def _dev3():
    m = DirectDev3()
    states = [np.diag([4.0, 2.0, 1.0]), np.diag([9.0, 1.0, 1.0]), from_voigt([3, 2, 1, 0.5, 0.2, 0.1])]
    beplus = all(check_be_plus(m, B).holds for B in states)
    semi = all(check_semi(m, B).holds for B in states)
    collision = non_injectivity_witness(m) is not None
    s1, s2 = m.stress(np.eye(3)), m.stress(2 * np.eye(3))
    zero = bool(np.allclose(s1, 0) and np.allclose(s2, 0))
    return beplus and semi and collision and zero, {"BEplus": beplus, "semi_invertible": semi,
                                                     "sigma_id_equals_sigma_2id": zero}


def _id_minus_b():
    m = DirectIdMinusB()
    B = np.diag([4.0, 1.0, 1.0])
    be = check_be(m, B)
    roundtrip = bool(np.allclose(m.inverse(m.stress(B)), B))
    semi = check_semi(m, np.diag([4.0, 2.0, 1.0])).holds
    return roundtrip and be.fails and semi, {"invertible": roundtrip, "BE": be.holds,
                                             "semi_invertible": semi,
                                             "sigma": [float(v) for v in np.diag(m.stress(B))]}


def _simple_extension():
    m = MarzanoCounterexample()
    lam = np.array([3.0, 2.0, 1.0])
    h = marzano_h(lam)
    reference_h = 2.0
    sig = m.principal_stress(lam)
    sig_reference = (1.0 - reference_h) * lam - 1.0
    be = check_be(m, np.diag(lam ** 2))
    sols = {}
    ok = True
    for s in (0.1, 0.5, 2.0):
        sol = uniaxial_inversion(m, s)
        expect = np.array([1.0 + s, 1.0, 1.0])
        good = bool(np.allclose(sol.state.lambdas, expect, rtol=0, atol=1e-9) and sol.residual <= 1e-10)
        sols[str(s)] = {**sol.to_dict(), "expected": expect.tolist(), "ok": good}
        ok &= good
    violated = bool(be.fails and sig[0] < sig[1])
    violated_reference = bool(sig_reference[0] < sig_reference[1])
    details = {
        "h_formula": h, "h_reference": reference_h, "h_discrepancy": h != reference_h,
        "sigma_formula": sig.tolist(), "sigma_reference_h": sig_reference.tolist(),
        "BE_violated": violated, "BE_violated_reference_h": violated_reference,
        "uniaxial": sols,
    }
    return ok and violated and violated_reference, details


EXAMPLES = {
    "coaxial-asymmetry": _coaxial_asymmetry,
    "commuting-not-coaxial": _commuting_not_coaxial,
    "non-isotropic-map": _non_isotropic_map,
    "dev3": _dev3,
    "id-minus-b": _id_minus_b,
    "simple-extension": _simple_extension,
}


def examples_regression(only: Sequence[str] | str | None = None) -> RegressionReport:
    """Run the fixed worked examples and counterexamples.

    ``only`` restricts the run to the named examples (see :data:`EXAMPLES`).
    """
    if isinstance(only, str):
        only = [only]
    names = list(EXAMPLES) if not only else list(only)
    unknown = [n for n in names if n not in EXAMPLES]
    if unknown:
        raise ValueError(f"unknown example(s) {unknown}; choose from {list(EXAMPLES)}")
    results = []
    for name in names:
        passed, details = EXAMPLES[name]()
        results.append(ExampleResult(name, bool(passed), _jsonable(details)))
    return RegressionReport(results)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def audit_catalog(spec: SampleSpec, models: Sequence[ResponseModel] | None = None) -> list[AuditReport]:
    return [implication_audit(m, spec) for m in (models or default_catalog())]
