import json
import math

import numpy as np
import pytest

from coaxial.checks import (
    SampleSpec,
    Witness,
    check_be,
    check_be_plus,
    check_bicoaxiality,
    check_etss,
    check_point,
    check_semi,
    check_wetss,
    implication_audit,
    invertibility_report,
    minimize_witness,
    normalize_tag,
    examples_regression,
    replay_beta0_witness,
    replay_witness,
    run_check,
    sample_states,
    ssli_check,
    ssli_fuzz,
    ssli_pairs,
    summary_table,
    uniaxial_inversion,
    volumetric_etss_probe,
)
from coaxial.constitutive import (
    DirectDev3,
    DirectIdMinusB,
    ExponentialHencky,
    IsoVolSplit,
    LogNormSquared,
    MarzanoCounterexample,
    MooneyRivlinCompressible,
    NeoHookeCompressible,
    QuadraticHencky,
    SpectralResponse,
)
from coaxial.exceptions import ConvergenceError, DomainError, UnsupportedModelError
from coaxial.representation import BetaCoefficients
from coaxial.symmat import random_rotation

from conftest import rotated


# --- point checks --------------------------------------------------------------

def test_be_examples(rng):
    v = check_be(DirectIdMinusB(), np.diag([4.0, 1.0, 1.0]))
    assert v.fails and v.margins["min_stress_gap"] == pytest.approx(-3.0)
    for _ in range(20):
        assert check_be(DirectDev3(), rotated(rng, np.exp(rng.uniform(-2, 2, 3)))).holds
    assert check_be(MarzanoCounterexample(), np.diag([9.0, 4.0, 1.0])).fails


def test_be_plus_examples(rng):
    assert check_be_plus(DirectDev3(), np.diag([4.0, 2.0, 1.0])).holds
    assert check_be_plus(DirectIdMinusB(), np.diag([4.0, 2.0, 1.0])).fails
    for B in sample_states(SampleSpec(count=200, seed=3)):
        assert check_be_plus(QuadraticHencky(), B).holds


def test_etss_examples():
    B = np.diag([4.0, 1.0, 1.0])
    v = check_etss(MooneyRivlinCompressible(1.0, 1.0), B)
    # beta_0 = 2/sqrt(I3) I2 c2 = 9 > 0
    assert v.fails and v.margins["beta_0"] == pytest.approx(-9.0)

    beta =BetaCoefficients(-0.5, -1.0, 2.0)
    model = SpectralResponse(beta.principal)
    assert check_etss(model, np.diag([3.0, 2.0, 0.5])).holds


def test_wetss_examples():
    assert check_wetss(QuadraticHencky(), 2 * np.eye(3)).skipped
    assert not check_wetss(QuadraticHencky(), 2 * np.eye(3)).fails
    v = check_wetss(QuadraticHencky(), np.diag([4.0, 1.0, 0.25]))
    assert v.holds and v.margins["derivatives_hold"]
    assert check_wetss(DirectIdMinusB(), np.diag([4.0, 1.0, 0.25])).fails


def test_semi_examples():
    assert check_semi(DirectDev3(), np.diag([4.0, 2.0, 1.0])).holds
    assert check_semi(DirectIdMinusB(), np.diag([4.0, 2.0, 1.0])).holds
    # g(x) = (x - 1)^2 sends 0.5 and 1.5 to the same stress
    collapse = SpectralResponse(lambda x: (x - 1.0) ** 2)
    B = np.diag([1.5, 0.5, 3.0])
    assert not check_bicoaxiality(collapse, B).holds
    v = check_semi(collapse, B)
    assert v.fails and v.margins["residual"] == -1.0
    # away from the collision the same response is bi-coaxial
    assert check_semi(collapse, np.diag([4.0, 3.0, 2.5])).holds


def test_unknown_tag():
    assert normalize_tag("be+") == "BEplus"
    with pytest.raises(ValueError):
        normalize_tag("nope")
    with pytest.raises(ValueError):
        check_point(DirectDev3(), "invert", np.eye(3))


def test_point_checks_reject_non_spd():
    with pytest.raises(DomainError):
        check_be(QuadraticHencky(), np.diag([1.0, -1.0, 2.0]))


def test_wetss_implies_strict_be_mechanism(rng):
    # independent of any model: random sign-compliant beta and distinct stretches
    for _ in range(5000):
        bm, b0, b1 = -rng.uniform(0, 2), rng.uniform(-3, 3), rng.uniform(0, 2)
        if rng.random() < 0.3:
            bm = 0.0
        elif rng.random() < 0.3:
            b1 = 0.0
        if max(-bm, b1) < 1e-3:
            continue
        x = np.sort(np.exp(rng.uniform(-2, 2, 3)))[::-1]
        if np.min(-np.diff(x)) < 1e-3:
            continue
        s = BetaCoefficients(bm, b0, b1).principal(x)
        assert np.all(np.diff(s) < 0)


# --- sampling, sweeps, witnesses -----------------------------------------------

def test_sample_spec_validation():
    with pytest.raises(ValueError):
        SampleSpec(lambda_range=(2.0, 1.0))
    with pytest.raises(ValueError):
        SampleSpec(count=0)


def test_sampling_is_seeded():
    a = list(sample_states(SampleSpec(count=5, seed=11)))
    b = list(sample_states(SampleSpec(count=5, seed=11)))
    c = list(sample_states(SampleSpec(count=5, seed=12)))
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not np.array_equal(a[0], c[0])
    structured = list(sample_states(SampleSpec(count=40, structured=True, exclude_spherical=True)))
    assert len(structured) == 40
    assert not any(np.allclose(B, B[0, 0] * np.eye(3)) for B in structured)


def test_run_check_fail_has_replaying_witnesses():
    report = run_check(DirectIdMinusB(), "be", SampleSpec(count=50, seed=1))
    assert report.verdict == "fails" and report.witnesses
    for w in report.witnesses:
        restored = Witness.from_dict(json.loads(json.dumps(w.to_dict())))
        assert replay_witness(DirectIdMinusB(), "BE", restored).fails


def test_run_check_holds_and_reports_strictness():
    report = run_check(QuadraticHencky(), "wetss", SampleSpec(count=300, seed=2, structured=True))
    assert report.holds and not report.witnesses
    assert report.samples_skipped > 0  # the volumetric family
    assert report.extra["derivative_mismatches"] == 0
    assert report.extra["uniformly_strict_on_sample"]


def test_minimized_witness_still_fails():
    B = np.diag([25.0, 1.0, 0.04])
    small = minimize_witness(DirectIdMinusB(), "BE", B)
    assert check_be(DirectIdMinusB(), small).fails
    assert np.linalg.norm(np.log(np.diag(small))) <= np.linalg.norm(np.log(np.diag(B))) + 1e-12


def test_invertibility_reports():
    dev = invertibility_report(DirectDev3())
    assert dev.holds and len(dev.witnesses) == 2
    np.testing.assert_allclose(dev.witnesses[0].sigma, dev.witnesses[1].sigma, atol=1e-12)
    assert not np.allclose(dev.witnesses[0].B, dev.witnesses[1].B)
    inv = invertibility_report(DirectIdMinusB())
    assert inv.holds and inv.witnesses[0].margins["roundtrip_error"] == 0.0


# --- implication audit ------------------------------------------------------------

def test_audit_quadratic_hencky():
    audit = implication_audit(QuadraticHencky(), SampleSpec(count=1000, seed=5, structured=True))
    assert audit.total_violations == 0
    assert audit.counts["ETSS"]["fails"] > 0  # expansion states
    assert audit.counts["WETSS"]["fails"] == 0


def test_audit_non_implications():
    idb = implication_audit(DirectIdMinusB(), SampleSpec(count=50, seed=5))
    assert "invertible-not-BE" in idb.non_implications
    dev = implication_audit(DirectDev3(), SampleSpec(count=50, seed=5))
    assert "BEplus-not-invertible" in dev.non_implications
    assert idb.total_violations == dev.total_violations == 0
    table = summary_table([idb, dev])
    assert "BEplus" in table and "id-minus-b" in table and "dev3" in table


def test_audit_flags_non_bicoaxial_response():
    collapse = SpectralResponse(lambda x: (x - 1.0) ** 2)
    audit = implication_audit(collapse, SampleSpec(count=300, seed=9))
    assert audit.total_violations == 0
    assert audit.counts["BEplus"]["fails"] > 0


# --- SSLI ------------------------------------------------------------------------

def test_ssli_examples():
    r = ssli_check([1, 1, 1], [2, 1, 0.5])
    assert r.hypotheses_hold and r.conclusion_holds and r.strict
    r = ssli_check([2, 3, 0.5], [2, 3, 0.5])
    assert r.hypotheses_hold and r.conclusion_holds and not r.strict
    assert not ssli_check([2, 1, 0.5], [1, 1, 1]).hypotheses_hold
    with pytest.raises(DomainError):
        ssli_check([1, 0, 1], [1, 1, 1])


@pytest.mark.parametrize("generator", ["shrink", "reject"])
def test_ssli_generators_satisfy_hypotheses(generator):
    a, b = ssli_pairs(2000, seed=4, generator=generator)
    for x, y in zip(a[:200], b[:200]):
        r = ssli_check(x, y)
        assert r.hypotheses_hold and r.conclusion_holds
        # independent evaluation of the conclusion
        assert np.sum(np.log(x) ** 2) <= np.sum(np.log(y) ** 2) * (1 + 1e-12) + 1e-12
    report = ssli_fuzz(2000, seed=4, generator=generator)
    assert report["conclusion_violations"] == 0 and report["strict_missing"] == 0
    with pytest.raises(ValueError):
        ssli_pairs(10, generator="other")


# --- volumetric probe --------------------------------------------------------------

def test_volumetric_probe_neo_hooke_exceeds_bound():
    probe = volumetric_etss_probe(NeoHookeCompressible(1.0))
    # bound mu/2, left side (3/4) log lambda: exceeded beyond exp(2/3)
    assert probe.bound == pytest.approx(0.5)
    assert probe.first_exceeding is not None and probe.first_exceeding > math.exp(2 / 3)
    assert probe.monotone_pressure


def test_volumetric_probe_closed_form():
    grid = np.linspace(1.05, 3.0, 40)
    probe = volumetric_etss_probe(NeoHookeCompressible(1.0), grid)
    np.testing.assert_allclose(probe.lhs, 0.75 * np.log(grid), rtol=1e-10)


def test_volumetric_probe_zero_volumetric_part():
    probe = volumetric_etss_probe(IsoVolSplit(f="zero"))
    assert probe.first_exceeding is None
    assert all(v == 0.0 for v in probe.lhs)


def test_volumetric_probe_hencky_beta0_witness():
    probe = volumetric_etss_probe(QuadraticHencky(1.0, 0.0))
    w = probe.beta0_witness
    assert w is not None and 1.0 < w["lambda"] <= 3.0
    assert w["beta"]["beta_0"] > 0
    assert replay_beta0_witness(QuadraticHencky(1.0, 0.0), json.loads(json.dumps(w)))
    assert check_etss(QuadraticHencky(1.0, 0.0), w["lambda"] * np.eye(3)).fails


def test_volumetric_probe_rejects_direct_models():
    with pytest.raises(UnsupportedModelError):
        volumetric_etss_probe(DirectDev3())
    with pytest.raises(ValueError):
        volumetric_etss_probe(NeoHookeCompressible(), [0.5, 2.0])


# --- uniaxial inversion ---------------------------------------------------------------

@pytest.mark.parametrize("s", [0.1, 0.5, 2.0])
def test_uniaxial_marzano(s):
    sol = uniaxial_inversion(MarzanoCounterexample(), s)
    np.testing.assert_allclose(sol.state.lambdas, [1 + s, 1, 1], atol=1e-9)
    assert sol.residual <= 1e-10 and sol.simple_extension


def test_uniaxial_hencky():
    sol = uniaxial_inversion(QuadraticHencky(1.0, 0.5), 0.0)
    np.testing.assert_allclose(sol.state.lambdas, [1, 1, 1])
    sol = uniaxial_inversion(QuadraticHencky(1.0, 0.5), 0.3)
    lam = sol.state.lambdas
    assert sol.residual <= 1e-10 and sol.simple_extension
    assert lam[0] > 1 > lam[1]
    # the transverse stress of the solved state vanishes in the closed form too
    t = np.log(lam)
    assert abs(2 * t[1] + 0.5 * t.sum()) <= 1e-9


def test_uniaxial_non_convergence():
    with pytest.raises(ConvergenceError):
        uniaxial_inversion(QuadraticHencky(), 0.3, max_iter=1)
    with pytest.raises(ValueError):
        uniaxial_inversion(QuadraticHencky(), -1.0)


# --- fixed examples ---------------------------------------------------------------------

def test_regression_all_examples():
    report = examples_regression()
    assert report.passed, report.table()
    assert {r.name for r in report.results} >= {"coaxial-asymmetry", "commuting-not-coaxial",
                                                 "non-isotropic-map", "dev3", "id-minus-b", "simple-extension"}


def test_regression_simple_extension_details():
    report = examples_regression("simple-extension")
    d = report.results[0].details
    assert d["h_formula"] == 4.0 and d["h_reference"] == 2.0 and d["h_discrepancy"]
    assert d["sigma_formula"] == [-10.0, -7.0, -4.0]
    assert d["sigma_reference_h"] == [-4.0, -3.0, -2.0]
    assert d["BE_violated"] and d["BE_violated_reference_h"]
    json.dumps(report.to_dict())


def test_regression_unknown_name():
    with pytest.raises(ValueError):
        examples_regression(["nope"])


def test_exponential_hencky_default_wetss():
    report = run_check(ExponentialHencky(), "wetss", SampleSpec(count=300, seed=8))
    assert report.holds


def test_log_norm_wetss_matches_derivatives(rng):
    for _ in range(100):
        B = rotated(rng, np.exp(rng.uniform(-2, 2, 3)))
        v = check_wetss(LogNormSquared(), B)
        assert v.holds == v.margins["derivatives_hold"]
