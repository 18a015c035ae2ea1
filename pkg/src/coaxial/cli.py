"""
Command-line front end.

Subcommands: ``check``, ``stress``, ``invert``, ``counterexamples``, ``ssli``
and ``audit``. Settings resolve as flags, then the ``--config`` JSON file,
then defaults; the seed falls back to ``COAXIAL_SEED`` before the default.

Exit status is 0 on success or when every requested check holds, 1 when a
check fails or an inversion does not converge, and 2 on configuration or
input errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from typing import Sequence

import numpy as np

from . import checks
from .constitutive import MODELS, beta_coefficients, default_catalog, model_from_dict
from .exceptions import CoaxialError, ConvergenceError, NotCoaxialError
from .representation import IllConditionedWarning, psi_direct
from .symmat import as_symmetric, from_voigt, invariants, to_voigt

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
DEFAULT_SEED = 0
JSON_DIGITS = 17
TEXT_DIGITS = 6


class ConfigError(Exception):
    pass


# --------------------------------------------------------------------------
# output


def _json_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(x, f".{JSON_DIGITS}g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _json_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.floating, np.integer)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [inner + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _t(x) -> str:
    return format(float(x), f".{TEXT_DIGITS}g")


def _tv(values) -> str:
    return "[" + ", ".join(_t(v) for v in values) + "]"


def _emit(args, payload: dict, text: str) -> None:
    out = dumps(payload) + "\n" if args.json else text.rstrip("\n") + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


# --------------------------------------------------------------------------
# configuration


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config file must hold a JSON object")
    return cfg


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _floats(text: str, n: int, name: str) -> list[float]:
    try:
        vals = [float(v) for v in text.replace(" ", "").split(",") if v != ""]
    except ValueError:
        raise ConfigError(f"{name} must be {n} comma-separated numbers") from None
    if len(vals) != n:
        raise ConfigError(f"{name} needs {n} values, got {len(vals)}")
    return vals


_NAMED_PARAMS = ("mu", "lambda", "kappa", "k", "k_hat", "c1", "c2")


def _model_spec(args, cfg: dict) -> dict:
    spec = cfg.get("model", {})
    if isinstance(spec, str):
        spec = {"model": spec, "params": cfg.get("params", {})}
    spec = {"model": spec.get("model"), "params": dict(spec.get("params") or {})}
    if args.model:
        if spec["model"] not in (None, args.model):
            spec["params"] = {}
        spec["model"] = args.model
    for name in _NAMED_PARAMS:
        value = getattr(args, name, None)
        if value is not None:
            spec["params"][name] = value
    if getattr(args, "volumetric", None):
        vol = {"kind": args.volumetric}
        if args.vol_kappa is not None:
            vol["kappa"] = args.vol_kappa
        spec["params"]["f"] = vol
    for item in getattr(args, "param", None) or []:
        if "=" not in item:
            raise ConfigError(f"--param expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        spec["params"][key.strip()] = _parse_value(value.strip())
    if spec["model"] is None:
        spec["model"] = "quadratic-hencky"
    return spec


def _build_model(spec: dict):
    try:
        return model_from_dict(spec)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def _seed(args, cfg: dict) -> int:
    if args.seed is not None:
        return args.seed
    sample = cfg.get("sample") or {}
    if "seed" in sample:
        return int(sample["seed"])
    env = os.environ.get("COAXIAL_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"COAXIAL_SEED must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def _sample_spec(args, cfg: dict) -> checks.SampleSpec:
    sample = dict(cfg.get("sample") or {})
    sample["seed"] = _seed(args, cfg)
    if args.n is not None:
        sample["count"] = args.n
    if args.lambda_range is not None:
        sample["lambda_range"] = tuple(_floats(args.lambda_range, 2, "--lambda-range"))
    if args.linear:
        sample["log_uniform"] = False
    if args.exclude_spherical:
        sample["exclude_spherical"] = True
    if args.structured:
        sample["structured"] = True
    if "lambda_range" in sample:
        sample["lambda_range"] = tuple(sample["lambda_range"])
    try:
        return checks.SampleSpec(**sample)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad sample settings: {exc}") from None


def _state(args, cfg: dict) -> np.ndarray:
    if args.b is not None and args.lambdas is not None:
        raise ConfigError("give either --b or --lambdas, not both")
    b, lam = args.b, args.lambdas
    if b is None and lam is None:
        b, lam = cfg.get("b"), cfg.get("lambdas")
    if b is not None:
        vals = _floats(b, 6, "--b") if isinstance(b, str) else [float(v) for v in b]
        if len(vals) != 6:
            raise ConfigError("B needs 6 values xx,yy,zz,xy,xz,yz")
        return from_voigt(vals)
    if lam is not None:
        vals = _floats(lam, 3, "--lambdas") if isinstance(lam, str) else [float(v) for v in lam]
        if len(vals) != 3:
            raise ConfigError("--lambdas needs 3 values")
        if min(vals) <= 0:
            raise ConfigError("principal stretches must be positive")
        return np.diag(np.square(vals))
    raise ConfigError("a state is required: --b xx,yy,zz,xy,xz,yz or --lambdas l1,l2,l3")


# --------------------------------------------------------------------------
# commands


def cmd_check(args, cfg) -> int:
    model = _build_model(_model_spec(args, cfg))
    tags = args.checks if args.checks else cfg.get("checks")
    if not tags:
        raise ConfigError("at least one check is required (--checks)")
    try:
        tags = [checks.normalize_tag(t) for t in tags]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    spec = _sample_spec(args, cfg)
    reports = [checks.run_check(model, tag, spec) for tag in tags]
    ok = all(r.holds for r in reports)
    payload = {"command": "check", "model": model.to_dict(), "checks": tags, "sample": spec.to_dict(),
               "all_hold": ok, "reports": [r.to_dict() for r in reports]}
    lines = [f"model {model.tag} {model.params()}", f"samples {spec.count} seed {spec.seed}"]
    for r in reports:
        lines.append(f"{r.inequality:<15} {r.verdict:<16} tested {r.samples_tested} skipped "
                     f"{r.samples_skipped} failures {r.failures}")
        for w in r.witnesses[:1]:
            lines.append(f"  witness B = {_tv(to_voigt(w.B))}")
            lines.append(f"          sigma = {_tv(to_voigt(w.sigma))}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_stress(args, cfg) -> int:
    model = _build_model(_model_spec(args, cfg))
    try:
        B = as_symmetric(_state(args, cfg), dims=(3,))
        sigma = model.stress(B)
    except CoaxialError as exc:
        raise ConfigError(str(exc)) from None
    inv = invariants(B)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllConditionedWarning)
        beta = beta_coefficients(model, B)
        try:
            psi = psi_direct(B, sigma).to_dict()
        except NotCoaxialError as exc:
            psi = {"error": str(exc)}
    payload = {"command": "stress", "model": model.to_dict(), "B": to_voigt(B), "sigma": to_voigt(sigma),
               "invariants": {"i1": inv.i1, "i2": inv.i2, "i3": inv.i3},
               "beta": beta.to_dict(), "psi": psi}
    lines = [f"model      {model.tag}",
             f"B          {_tv(to_voigt(B))}",
             f"sigma      {_tv(to_voigt(sigma))}",
             f"invariants {_tv(inv)}",
             f"beta       m1 {_t(beta.beta_m1)}  0 {_t(beta.beta_0)}  1 {_t(beta.beta_1)}"]
    if "error" in psi:
        lines.append(f"psi        not available: {psi['error']}")
    else:
        lines.append(f"psi        0 {_t(psi['psi_0'])}  1 {_t(psi['psi_1'])}  2 {_t(psi['psi_2'])}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_invert(args, cfg) -> int:
    model = _build_model(_model_spec(args, cfg))
    s = args.s if args.s is not None else cfg.get("s")
    if s is None:
        raise ConfigError("uniaxial stress --s is required")
    if not float(s) >= 0:
        raise ConfigError("uniaxial stress must be non-negative")
    try:
        sol = checks.uniaxial_inversion(model, float(s))
    except ConvergenceError as exc:
        payload = {"command": "invert", "model": model.to_dict(), "s": float(s), "converged": False,
                   "error": str(exc)}
        _emit(args, payload, f"not converged: {exc}")
        return EXIT_FAIL
    payload = {"command": "invert", "model": model.to_dict(), "s": float(s), "converged": True,
               **sol.to_dict()}
    text = (f"lambdas {_tv(sol.state.lambdas)}\nresidual {_t(sol.residual)} after {sol.iterations} "
            f"iterations\nsimple extension: {'yes' if sol.simple_extension else 'no'}")
    _emit(args, payload, text)
    return EXIT_OK


def cmd_counterexamples(args, cfg) -> int:
    only = args.only or cfg.get("only")
    try:
        report = checks.examples_regression(only)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    _emit(args, {"command": "counterexamples", **report.to_dict()}, report.table())
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_ssli(args, cfg) -> int:
    if args.fuzz:
        result = checks.ssli_fuzz(args.fuzz, _seed(args, cfg), args.generator)
        ok = result["conclusion_violations"] == 0
        text = (f"pairs {result['pairs']} hypotheses {result['hypotheses_hold']} violations "
                f"{result['conclusion_violations']} strict missing {result['strict_missing']}")
        _emit(args, {"command": "ssli", **result}, text)
        return EXIT_OK if ok else EXIT_FAIL
    if args.a is None or args.b is None:
        raise ConfigError("give --a and --b triples, or --fuzz N")
    a, b = _floats(args.a, 3, "--a"), _floats(args.b, 3, "--b")
    try:
        r = checks.ssli_check(a, b)
    except CoaxialError as exc:
        raise ConfigError(str(exc)) from None
    payload = {"command": "ssli", "a": a, "b": b, "hypotheses_hold": r.hypotheses_hold,
               "conclusion_holds": r.conclusion_holds, "strict": r.strict}
    text = (f"hypotheses {'hold' if r.hypotheses_hold else 'fail'}; conclusion "
            f"{'holds' if r.conclusion_holds else 'fails'}{' strictly' if r.strict else ''}")
    _emit(args, payload, text)
    return EXIT_FAIL if r.hypotheses_hold and not r.conclusion_holds else EXIT_OK


def cmd_audit(args, cfg) -> int:
    spec = _sample_spec(args, cfg)
    if args.model or cfg.get("model"):
        models = [_build_model(_model_spec(args, cfg))]
    else:
        models = default_catalog()
    audits = [checks.implication_audit(m, spec) for m in models]
    ok = all(a.total_violations == 0 for a in audits)
    payload = {"command": "audit", "sample": spec.to_dict(), "audits": [a.to_dict() for a in audits]}
    _emit(args, payload, checks.summary_table(audits))
    return EXIT_OK if ok else EXIT_FAIL


# --------------------------------------------------------------------------
# parser


def _common(parent: bool) -> argparse.ArgumentParser:
    # subparser copies suppress defaults so a flag given before the
    # subcommand is not reset by the subcommand's own default
    d = None if parent else argparse.SUPPRESS
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--config", default=d, help="JSON config file")
    g.add_argument("--json", action="store_true", default=False if parent else argparse.SUPPRESS,
                   help="machine-readable output")
    g.add_argument("--seed", type=int, default=d, help="random seed (fallback: COAXIAL_SEED)")
    g.add_argument("--out", default=d, help="write output to this file")
    return p


def _model_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--model", choices=sorted(MODELS), help="model tag")
    for name in _NAMED_PARAMS:
        g.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float)
    g.add_argument("--volumetric", help="volumetric part kind (zero, log-quadratic, quadratic-j)")
    g.add_argument("--vol-kappa", type=float, help="bulk modulus of the volumetric part")
    g.add_argument("--param", action="append", metavar="KEY=VALUE", help="any other model parameter")


def _sample_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("sampling")
    g.add_argument("--n", type=int, help="number of sampled states")
    g.add_argument("--lambda-range", help="low,high principal stretches")
    g.add_argument("--linear", action="store_true", help="uniform instead of log-uniform stretches")
    g.add_argument("--exclude-spherical", action="store_true")
    g.add_argument("--structured", action="store_true", help="prepend uniaxial/biaxial/volumetric/shear families")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coaxial", parents=[_common(True)],
                                     description="Constitutive-inequality checks for isotropic stress responses.")
    sub = parser.add_subparsers(dest="command", required=True)
    child = [_common(False)]

    p = sub.add_parser("check", parents=child, help="sample a model against inequality checks")
    _model_args(p)
    _sample_args(p)
    p.add_argument("--checks", nargs="+", help="wetss be be+ semi etss bicoax invert")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("stress", parents=child, help="stress, coefficients and invariants at one state")
    _model_args(p)
    p.add_argument("--b", help="B as xx,yy,zz,xy,xz,yz")
    p.add_argument("--lambdas", help="principal stretches l1,l2,l3")
    p.set_defaults(func=cmd_stress)

    p = sub.add_parser("invert", parents=child, help="solve sigma(V) = diag(s, 0, 0)")
    _model_args(p)
    p.add_argument("--s", type=float, help="uniaxial stress magnitude")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("counterexamples", parents=child, help="run the fixed worked examples")
    p.add_argument("--only", nargs="+", choices=list(checks.EXAMPLES))
    p.set_defaults(func=cmd_counterexamples)

    p = sub.add_parser("ssli", parents=child, help="sum-of-squared-logarithms inequality")
    p.add_argument("--a", help="a1,a2,a3")
    p.add_argument("--b", help="b1,b2,b3")
    p.add_argument("--fuzz", type=int, help="number of generated pairs")
    p.add_argument("--generator", choices=("shrink", "reject"), default="shrink")
    p.set_defaults(func=cmd_ssli)

    p = sub.add_parser("audit", parents=child, help="implication-chain audit with a summary table")
    _model_args(p)
    _sample_args(p)
    p.set_defaults(func=cmd_audit)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors and 0 on --help
        return int(exc.code or 0)
    try:
        cfg = _load_config(args.config)
        if args.out is None and cfg.get("out"):
            args.out = cfg["out"]
        if not args.json and cfg.get("output") == "json":
            args.json = True
        return args.func(args, cfg)
    except ConfigError as exc:
        print(f"coaxial: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
