"""Command-line front end.

    dirichlet-splines moment --knots knots.csv --beta 2,1 --params ones
    dirichlet-splines lauricella --j 0,0 --beta 0.5,0.5 --gamma 2 --x 0.1,0.2
    dirichlet-splines verify --suite all --seed 7

Exit status: 0 on success, 1 when an inner computation rejects its inputs
(domain, parameter or convergence failure, or a failed verify suite), 2 on
malformed input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import hypergeo as hg
from . import verify
from .errors import InvalidArgumentError, SplineError
from .moments import STRATEGIES, MomentTable, dirichlet_moment, simplex_moment_alg53
from .simplex_core import DirichletParams, KnotSet, negative_moment

MOMENT_STRATEGIES = ("auto", "knot-insertion") + STRATEGIES
CHECK_RTOL = 1e-9


class UsageError(Exception):
    """Malformed command-line input (exit status 2)."""


# -- input parsing -------------------------------------------------------------

def _floats(text: str, what: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated reals, got {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise UsageError(f"{what}: entries must be finite")
    return vals


def _ints(text: str, what: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated integers, got {text!r}") from None
    if any(v < 0 for v in vals):
        raise UsageError(f"{what}: entries must be nonnegative")
    return vals


def _scalar(text: str, what: str) -> float:
    vals = _floats(text, what)
    if len(vals) != 1:
        raise UsageError(f"{what}: expected one number")
    return vals[0]


def read_knots(path: str) -> KnotSet:
    """One knot per row, comma-separated; a non-numeric first row is a header."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read knots file: {exc}") from None
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if rows:
        try:
            [float(c) for c in rows[0]]
        except ValueError:
            rows = rows[1:]
    if not rows:
        raise UsageError("knots file has no rows")
    try:
        pts = np.array([[float(c) for c in r] for r in rows])
    except ValueError:
        raise UsageError("knots file: every entry must be a real number") from None
    if pts.ndim != 2:
        raise UsageError("knots file: rows must all have the same number of columns")
    if not np.all(np.isfinite(pts)):
        raise UsageError("knots file: entries must be finite")
    return KnotSet(pts)


def _params(text: str, count: int) -> DirichletParams:
    if text == "ones":
        return DirichletParams.ones(count)
    b = _floats(text, "--params")
    if len(b) != count:
        raise UsageError(f"--params has {len(b)} entries for {count} knots")
    return DirichletParams(b)


def _knots_or_z(args):
    if (args.knots is None) == (args.z is None):
        raise UsageError("give exactly one of --z or --knots (with --lam)")
    if args.knots is not None:
        if args.lam is None:
            raise UsageError("--knots needs --lam")
        return None, read_knots(args.knots), np.array(_floats(args.lam, "--lam"))
    if args.lam is not None:
        raise UsageError("--lam only applies together with --knots")
    return np.array(_floats(args.z, "--z")), None, None


def _control(args) -> hg.SeriesControl:
    return hg.SeriesControl(max_order=args.max_order, abs_tol=args.abs_tol, rel_tol=args.rel_tol)


# -- commands ------------------------------------------------------------------

def _moment_value(strategy, params, knots, beta):
    if strategy == "knot-insertion":
        if any(v != 1.0 for v in params.b):
            raise SplineError("knot-insertion is the simplex-spline path and needs every b_i = 1")
        table = MomentTable(knots)
        value = simplex_moment_alg53(knots, beta, table)
        return value, len(table)
    return dirichlet_moment(params, knots, beta, strategy), None


def _auto_strategy(params: DirichletParams) -> str:
    if all(v == 1.0 for v in params.b):
        return "knot-insertion"
    if params.is_integer() and params.c <= 24:
        return "coalescent-knots"
    return "recurrence-54"


def cmd_moment(args) -> dict:
    knots = read_knots(args.knots)
    params = _params(args.params, len(knots))
    if (args.beta is None) == (args.power is None):
        raise UsageError("give exactly one of --beta or --power")
    if args.power is not None:
        a = _floats(args.power, "--power")
        est = negative_moment(params, knots, a, args.method, seed=args.seed, target_se=args.target_se)
        return {"quantity": "negative-moment", "power": list(a), "value": est.value,
                "error": est.error, "strategy": est.method, "evaluations": est.evaluations,
                "seed": args.seed}
    beta = _ints(args.beta, "--beta")
    if len(beta) != knots.s:
        raise UsageError(f"--beta has {len(beta)} entries for knots in dimension {knots.s}")
    strategy = _auto_strategy(params) if args.strategy == "auto" else args.strategy
    value, size = _moment_value(strategy, params, knots, beta)
    out = {"quantity": "moment", "beta": list(beta), "value": value,
           "strategy": strategy, "table_size": size}
    if args.check:
        ref = dirichlet_moment(params, knots, beta, "expansion")
        resid = abs(value - ref) / max(abs(ref), 1e-300)
        out.update(check_value=ref, check_residual=resid, check_passed=resid <= CHECK_RTOL)
    return out


def cmd_lauricella(args) -> dict:
    spec = hg.LauricellaSpec(_floats(args.beta, "--beta"), _scalar(args.gamma, "--gamma"),
                             _floats(args.x, "--x"), j=_ints(args.j, "--j"))
    method = args.method
    if method == "auto":
        method = "recurrence-6.14"
    value = hg.lauricella_poly(spec, method, _control(args))
    out = {"quantity": "lauricella", "j": list(spec.j), "value": value, "strategy": method}
    if args.check:
        ref = hg.lauricella_poly(spec, "series", _control(args))
        resid = abs(value - ref) / max(abs(ref), 1e-300)
        out.update(check_value=ref, check_residual=resid, check_passed=resid <= CHECK_RTOL)
    return out


def cmd_r(args) -> dict:
    params = DirichletParams(_floats(args.params, "--params"))
    z, knots, lam = _knots_or_z(args)
    method = "quadrature" if args.method == "auto" else args.method
    value, info = hg.r_function(_scalar(args.a, "--a"), params, z, method, _control(args),
                                lam=lam, knots=knots, full_output=True)
    return {"quantity": "R", "value": value, "strategy": method,
            "order": info.get("order"), "error": info.get("error")}


def cmd_s(args) -> dict:
    params = DirichletParams(_floats(args.params, "--params"))
    z, knots, lam = _knots_or_z(args)
    method = args.method
    if method == "auto":
        method = "divided-difference-5.10" if params.is_integer() else "series-5.9"
    value, info = hg.s_function(params, z, method, _control(args), lam=lam, knots=knots,
                                full_output=True)
    return {"quantity": "S", "value": value, "strategy": method, "order": info.get("order")}


def cmd_f4(args) -> dict:
    a, b, g, d = (_scalar(getattr(args, k), "--" + k) for k in ("alpha", "beta", "gamma", "delta"))
    x1, x2 = _scalar(args.x1, "--x1"), _scalar(args.x2, "--x2")
    if args.method == "moments":
        est = hg.f4_via_moments(a, b, g, d, x1, x2)
        return {"quantity": "F4", "value": est.value, "strategy": est.method, "error": est.error,
                "arguments": [x1 * (1 - x2), x2 * (1 - x1)]}
    value, info = hg.appell_f4(a, b, g, d, x1, x2, _control(args), full_output=True)
    return {"quantity": "F4", "value": value, "strategy": "series", "order": info.get("order"),
            "arguments": [x1, x2]}


def cmd_fb(args) -> dict:
    beta = _floats(args.beta, "--beta")
    alpha = _floats(args.alpha, "--alpha")
    if len(alpha) == 1:
        alpha = alpha * len(beta)
    spec = hg.LauricellaSpec(beta, _scalar(args.gamma, "--gamma"), _floats(args.x, "--x"), alpha=alpha)
    value, info = hg.lauricella_fb(spec, _control(args), full_output=True)
    return {"quantity": "F_B", "value": value, "strategy": "series", "order": info.get("order")}


def cmd_verify(args) -> dict:
    names = args.suite or ["all"]
    try:
        results = verify.run_suites(names, seed=args.seed)
    except KeyError as exc:
        raise UsageError(f"unknown suite {exc.args[0]!r}; choose from {sorted(verify.SUITES)} or all") from None
    rows = [r.as_dict() for r in results]
    return {"quantity": "verify", "seed": args.seed, "suites": rows,
            "passed": all(r.passed for r in results)}


# -- output --------------------------------------------------------------------

def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def render(report: dict, fmt: str) -> str:
    report = _clean(report)
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    if report["quantity"] == "verify":
        if fmt == "csv":
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["name", "cases", "max_residual", "tolerance", "passed"])
            for r in report["suites"]:
                w.writerow([r["name"], r["cases"], repr(r["max_residual"]), repr(r["tolerance"]), r["passed"]])
        else:
            for r in report["suites"]:
                flag = "PASS" if r["passed"] else "FAIL"
                buf.write(f"{flag} {r['name']}: cases={r['cases']} max_residual={r['max_residual']:.3e} "
                          f"tolerance={r['tolerance']:.0e}\n")
        return buf.getvalue()
    if fmt == "csv":
        keys = sorted(k for k, v in report.items() if not isinstance(v, (list, dict)))
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys)
        w.writerow([repr(report[k]) if isinstance(report[k], float) else report[k] for k in keys])
        return buf.getvalue()
    return repr(report["value"]) + "\n"


# -- argument parser -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "plain"), default="json")
    common.add_argument("--seed", type=int, default=0, help="seed for Monte-Carlo and verify sweeps")
    series = argparse.ArgumentParser(add_help=False)
    series.add_argument("--max-order", type=int, default=hg.DEFAULT_CONTROL.max_order)
    series.add_argument("--abs-tol", type=float, default=hg.DEFAULT_CONTROL.abs_tol)
    series.add_argument("--rel-tol", type=float, default=hg.DEFAULT_CONTROL.rel_tol)

    parser = argparse.ArgumentParser(prog="dirichlet-splines",
                                     description="Moments of Dirichlet splines and related hypergeometric functions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moment", parents=[common], help="moment m_beta(b; X) or negative moment m_-a(b; X)")
    p.add_argument("--knots", required=True, help="CSV file, one knot per row")
    p.add_argument("--beta", help="multi-index, e.g. 2,1")
    p.add_argument("--power", help="exponents a for the negative moment")
    p.add_argument("--params", default="ones", help="Dirichlet parameters b, or 'ones'")
    p.add_argument("--strategy", choices=MOMENT_STRATEGIES, default="auto")
    p.add_argument("--method", choices=("quadrature", "monte-carlo"), default="quadrature")
    p.add_argument("--target-se", type=float, default=1e-3)
    p.add_argument("--check", action="store_true", help="cross-check against the expansion")
    p.set_defaults(func=cmd_moment)

    p = sub.add_parser("lauricella", parents=[common, series], help="Lauricella polynomial L_j(x)")
    p.add_argument("--j", required=True)
    p.add_argument("--beta", required=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--method", choices=("auto",) + hg.LAURICELLA_METHODS, default="auto")
    p.add_argument("--check", action="store_true", help="cross-check against the series")
    p.set_defaults(func=cmd_lauricella)

    for name, func, methods, helptext in (
            ("r-hyper", cmd_r, ("auto", "quadrature", "series-5.11"), "Carlson R_{-a}(b; Z)"),
            ("s-hyper", cmd_s, ("auto", "series-5.9", "divided-difference-5.10"), "Carlson S(b; Z)")):
        p = sub.add_parser(name, parents=[common, series], help=helptext)
        if name == "r-hyper":
            p.add_argument("--a", required=True)
        p.add_argument("--params", required=True)
        p.add_argument("--z")
        p.add_argument("--knots")
        p.add_argument("--lam")
        p.add_argument("--method", choices=methods, default="auto")
        p.set_defaults(func=func)

    p = sub.add_parser("f4", parents=[common, series], help="Appell F4")
    for k in ("alpha", "beta", "gamma", "delta", "x1", "x2"):
        p.add_argument("--" + k, required=True)
    p.add_argument("--method", choices=("series", "moments"), default="series",
                   help="'moments' reads (x1, x2) as coordinates in the product region")
    p.set_defaults(func=cmd_f4)

    p = sub.add_parser("fb", parents=[common, series], help="Lauricella F_B")
    p.add_argument("--alpha", required=True, help="one value or one per variable")
    p.add_argument("--beta", required=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--x", required=True)
    p.set_defaults(func=cmd_fb)

    p = sub.add_parser("verify", parents=[common], help="run identity-verification sweeps")
    p.add_argument("--suite", action="append", help="suite name or 'all' (repeatable)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.func(args)
    except (UsageError, InvalidArgumentError) as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except SplineError as exc:
        print(f"{parser.prog}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(render(report, args.format))
    ok = report.get("passed", True) and report.get("check_passed", True)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
