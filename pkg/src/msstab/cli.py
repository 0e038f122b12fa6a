"""Command-line front end: stability checks, region rasters, ensembles.

Every command is a pure function of its flags and seed; re-running writes
byte-identical CSV/JSON output.  Exit codes: 0 success, 2 validation error,
3 numeric degeneracy, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from itertools import product

import numpy as np

from .errors import DegenerateDenominator, ValidationError, ZeroDrift
from .model import InitialState, TestEquation
from .montecarlo import NoisePlan, estimate_convergence_order, run_ensemble
from .schemes import MethodSpec, SchemeKind
from .stability import (
    RegionSpec,
    rasterize_region,
    stability_report,
    theta_opt,
    theta_tilde,
)

_COMPLEX_RE = re.compile(
    r"^(?P<re>[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?)"
    r"(?P<im>[+-](\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?i)?$"
)


def parse_complex(text: str) -> complex:
    """Parse 'RE', 'RE+IMi' or 'RE-IMi' literals (no whitespace allowed)."""
    match = _COMPLEX_RE.match(text)
    if match is None:
        raise ValidationError(f"invalid complex literal: {text!r}")
    re_part = float(match.group("re"))
    im_text = match.group("im")
    im_part = float(im_text[:-1]) if im_text else 0.0
    return complex(re_part, im_part)


def _fmt(value) -> str:
    """Round-trippable decimal rendering for CSV cells."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def _jsonable(value):
    if isinstance(value, (bool, str)):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    v = float(value)
    return "inf" if math.isinf(v) and v > 0 else ("-inf" if math.isinf(v) else v)


def _write_table(path, fmt, header, rows):
    """Write rows either as CSV or as a JSON column dict."""
    if fmt == "csv":
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_fmt(v) if not isinstance(v, str) else v for v in row))
        text = "\n".join(lines) + "\n"
    else:
        columns = {
            name: [_jsonable(row[i]) if not isinstance(row[i], str) else row[i] for row in rows]
            for i, name in enumerate(header)
        }
        text = json.dumps(columns, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _parse_range(text: str, name: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise ValidationError(f"{name} must be LO:HI, got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ValidationError(f"invalid {name}: {text!r}") from exc
    if not hi > lo:
        raise ValidationError(f"{name} must satisfy LO < HI, got {text!r}")
    return lo, hi


def _parse_res(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    try:
        if len(parts) == 1:
            nx = ny = int(parts[0])
        elif len(parts) == 2:
            nx, ny = int(parts[0]), int(parts[1])
        else:
            raise ValueError
    except ValueError as exc:
        raise ValidationError(f"resolution must be N or NXxNY, got {text!r}") from exc
    return nx, ny


def _equation(args) -> TestEquation:
    if not args.mu:
        raise ValidationError("at least one --mu is required")
    return TestEquation(lam=parse_complex(args.lam), mus=tuple(parse_complex(m) for m in args.mu))


def _kind(name: str) -> SchemeKind:
    return SchemeKind(name)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="msstab",
        description="Mean-square stability analysis and Monte Carlo validation "
        "of theta-Maruyama / theta-Milstein / theta-sigma-Milstein schemes "
        "for the scalar linear test SDE.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_eq(p):
        p.add_argument("--lambda", dest="lam", required=True, metavar="C",
                       help="drift rate, complex literal like -2 or 0.5-1.5i")
        p.add_argument("--mu", action="append", default=[], metavar="C",
                       help="noise intensity, repeatable (one per noise term)")

    def add_out(p):
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--plot", default=None, metavar="PNG",
                       help="also render a figure of the output to this file")

    p = sub.add_parser("check", help="stability table for one or more methods")
    add_eq(p)
    p.add_argument("--method", action="append", default=[],
                   choices=[k.value for k in SchemeKind], help="repeatable")
    p.add_argument("--theta", action="append", default=[], type=float, help="repeatable")
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--h", type=float, required=True)
    add_out(p)

    p = sub.add_parser("region", help="rasterize scaled stability regions")
    p.add_argument("--method", action="append", default=[],
                   choices=[k.value for k in SchemeKind], help="repeatable")
    p.add_argument("--theta", action="append", default=[], type=float, help="repeatable")
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--m", action="append", default=[], type=int,
                   help="noise-term count, repeatable (default 1)")
    p.add_argument("--xrange", default="-6:1", metavar="LO:HI")
    p.add_argument("--yrange", default="0:8", metavar="LO:HI")
    p.add_argument("--res", default="800", metavar="N|NXxNY")
    add_out(p)

    p = sub.add_parser("simulate", help="seeded ensemble run with moment tables")
    add_eq(p)
    p.add_argument("--x0", default="0.1", metavar="C", help="initial value")
    p.add_argument("--method", required=True, choices=[k.value for k in SchemeKind])
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--traj", type=int, default=100000, metavar="M")
    p.add_argument("--seed", type=int, default=0)
    add_out(p)

    p = sub.add_parser("converge", help="strong-order estimate from a step-size ladder")
    add_eq(p)
    p.add_argument("--x0", default="0.1", metavar="C", help="initial value")
    p.add_argument("--method", required=True, choices=[k.value for k in SchemeKind])
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--h-list", required=True, metavar="H1,H2,...",
                   help="comma-separated step-sizes; the smallest is the fine grid")
    p.add_argument("--traj", type=int, default=10000, metavar="M")
    p.add_argument("--seed", type=int, default=0)
    add_out(p)

    return parser


def _methods_for_check(args) -> list[tuple[str, float]]:
    methods = args.method or ["maruyama"]
    thetas = args.theta or [0.0]
    return list(product(methods, thetas))


def cmd_check(args) -> int:
    eq = _equation(args)
    header = ["method", "theta", "sigma", "h", "amplification", "margin",
              "verdict", "h_max", "theta_star"]
    rows = []
    for name, theta in _methods_for_check(args):
        kind = _kind(name)
        sigma = args.sigma if kind is SchemeKind.SIGMA_MILSTEIN else 0.0
        method = MethodSpec(kind=kind, theta=theta, sigma=sigma, h=args.h)
        report = stability_report(method, eq)
        if kind is SchemeKind.MARUYAMA:
            star = 0.5
        elif kind is SchemeKind.MILSTEIN:
            star = theta_opt(eq) if eq.lam != 0 else math.nan
        else:
            star = theta_tilde(eq, sigma) if eq.lam != 0 else math.nan
        rows.append([name, theta, sigma, args.h, report.s, report.margin,
                     "stable" if report.stable else "unstable", report.h_max, star])
    _write_table(args.out, args.format, header, rows)
    return 0


def cmd_region(args) -> int:
    methods = args.method or ["maruyama"]
    thetas = args.theta or [0.0]
    ms = args.m or [1]
    specs = []
    for name, theta, m in product(methods, thetas, ms):
        kind = _kind(name)
        sigma = args.sigma if kind is SchemeKind.SIGMA_MILSTEIN else 0.0
        specs.append(RegionSpec(kind=kind, theta=theta, sigma=sigma, m=m))
    nx, ny = _parse_res(args.res)
    grid = rasterize_region(
        specs,
        _parse_range(args.xrange, "--xrange"),
        _parse_range(args.yrange, "--yrange"),
        nx,
        ny,
    )
    labels = list(grid.members)
    header = ["x", "y", "member_sde"] + [f"member_{label}" for label in labels]
    rows = []
    for j, y in enumerate(grid.y_centers):
        for i, x in enumerate(grid.x_centers):
            row = [x, y, bool(grid.sde[j, i])]
            row.extend(bool(grid.members[label][j, i]) for label in labels)
            rows.append(row)
    _write_table(args.out, args.format, header, rows)
    if args.plot:
        from . import figures

        figures.render_region(grid, args.plot)
    return 0


def cmd_simulate(args) -> int:
    eq = _equation(args)
    init = InitialState(parse_complex(args.x0))
    plan = NoisePlan(seed=args.seed, M=args.traj, n_fine=max(args.steps, 1),
                     m=eq.m, h_fine=args.h)
    method = MethodSpec(kind=_kind(args.method), theta=args.theta,
                        sigma=args.sigma if args.method == "sigma-milstein" else 0.0,
                        h=args.h)
    result = run_ensemble(method, eq, init, plan, n_steps=args.steps, k=1)
    header = ["t", "ms_error", "est_second_moment", "analytic_second_moment",
              "recurrence_second_moment", "std_error", "overflow"]
    rows = [
        [result.times[i], result.ms_error[i], result.est_second_moment[i],
         result.analytic_second_moment[i], result.recurrence_second_moment[i],
         result.std_error_of_estimates[i], bool(result.overflow[i])]
        for i in range(len(result.times))
    ]
    _write_table(args.out, args.format, header, rows)
    if args.plot:
        from . import figures

        figures.render_ensemble(result, args.plot)
    return 0


def cmd_converge(args) -> int:
    eq = _equation(args)
    init = InitialState(parse_complex(args.x0))
    try:
        hs = [float(tok) for tok in args.h_list.split(",") if tok.strip()]
    except ValueError as exc:
        raise ValidationError(f"invalid --h-list: {args.h_list!r}") from exc
    if len(hs) < 2:
        raise ValidationError("--h-list needs at least two step-sizes")
    h_fine = min(hs)
    n_fine = round(args.T / h_fine)
    if abs(n_fine * h_fine - args.T) > 1e-9 * args.T:
        raise ValidationError(f"smallest h = {h_fine} does not divide T = {args.T}")
    plan = NoisePlan(seed=args.seed, M=args.traj, n_fine=n_fine, m=eq.m, h_fine=h_fine)
    result = estimate_convergence_order(
        _kind(args.method), eq, init, args.T, hs, plan,
        theta=args.theta,
        sigma=args.sigma if args.method == "sigma-milstein" else 0.0,
    )
    header = ["h", "ms_error", "slope"]
    rows = [[h, e, result.slope] for h, e in zip(result.step_sizes, result.errors)]
    _write_table(args.out, args.format, header, rows)
    if args.plot:
        from . import figures

        figures.render_convergence(result, args.plot)
    return 0


_COMMANDS = {
    "check": cmd_check,
    "region": cmd_region,
    "simulate": cmd_simulate,
    "converge": cmd_converge,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DegenerateDenominator, ZeroDrift) as exc:
        print(f"numeric degeneracy: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
