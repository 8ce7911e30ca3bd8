"""Command-line front end.

Every subcommand is a thin driver around one module operation and emits
machine-readable output: JSON for scalar reports, CSV for curves, with all
floats at 17 significant digits and the fully resolved run configuration
embedded in every file, so identical configurations reproduce byte-identical
artifacts.  Optional --plot renders matplotlib figures next to the delimited
output.

Exit status: 0 success, 2 usage error, 3 parameter-domain error,
4 numerical failure (non-convergence, bracket failure, unresolved bound
state).  Error messages name the failing precondition on stderr.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import boundary, radial, solver, spectral
from ._serialize import dumps_json, write_csv, write_json
from .errors import BracketError, ConvergenceError, DomainError, NoBoundStateError
from .grid import Grid, OneDGrid, save_field
from .params import (
    CknParams,
    CylParams,
    ckn_from_cyl,
    cyl_from_ckn,
    fs_b,
    fs_lambda,
    kelvin_dual,
)

EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_NUMERICAL = 4

OUTDIR_ENV = "CYLSYM_OUTDIR"


def _outpath(path: str) -> str:
    """Resolve an output path against the CYLSYM_OUTDIR default directory."""
    if os.path.isabs(path):
        return path
    return os.path.join(os.environ.get(OUTDIR_ENV, "."), path)


def _emit_json(obj, out: str | None) -> None:
    if out is None:
        sys.stdout.write(dumps_json(obj) + "\n")
    else:
        write_json(_outpath(out), obj)


def _add_chart_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--N", type=int, required=True, help="space dimension, N >= 2")
    sp.add_argument("--a", type=float, help="(a, b) chart: gradient-weight parameter")
    sp.add_argument("--b", type=float, help="(a, b) chart: norm-weight parameter")
    sp.add_argument("--lambda", dest="lam", type=float,
                    help="cylinder chart: potential strength Lambda > 0")
    sp.add_argument("--p", type=float, help="cylinder chart: exponent in (2, 2N/(N-2))")


def _resolve_chart(args, parser: argparse.ArgumentParser):
    """Exactly one chart must be supplied; returns (ckn, cyl, chart_name)."""
    has_ab = args.a is not None or args.b is not None
    has_lp = args.lam is not None or args.p is not None
    if has_ab == has_lp:
        parser.error("supply exactly one parameter chart: --a/--b or --lambda/--p")
    if has_ab:
        if args.a is None or args.b is None:
            parser.error("the (a, b) chart needs both --a and --b")
        q = CknParams(args.N, args.a, args.b)
        return q, cyl_from_ckn(q, auto_dualize=args.auto_dualize), "ab"
    if args.lam is None or args.p is None:
        parser.error("the cylinder chart needs both --lambda and --p")
    c = CylParams(args.N, args.lam, args.p)
    return ckn_from_cyl(c), c, "cyl"


def _chart_config(args, chart: str) -> dict:
    cfg = {"N": args.N, "chart": chart}
    if chart == "ab":
        cfg["a"] = args.a
        cfg["b"] = args.b
        cfg["auto_dualize"] = args.auto_dualize
    else:
        cfg["lambda"] = args.lam
        cfg["p"] = args.p
    return cfg


def _params_dict(q: CknParams, c: CylParams) -> dict:
    return {
        "N": q.N,
        "a": q.a,
        "b": q.b,
        "region": q.region,
        "lambda": c.lam,
        "p": c.p,
        "edge": c.edge,
    }


# --------------------------------------------------------------------------
# subcommand handlers

def _cmd_convert(args, parser) -> int:
    q, c, chart = _resolve_chart(args, parser)
    out = _params_dict(q, c)
    out["relation_residual"] = q.b - q.a - 1.0 - q.N * (1.0 / c.p - 0.5)
    out["config"] = {"command": "convert", **_chart_config(args, chart)}
    _emit_json(out, args.out)
    return 0


def _cmd_dual(args, parser) -> int:
    q = CknParams(args.N, args.a, args.b)
    d = kelvin_dual(q)
    out = {
        "input": {"N": q.N, "a": q.a, "b": q.b, "region": q.region},
        "dual": {"N": d.N, "a": d.a, "b": d.b, "region": d.region},
        "lambda_input": 0.25 * (q.N - 2.0 - 2.0 * q.a) ** 2,
        "lambda_dual": 0.25 * (d.N - 2.0 - 2.0 * d.a) ** 2,
        "config": {"command": "dual", "N": args.N, "a": args.a, "b": args.b},
    }
    _emit_json(out, args.out)
    return 0


def _cmd_fs_curve(args, parser) -> int:
    if not (args.a_max < 0.0):
        raise DomainError("fs-curve requires a_max < 0 (the curve's domain is a < 0)")
    if args.a_min >= args.a_max:
        raise DomainError("fs-curve requires a_min < a_max")
    cfg = {"command": "fs-curve", "N": args.N, "a_min": args.a_min,
           "a_max": args.a_max, "num": args.num}
    rows = []
    for a in np.linspace(args.a_min, args.a_max, args.num):
        b = fs_b(args.N, float(a))
        c = cyl_from_ckn(CknParams(args.N, float(a), b))
        rows.append((float(a), b, c.p, c.lam, fs_lambda(args.N, c.p)))
    path = _outpath(args.out)
    write_csv(path, ("a", "b_fs", "p", "lambda", "lambda_fs"), rows,
              comments=["config-json: " + dumps_json(cfg).replace("\n", " ")])
    if args.plot:
        from .plots import plot_fs_curve

        plot_fs_curve(rows, args.N, _outpath(args.plot))
    return 0


def _cmd_radial(args, parser) -> int:
    q, c, chart = _resolve_chart(args, parser)
    c.require_open_range("the radial profile")
    cfg = {"command": "radial", **_chart_config(args, chart),
           "t_max": args.t_max, "nt": args.nt}
    t = np.linspace(-args.t_max, args.t_max, args.nt)
    w = np.asarray(radial.w_star(c, t))
    r = np.exp(t)
    u = np.asarray(radial.u_star(q, r)) if q.region == "interior" else np.full_like(t, math.nan)
    rows = list(zip(t, w, r, u))
    path = _outpath(args.out)
    write_csv(path, ("t", "w_star", "r", "u_star"), rows,
              comments=["config-json: " + dumps_json(cfg).replace("\n", " ")])
    if args.plot:
        from .plots import plot_radial_profile

        plot_radial_profile(t, w, _outpath(args.plot), u=u)
    return 0


def _cmd_constants(args, parser) -> int:
    q, c, chart = _resolve_chart(args, parser)
    rc = radial.radial_constants(c)
    closed = radial.lp_mass_cyl_closed_form(c)
    out = {
        "params": _params_dict(q, c),
        "inv_c_star": rc.inv_c_star,
        "inv_c_star_closed_form": radial.inv_c_star_closed_form(c),
        "lp_norm_1d": rc.lp_norm_1d,
        "lp_mass_cyl": rc.lp_mass_cyl,
        "lp_mass_cyl_closed_form": closed,
        "lp_mass_rel_difference": abs(rc.lp_mass_cyl - closed) / closed,
        "c_p": rc.c_p,
        "kappa_star": rc.kappa_star,
        "amplitude": radial.RadialProfile.from_cyl(c).amplitude,
        "config": {"command": "constants", **_chart_config(args, chart)},
    }
    _emit_json(out, args.out)
    return 0


def _cmd_spectrum(args, parser) -> int:
    q, c, chart = _resolve_chart(args, parser)
    c.require_open_range("the spectral problem")
    mp = spectral.ModeProblem(c, k=1)
    h = args.h if args.h is not None else min(0.01, 0.01 / mp.alpha)
    T = args.T if args.T is not None else max(20.0, 12.0 / mp.alpha)
    grid = OneDGrid.from_spacing(T, h)
    res = spectral.poschl_teller_ground(mp, grid)
    out = {
        "params": _params_dict(q, c),
        "gamma_1": mp.gamma_k,
        "beta": mp.beta,
        "alpha": mp.alpha,
        "mu1_closed_form": spectral.mu1_closed_form(c),
        "lambda0_closed_form": -0.25 * c.p * c.p * c.lam,
        "lambda0_numeric": res.lambda0,
        "mu1_numeric": res.mu1,
        "mu1_threshold": boundary.mu1_threshold(c.N, c.p),
        "proposition_regime_ok": spectral.proposition_regime_ok(c),
        "grid": {"T": grid.T, "n": grid.n, "h": grid.h},
        "config": {"command": "spectrum", **_chart_config(args, chart),
                   "T": args.T, "h": args.h},
    }
    _emit_json(out, args.out)
    return 0


def _cmd_minimize(args, parser) -> int:
    q, c, chart = _resolve_chart(args, parser)
    grid = Grid.for_cyl(c, nt=args.nt, nphi=args.nphi, margin=args.decay_margin)
    opts = solver.MinimizeOptions(max_iter=args.max_iter,
                                  breaking_margin=args.breaking_margin)
    init = solver.perturbed_radial_init(grid, c, args.perturbation)
    report = solver.minimize(c, init, opts)
    out = {
        "params": _params_dict(q, c),
        **report.as_dict(),
        "config": {"command": "minimize", **_chart_config(args, chart),
                   "nt": args.nt, "nphi": args.nphi,
                   "decay_margin": args.decay_margin,
                   "perturbation": args.perturbation,
                   "breaking_margin": args.breaking_margin,
                   "max_iter": args.max_iter},
    }
    _emit_json(out, args.out)
    if args.save_field:
        save_field(report.field, _outpath(args.save_field))
    if args.plot:
        from .plots import plot_minimize_field

        scale = report.energy ** (1.0 / (c.p - 2.0))
        radial_vals = np.asarray(radial.w_star(c, grid.t)) / scale
        plot_minimize_field(report.field, radial_vals, _outpath(args.plot))
    if not report.converged:
        print("minimize did not converge within max_iter", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


def _cmd_scan(args, parser) -> int:
    p_grid = [float(s) for s in args.p_grid.split(",")]
    opts = boundary.BoundaryOptions(
        nt=args.nt, nphi=args.nphi, decay_margin=args.decay_margin,
        perturbation=args.perturbation, breaking_margin=args.breaking_margin,
        max_iter=args.max_iter,
    )
    curve = boundary.scan(args.N, p_grid, args.tol, opts)
    cfg = {"command": "scan", "N": args.N, "p_grid": p_grid, "tol": args.tol,
           "nt": args.nt, "nphi": args.nphi, "decay_margin": args.decay_margin,
           "perturbation": args.perturbation,
           "breaking_margin": args.breaking_margin, "max_iter": args.max_iter}
    write_csv(_outpath(args.out), boundary.BoundaryCurve.CSV_COLUMNS,
              curve.rows(),
              comments=["config-json: " + dumps_json(cfg).replace("\n", " ")])
    if args.out_json:
        write_json(_outpath(args.out_json), {**curve.as_dict(), "config": cfg})
    if args.plot:
        from .plots import plot_boundary_curve

        plot_boundary_curve(curve, _outpath(args.plot))
    if any(not pt.converged for pt in curve.points):
        failed = [pt.p for pt in curve.points if not pt.converged]
        print(f"scan points failed at p = {failed}", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


def _cmd_scaling_check(args, parser) -> int:
    q, c, chart = _resolve_chart(args, parser)
    sigmas = [float(s) for s in args.sigma.split(",")]
    if args.field == "radial":
        ev = solver.radial_evaluator(c)
    else:
        ev = solver.gaussian_mode_evaluator(c.N)
    residuals = {str(s): solver.scaling_check(ev, s, c) for s in sigmas}
    out = {
        "params": _params_dict(q, c),
        "field": args.field,
        "residuals": residuals,
        "config": {"command": "scaling-check", **_chart_config(args, chart),
                   "sigma": args.sigma, "field": args.field},
    }
    _emit_json(out, args.out)
    return 0


# --------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cylsym",
        description="numerical laboratory for symmetry breaking of "
                    "weighted-inequality extremals on the cylinder",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def chart_command(name: str, help_: str, handler):
        sp = sub.add_parser(name, help=help_)
        _add_chart_args(sp)
        sp.add_argument("--auto-dualize", action="store_true",
                        help="fold a > a_c inputs through the inversion duality")
        sp.add_argument("--out", help="output file (default: stdout JSON)")
        sp.set_defaults(handler=handler)
        return sp

    chart_command("convert", "convert between the (a,b) and (Lambda,p) charts",
                  _cmd_convert)

    sp = sub.add_parser("dual", help="inversion duality of an (a, b) point")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--b", type=float, required=True)
    sp.add_argument("--out")
    sp.set_defaults(handler=_cmd_dual)

    sp = sub.add_parser("fs-curve", help="tabulate the instability curve")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--a-min", type=float, default=-5.0)
    sp.add_argument("--a-max", type=float, default=-0.05)
    sp.add_argument("--num", type=int, default=100)
    sp.add_argument("--out", default="fs_curve.csv")
    sp.add_argument("--plot", help="also render a PNG figure to this path")
    sp.set_defaults(handler=_cmd_fs_curve)

    sp = chart_command("radial", "tabulate the radial extremal profile", _cmd_radial)
    sp.add_argument("--t-max", type=float, default=10.0)
    sp.add_argument("--nt", type=int, default=401)
    sp.add_argument("--plot", help="also render a PNG figure to this path")
    sp.set_defaults(out="radial.csv")

    chart_command("constants", "radial extremal constants", _cmd_constants)

    sp = chart_command("spectrum", "closed-form and numerical bottom eigenvalue",
                       _cmd_spectrum)
    sp.add_argument("--T", type=float, help="1D grid half-width (default: auto)")
    sp.add_argument("--h", type=float, help="1D grid spacing (default: auto)")

    sp = chart_command("minimize", "descend the cylinder quotient", _cmd_minimize)
    sp.add_argument("--nt", type=int, default=2001)
    sp.add_argument("--nphi", type=int, default=32)
    sp.add_argument("--decay-margin", type=float, default=25.0)
    sp.add_argument("--perturbation", type=float, default=0.1)
    sp.add_argument("--breaking-margin", type=float, default=1e-3)
    sp.add_argument("--max-iter", type=int, default=20000)
    sp.add_argument("--save-field", help="write the final field as CSV + sidecar")
    sp.add_argument("--plot", help="also render a PNG figure to this path")

    sp = sub.add_parser("scan", help="trace the symmetry-breaking boundary")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--p-grid", required=True,
                    help="comma-separated increasing exponents")
    sp.add_argument("--tol", type=float, default=0.05,
                    help="bisection bracket width target")
    sp.add_argument("--nt", type=int, default=2001)
    sp.add_argument("--nphi", type=int, default=32)
    sp.add_argument("--decay-margin", type=float, default=25.0)
    sp.add_argument("--perturbation", type=float, default=0.1)
    sp.add_argument("--breaking-margin", type=float, default=1e-3)
    sp.add_argument("--max-iter", type=int, default=20000)
    sp.add_argument("--out", default="scan.csv")
    sp.add_argument("--out-json", default="scan.json")
    sp.add_argument("--plot", help="also render a PNG figure to this path")
    sp.set_defaults(handler=_cmd_scan)

    sp = chart_command("scaling-check", "residual of the scaling identity",
                       _cmd_scaling_check)
    sp.add_argument("--sigma", default="0.5,2",
                    help="comma-separated scaling factors")
    sp.add_argument("--field", choices=("radial", "mixed"), default="mixed")

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args, parser)
    except DomainError as exc:
        print(f"parameter domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ConvergenceError, BracketError, NoBoundStateError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
