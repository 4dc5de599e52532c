"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 tolerance or threshold failure,
4 numerical breakdown.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import io
from .analysis import analyze_surface, meridian_report, sample_params
from .bonnet import DEFAULT_THRESHOLD, reconstruct, rigid_align
from .errors import InputError, SurfaceError, ThresholdError
from .net import RESIDUAL_NAMES, build_net, check_integrability
from .surface_jets import catalog, catalog_names, sampled_surface

EXIT_OK, EXIT_INPUT, EXIT_THRESHOLD, EXIT_NUMERIC = 0, 2, 3, 4
MERIDIAN_FAMILIES = ("constant_K", "cmc", "constant_k", "sphere", "custom")


def _pair(text, sep, kind, name):
    parts = text.lower().split(sep)
    try:
        if len(parts) != 2:
            raise ValueError
        return tuple(kind(p) for p in parts)
    except ValueError:
        raise InputError(f"{name} must look like A{sep}B, got {text!r}") from None


def _params(text):
    if not text:
        return []
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise InputError(f"--params must be comma-separated reals, got {text!r}") from None


def load_surface(selector, params_text=""):
    """Catalog name, or a csv4d sample file."""
    if selector is None:
        raise InputError(f"--surface is required; catalog: {', '.join(catalog_names())}")
    if os.path.exists(selector):
        u, v, pos, label = io.read_csv4d(selector)
        return sampled_surface(u, v, pos, label=label)
    return catalog(selector, _params(params_text))


def _emit(report, out):
    if out:
        io.write_report(out, report)
    else:
        print(io.dumps_report(report))


# subcommands ----------------------------------------------------------------------

def cmd_analyze(args):
    model = load_surface(args.surface, args.params)
    nu, nv = _pair(args.grid or "16x16", "x", int, "--grid")
    report = analyze_surface(model, nu, nv, order=args.order, h=args.h)
    if args.out:
        io.write_report(args.out, report)
    s = report["summary"]
    print(f"{model.label}: {s['points']} points, classes {s['class_counts']}")
    print(f"predicates {s['predicate_counts']}")
    return EXIT_OK


def cmd_net(args):
    if not args.out:
        raise InputError("net needs --out for the grid file")
    model = load_surface(args.surface, args.params)
    nu, nv = _pair(args.grid or "11x11", "x", int, "--grid")
    du, dv = _pair(args.steps or "0.05x0.05", "x", float, "--steps")
    if args.seed:
        seed = _pair(args.seed, ",", float, "--seed")
    else:
        seed = tuple(0.5 * (a + b) for a, b in model.domain)
    kwargs = {} if args.h is None else {"frame_step": args.h}
    grid = build_net(model, seed, nu, nv, du, dv, **kwargs)
    io.write_grid(args.out, grid)
    print(f"net {nu}x{nv} on {model.label}: holonomy {grid.holonomy:.3e}, "
          f"max |F| {np.max(np.abs(grid.F_measured)):.3e}, max |M| {np.max(np.abs(grid.M_measured)):.3e}")
    return EXIT_OK


def residual_report(grid, threshold):
    rep = check_integrability(grid)
    lines = {name: {"max_abs": rep.max_abs[name], "rms": rep.rms[name],
                    "worst_node": list(rep.worst[name])} for name in RESIDUAL_NAMES}
    return rep, {"threshold": threshold, "residuals": lines, "max_residual": rep.max_residual,
                 "general_class": rep.general_class,
                 "metric_quotients_positive": rep.metric_quotients_positive,
                 "pass": rep.max_residual <= threshold}


def cmd_check(args):
    grid = io.read_grid(args.input)
    threshold = DEFAULT_THRESHOLD if args.threshold is None else args.threshold
    rep, report = residual_report(grid, threshold)
    if args.out:
        io.write_report(args.out, report)
    for name in RESIDUAL_NAMES:
        i, j = rep.worst[name]
        print(f"{name:10s} max {rep.max_abs[name]:.3e} rms {rep.rms[name]:.3e} at node ({i}, {j})")
    print(f"general_class {rep.general_class} "
          f"metric_quotients_positive {rep.metric_quotients_positive}")
    if not report["pass"]:
        name = max(rep.max_abs, key=rep.max_abs.get)
        print(f"FAIL: {name} residual {rep.max_abs[name]:.3e} exceeds {threshold:g} "
              f"at node {rep.worst[name]}", file=sys.stderr)
        return EXIT_THRESHOLD
    print("PASS")
    return EXIT_OK


def cmd_reconstruct(args):
    if not args.out:
        raise InputError("reconstruct needs --out for the patch file")
    grid = io.read_grid(args.input)
    threshold = DEFAULT_THRESHOLD if args.threshold is None else args.threshold
    patch = reconstruct(grid, threshold=threshold, path=args.path)
    meta = {"gram_drift": io.fmt(patch.gram_drift())}
    rms = None
    if grid.positions is not None:
        rms = rigid_align(patch.positions, grid.positions)[2]
        meta["rms_vs_grid_positions"] = io.fmt(rms)
    io.write_patch(args.out, patch, meta)
    print(f"compatibility residual {patch.compatibility_residual:.3e}, "
          f"gram drift {patch.gram_drift():.3e}")
    if rms is not None:
        print(f"rms after alignment to grid positions {rms:.3e}")
    return EXIT_OK


def cmd_align(args):
    cand = io.read_positions(args.candidate)
    ref = io.read_positions(args.reference)
    R, t, rms = rigid_align(cand, ref)
    report = {"rotation": R, "translation": t, "rms": rms}
    if args.threshold is not None:
        report["threshold"] = args.threshold
        report["pass"] = rms <= args.threshold
    if args.out:
        io.write_report(args.out, report)
    print(f"rms {rms:.3e}")
    if args.threshold is not None and rms > args.threshold:
        print(f"FAIL: rms exceeds {args.threshold:g}", file=sys.stderr)
        return EXIT_THRESHOLD
    return EXIT_OK


def _expression(text, var):
    """Callable from a numpy expression in one variable; no builtins are reachable."""
    names = {n: getattr(np, n) for n in ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh",
                                          "cosh", "tanh", "arctan", "pi")}
    try:
        code = compile(text, "<expression>", "eval")
    except SyntaxError as exc:
        raise InputError(f"bad expression {text!r}: {exc.msg}") from None
    bad = [n for n in code.co_names if n not in names and n != var]
    if bad:
        raise InputError(f"unknown names in {text!r}: {', '.join(bad)}")
    return lambda x: eval(code, {"__builtins__": {}}, {**names, var: x})


def meridian_spec(args):
    from . import meridian as md

    if args.family not in MERIDIAN_FAMILIES:
        raise InputError(f"family must be one of {', '.join(MERIDIAN_FAMILIES)}")
    if args.family != "custom":
        return md.catalog_spec(args.family, _params(args.params))
    if not (args.f and args.u_range):
        raise InputError("custom family needs --f and --u-range")
    u_range = _pair(args.u_range, ",", float, "--u-range")
    g_fn = _expression(args.g, "u") if args.g else None
    prof = md.explicit_profile(_expression(args.f, "u"), u_range, g_fn, info={"family": "custom"})
    kappa = args.kappa or "0"
    try:
        kappa_c = float(kappa)
    except ValueError:
        kappa_c = _expression(kappa, "v")
    v_range = _pair(args.v_range, ",", float, "--v-range") if args.v_range else (0.0, 2 * np.pi)
    return md.MeridianSpec(prof, kappa_c, v_range, "meridian_custom")


def cmd_meridian(args):
    from .meridian import meridian_surface

    spec = meridian_spec(args)
    model = meridian_surface(spec)
    nu, nv = _pair(args.grid or "32x32", "x", int, "--grid")
    report = meridian_report(spec, model, nu, nv)
    if args.out:
        u, v = sample_params(model, nu, nv)
        uu, vv = np.meshgrid(u, v, indexing="ij")
        io.write_csv4d(args.out, u, v, model.point(uu, vv), label=model.label)
    if args.report:
        io.write_report(args.report, report)
    print(f"{model.label}: class {report['meridian_class']}")
    for name, check in report["checks"].items():
        dev = check.get("max_deviation", check.get("max_abs"))
        print(f"{name}: deviation {dev:.3e} tolerance {check['tolerance']:g} "
              f"{'PASS' if check['pass'] else 'FAIL'}")
    return EXIT_OK if report["pass"] else EXIT_THRESHOLD


def cmd_export(args):
    if args.format not in ("obj", "csv4d"):
        raise InputError(f"unknown export format {args.format!r}; use obj or csv4d")
    if not args.out:
        raise InputError("export needs --out")
    if args.patch:
        pos, _, meta = io.read_patch(args.patch)
        nu, nv = pos.shape[:2]
        u = np.arange(nu) * float(meta["du"])
        v = np.arange(nv) * float(meta["dv"])
        label = "patch"
    else:
        model = load_surface(args.surface, args.params)
        nu, nv = _pair(args.grid or "32x32", "x", int, "--grid")
        u, v = sample_params(model, nu, nv)
        uu, vv = np.meshgrid(u, v, indexing="ij")
        pos = model.point(uu, vv)
        label = model.label
    if args.format == "obj":
        io.write_obj(args.out, pos, label)
    else:
        io.write_csv4d(args.out, u, v, pos, label)
    print(f"wrote {nu * nv} vertices to {args.out}")
    return EXIT_OK


# parser -------------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="surfr4", description="Invariants of surfaces in R^4.")
    sub = parser.add_subparsers(dest="command", required=True)

    def surface_flags(p):
        p.add_argument("--surface", help="catalog name or csv4d sample file")
        p.add_argument("--params", default="", help="comma-separated surface parameters")

    p = sub.add_parser("analyze", help="pointwise invariants and figures on a sample grid")
    surface_flags(p)
    p.add_argument("--grid", help="NUxNV samples (default 16x16)")
    p.add_argument("--order", type=int, choices=(2, 3), default=2, help="jet order")
    p.add_argument("--h", type=float, help="finite-difference step instead of analytic jets")
    p.add_argument("--out", help="JSON report path")
    p.set_defaults(run=cmd_analyze)

    p = sub.add_parser("net", help="principal-coordinate net and invariant grid")
    surface_flags(p)
    p.add_argument("--grid", help="NUxNV nodes (default 11x11)")
    p.add_argument("--steps",
                   help="DUxDV arclength steps along the spines through the seed (default 0.05x0.05)")
    p.add_argument("--seed", help="U,V seed parameter point (default domain centre)")
    p.add_argument("--h", type=float, help="frame finite-difference step")
    p.add_argument("--out", help="grid file path")
    p.set_defaults(run=cmd_net)

    p = sub.add_parser("check", help="integrability residuals of a grid file")
    p.add_argument("input")
    p.add_argument("--threshold", type=float, help=f"max residual (default {DEFAULT_THRESHOLD:g})")
    p.add_argument("--out", help="JSON report path")
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("reconstruct", help="surface patch from a grid file")
    p.add_argument("input")
    p.add_argument("--threshold", type=float, help=f"max residual (default {DEFAULT_THRESHOLD:g})")
    p.add_argument("--path", choices=("u_first", "v_first"), default="u_first")
    p.add_argument("--out", help="patch file path")
    p.set_defaults(run=cmd_reconstruct)

    p = sub.add_parser("align", help="rigid alignment of two position sets")
    p.add_argument("candidate")
    p.add_argument("reference")
    p.add_argument("--threshold", type=float, help="fail (exit 3) when rms exceeds this")
    p.add_argument("--out", help="JSON report path")
    p.set_defaults(run=cmd_align)

    p = sub.add_parser("meridian", help="meridian surface of a family, with its constancy check")
    p.add_argument("family", help=", ".join(MERIDIAN_FAMILIES))
    p.add_argument("--params", default="", help="family parameters, as for the catalog")
    p.add_argument("--f", help="custom: f(u) expression")
    p.add_argument("--g", help="custom: g(u) expression (default: unit-speed profile)")
    p.add_argument("--u-range", help="custom: U0,U1")
    p.add_argument("--kappa", help="custom: spherical curvature, number or expression in v")
    p.add_argument("--v-range", help="custom: V0,V1 (default 0,2*pi)")
    p.add_argument("--grid", help="NUxNV samples (default 32x32)")
    p.add_argument("--out", help="csv4d mesh path")
    p.add_argument("--report", help="JSON report path")
    p.set_defaults(run=cmd_meridian)

    p = sub.add_parser("export", help="mesh export of a surface or patch")
    surface_flags(p)
    p.add_argument("--patch", help="patch file instead of --surface")
    p.add_argument("--format", default="obj", help="obj or csv4d")
    p.add_argument("--grid", help="NUxNV samples (default 32x32)")
    p.add_argument("--out", help="output path")
    p.set_defaults(run=cmd_export)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except ThresholdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_THRESHOLD
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SurfaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
