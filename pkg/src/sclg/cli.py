"""Command-line interface: ``sclg <subcommand> ...``.

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import harness, io, plotting
from .grid import SampledGrid, parse_grid
from .hamilton_flow import (
    FlowError,
    PhaseSpaceState,
    flow_lines,
    max_line_discrepancy,
    stationary_points,
)
from .modes import ModeIndex, hg_mode_2d, lg_mode
from .operator_core import evolved_lg_field
from .special_functions import PoleProximityError

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4

# options whose values may legitimately start with a minus sign
_VALUE_OPTIONS = ("--grid", "--t", "--h-list")


class UsageError(Exception):
    pass


def _normalize_argv(argv):
    """Glue ``--grid -4:4:256`` into ``--grid=-4:4:256`` so argparse keeps the value."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_OPTIONS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def _grid_arg(text):
    try:
        return parse_grid(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
    return v


def _nonneg_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {v}")
    return v


def _h_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed h list {text!r}") from None


def _fmt(v):
    return format(float(v), ".6f")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_modes(args):
    x_axis, y_axis = args.grid
    X, Y = np.meshgrid(x_axis.points(), y_axis.points(), indexing="ij")
    if args.kind == "hg":
        values = hg_mode_2d(ModeIndex(args.m, args.n), X, Y, args.h)
        label, extra = "hg_mode", {"modes": [args.m, args.n]}
    else:
        values = lg_mode(args.j, args.k, X, Y, args.h)
        label, extra = "lg_mode", {"modes": [args.j, args.k]}
    grid = SampledGrid(args.h, x_axis, y_axis, values, quantity=label, extra=extra)
    io.write_bundle(grid, args.out)
    print(f"l2_norm {_fmt(grid.l2_norm())}")
    return EXIT_OK


def _default_seeds(h, r2):
    g = np.linspace(-1.0, 1.0, 9)
    pts = [(float(x), float(y)) for x in g for y in g]
    fixed = stationary_points(h, r2)
    return pts + fixed["elliptic"] + fixed["hyperbolic"]


def cmd_flow(args):
    if args.t_max <= 0:
        raise UsageError("--t-max must be positive")
    pts = io.read_seeds(args.seeds) if args.seeds else _default_seeds(args.h, args.r2)
    seeds = [PhaseSpaceState(x, xi, args.h, args.r2) for x, xi in pts]
    lines = flow_lines(seeds, args.t_max, args.dt, args.stride, method=args.method)
    io.write_flow_lines(lines, args.out)
    escaped = sum(1 for line in lines if line.escaped)
    print(f"lines {len(lines)} escaped {escaped}")
    if args.compare:
        other = "closed" if args.method == "midpoint" else "midpoint"
        alt = flow_lines(seeds, args.t_max, args.dt, args.stride, method=other)
        mid, closed = (lines, alt) if args.method == "midpoint" else (alt, lines)
        print(f"max_discrepancy {max_line_discrepancy(mid, closed):.3e}")
    return EXIT_OK


def cmd_evolve(args):
    x_axis, y_axis = args.grid
    grid = evolved_lg_field(args.m, args.n, args.t, args.h, x_axis, y_axis, N=args.truncation)
    stem = Path(args.out)
    io.write_bundle(grid, stem)
    io.write_bundle(grid.with_values(np.abs(grid.values), quantity="abs_evolved_lg"),
                    stem.parent / f"{stem.name}_abs")
    print(f"l2_norm {_fmt(grid.l2_norm())}")
    if (args.m, args.n) == (0, 0) and args.h == 1.0:
        X, Y = grid.mesh()
        T = args.t / math.sqrt(2.0)
        residual = np.max(np.abs(grid.values - harness.caption_field(T, X, Y)))
        print(f"caption_residual {residual:.3e}")
    return EXIT_OK


def cmd_egorov(args):
    if len(args.h_list) < 3:
        raise UsageError("--h-list needs at least three values")
    if any(b >= a for a, b in zip(args.h_list, args.h_list[1:])) or min(args.h_list) <= 0:
        raise UsageError("--h-list must be positive and strictly decreasing")
    report = harness.egorov_order(args.m, args.n, args.t, args.h_list, count=args.count, dt=args.dt)
    io.write_json(report.to_dict(), args.report)
    for h, s, l in zip(report.h_values, report.sup_errors, report.l2_errors):
        print(f"h {h:g} sup {s:.6e} l2 {l:.6e}")
    print(f"order_sup {report.sup_order:.4f} order_l2 {report.l2_order:.4f}")
    return EXIT_OK


def cmd_figures(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.which == 1:
        frames = harness.figure1_frames()
        for f in frames:
            io.write_bundle(f.field, out / f"frame_k{f.k}")
        plotting.figure1_svg(frames, out / "figure1.svg")
        worst = max(f.residual for f in frames)
        print(f"frames {len(frames)} max_caption_residual {worst:.3e}")
    else:
        data = harness.figure2_flowlines()
        io.write_flow_lines(data.lines, out / "figure2_flowlines.csv")
        plotting.figure2_svg(data, out / "figure2.svg")
        print(f"lines {len(data.lines)} stationary 4")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="sclg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("modes", help="sample an HG or LG mode on a grid")
    p.add_argument("--kind", choices=("hg", "lg"), required=True)
    p.add_argument("--m", type=_nonneg_int, default=0)
    p.add_argument("--n", type=_nonneg_int, default=0)
    p.add_argument("--j", type=_nonneg_int, default=0)
    p.add_argument("--k", type=_nonneg_int, default=0)
    p.add_argument("--h", type=_positive, default=1.0)
    p.add_argument("--grid", type=_grid_arg, default="-4:4:256", help="min:max:count[,min:max:count]")
    p.add_argument("--out", default="mode", help="output stem")
    p.set_defaults(func=cmd_modes)

    p = sub.add_parser("flow", help="Hamilton flow lines of p")
    p.add_argument("--h", type=_positive, default=0.1)
    p.add_argument("--r2", type=float, default=4.0)
    p.add_argument("--seeds", help="CSV with x,xi columns (default: lattice plus fixed points)")
    p.add_argument("--t-max", type=float, default=10.0)
    p.add_argument("--dt", type=_positive, default=1e-3)
    p.add_argument("--stride", type=int, default=10)
    p.add_argument("--method", choices=("midpoint", "closed"), default="midpoint")
    p.add_argument("--compare", action="store_true", help="also run the other method and report the gap")
    p.add_argument("--out", default="flowlines.csv")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("evolve", help="propagated LG field U_t h_m x conj U_t h_n")
    p.add_argument("--m", type=_nonneg_int, default=0)
    p.add_argument("--n", type=_nonneg_int, default=0)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--h", type=_positive, default=1.0)
    p.add_argument("--grid", type=_grid_arg, default="-4:4:256")
    p.add_argument("--truncation", type=int, default=64)
    p.add_argument("--out", default="evolved")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("egorov", help="transport error and fitted order in h")
    p.add_argument("--m", type=_nonneg_int, default=0)
    p.add_argument("--n", type=_nonneg_int, default=0)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--h-list", type=_h_list, default=[0.4, 0.2, 0.1, 0.05])
    p.add_argument("--count", type=int, default=harness.EGOROV_COUNT)
    p.add_argument("--dt", type=_positive, default=harness.EGOROV_DT)
    p.add_argument("--report", default="egorov.json")
    p.set_defaults(func=cmd_egorov)

    p = sub.add_parser("figures", help="render figure data and SVGs")
    p.add_argument("--which", type=int, choices=(1, 2), required=True)
    p.add_argument("--out", default="figures")
    p.set_defaults(func=cmd_figures)
    return parser


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_normalize_argv(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"sclg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"sclg: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (FlowError, PoleProximityError, harness.ExclusionBudgetError, ArithmeticError) as exc:
        print(f"sclg: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"sclg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
