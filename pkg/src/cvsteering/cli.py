"""Command-line interface: single-state analysis, tables and figure data."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .bell import N_STARTS, bell_optimize, write_trace
from .errors import SteeringError
from .polygauss import evaluate_grid, marginalize
from .reid import BOUND as REID_BOUND
from .reid import reid_test
from .reference import LG_TABLE, SUB1_TABLE, SWEEP_R, TMSV_TABLE
from .states import LG, TMSV, Noon, PhotonSubtracted, parse_state
from .steering import BOUND as ENTROPIC_BOUND
from .steering import default_pairing, entropic_test

CRITERIA = ("reid", "entropic", "bell")
SMALL_R = 1e-3
THREADS_ENV = "CVSTEERING_THREADS"

EXIT_OK, EXIT_PARSE, EXIT_NUMERIC = 0, 2, 3


def fmt(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return "" if x is None else str(x)


def resolve_threads(value: int | None) -> int:
    if value is not None:
        return max(1, value)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise SystemExit(f"error: {THREADS_ENV} must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _criteria(text: str) -> tuple:
    items = tuple(dict.fromkeys(c.strip() for c in text.split(",") if c.strip()))
    bad = [c for c in items if c not in CRITERIA]
    if bad or not items:
        raise argparse.ArgumentTypeError(
            f"criteria must be a comma-separated subset of {','.join(CRITERIA)}"
        )
    return items


def _state(text: str):
    try:
        return parse_state(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError("must be a positive number")
    return value


class _Options:
    """Grid and optimizer settings shared by all commands."""

    def __init__(self, args):
        self.nodes = getattr(args, "grid_nodes", None)
        self.width_mult = getattr(args, "half_width_mult", 6.0)
        self.refine = getattr(args, "refine", False)
        self.seed = getattr(args, "seed", 0)
        self.threads = resolve_threads(getattr(args, "threads", None))

    def entropic(self, state, delta=True):
        return entropic_test(
            state.wigner(),
            default_pairing(state),
            width_mult=self.width_mult,
            nodes=self.nodes,
            refine=self.refine,
            delta=delta,
        )

    def bell(self, state, **kwargs):
        return bell_optimize(state, seed=self.seed, n_jobs=self.threads, **kwargs)


# ---------------------------------------------------------------- output


def _open_out(path):
    if path in (None, "-"):
        return _StdoutSink()
    return open(path, "w", newline="")


class _StdoutSink(io.StringIO):
    def __exit__(self, *exc):
        sys.stdout.write(self.getvalue())
        sys.stdout.flush()
        return super().__exit__(*exc)


def _write_rows(path, header, rows):
    with _open_out(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def _write_json(path, obj):
    with _open_out(path) as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for key in sorted(obj):
            yield from _flatten(obj[key], f"{prefix}{key}.")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix[:-1], obj


# ---------------------------------------------------------------- commands


def analyze(state, criteria, opts: _Options) -> dict:
    out = {"state": state.label, "version": __version__}
    pg = state.wigner()
    if "reid" in criteria:
        out["reid"] = reid_test(pg).to_dict()
    if "entropic" in criteria:
        out["entropic"] = opts.entropic(state).to_dict()
    if "bell" in criteria:
        out["bell"] = opts.bell(state).to_dict()
    return out


def cmd_analyze(args) -> int:
    bundle = analyze(args.state, args.criteria, _Options(args))
    if args.format == "json":
        _write_json(args.out, bundle)
    else:
        _write_rows(args.out, ["key", "value"], _flatten(bundle))
    return EXIT_OK


def _audit(value, ref):
    return [ref, abs(value - ref)]


def lg_table(opts: _Options) -> tuple:
    header = ["n", "bell_ratio", "steering_ratio", "reid_4product"]
    for col in header[1:]:
        header += [f"reference_{col}", f"abs_diff_{col}"]
    rows = []
    for n in range(11):
        state = LG(n, 0)
        bell = opts.bell(state).ratio
        steer = opts.entropic(state).ratio
        reid = 4.0 * reid_test(state.wigner()).product
        ref = LG_TABLE[n]
        rows.append([n, bell, steer, reid, *_audit(bell, ref[0]), *_audit(steer, ref[1]),
                     *_audit(reid, ref[2])])
    return header, rows


def tmsv_sweep(opts: _Options) -> tuple:
    header = ["state", "r", "bell_ratio", "steering_ratio"]
    for col in header[2:]:
        header += [f"reference_{col}", f"abs_diff_{col}"]
    header.append("footnote")
    rows = []
    for name, table in (("tmsv", TMSV_TABLE), ("sub1", SUB1_TABLE)):
        for r in SWEEP_R:
            note = ""
            r_eff = r
            if name == "sub1" and r == 0.0:
                r_eff = SMALL_R
                note = f"computed at r={SMALL_R:g}; the subtracted state is undefined at r=0"
            state = TMSV(r_eff) if name == "tmsv" else PhotonSubtracted(r_eff, 1, 1)
            bell = opts.bell(state).ratio
            steer = opts.entropic(state).ratio
            ref = table[r]
            rows.append([name, r, bell, steer, *_audit(bell, ref[0]), *_audit(steer, ref[1]), note])
    return header, rows


TABLES = {"lg": lg_table, "tmsv-sweep": tmsv_sweep}


def cmd_table(args) -> int:
    header, rows = TABLES[args.which](_Options(args))
    if args.format == "json":
        _write_json(args.out, [dict(zip(header, row)) for row in rows])
    else:
        _write_rows(args.out, header, rows)
    return EXIT_OK


def fig1(opts):
    rows = [[n, reid_test(LG(n).wigner()).product, REID_BOUND] for n in range(11)]
    return ["n", "reid_product", "bound"], rows


def fig2(opts):
    rows = []
    for n in range(11):
        rep = opts.entropic(LG(n), delta=False)
        rows.append([n, rep.lhs, ENTROPIC_BOUND, rep.ratio])
    return ["n", "lhs", "bound", "ratio"], rows


def fig3a(opts):
    rows = []
    for i in range(1, 101):
        r = 0.02 * i
        rows.append([r, reid_test(TMSV(r).wigner()).product,
                     reid_test(PhotonSubtracted(r, 1, 1).wigner()).product, REID_BOUND])
    return ["r", "tmsv", "sub1", "bound"], rows


def fig3b(opts):
    rows = []
    for i in range(1, 29):
        r = 0.05 * i
        rows.append([r, opts.entropic(TMSV(r), delta=False).lhs,
                     opts.entropic(PhotonSubtracted(r, 1, 1), delta=False).lhs, ENTROPIC_BOUND])
    return ["r", "tmsv", "sub1", "bound"], rows


FIG4_HALF_WIDTH = 4.0
FIG4_NODES = 161


def fig4(opts):
    x = np.linspace(-FIG4_HALF_WIDTH, FIG4_HALF_WIDTH, FIG4_NODES)
    grids = [evaluate_grid(marginalize(Noon(N).wigner(), ("X", "Y")), x, x) for N in (1, 4)]
    rows = [[x[i], x[j], grids[0][i, j], grids[1][i, j]]
            for i in range(FIG4_NODES) for j in range(FIG4_NODES)]
    return ["x", "y", "p_n1", "p_n4"], rows


FIGURES = {"fig1": fig1, "fig2": fig2, "fig3a": fig3a, "fig3b": fig3b, "fig4": fig4}


def cmd_figure(args) -> int:
    header, rows = FIGURES[args.which](_Options(args))
    _write_rows(args.out, header, rows)
    return EXIT_OK


def cmd_bell_opt(args) -> int:
    opts = _Options(args)
    report = opts.bell(
        args.state,
        free_r=args.free_r,
        starts=args.starts,
        complex_search=args.complex,
        trace=args.trace is not None,
    )
    if args.trace is not None:
        write_trace(report, args.trace)
    obj = report.to_dict()
    obj["version"] = __version__
    if args.format == "json":
        _write_json(args.out, obj)
    else:
        _write_rows(args.out, ["key", "value"], _flatten(obj))
    return EXIT_OK


def cmd_version(args) -> int:
    print(__version__)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _common(p, grid=True, optimizer=True, fmt_choices=("json", "csv"), default_fmt="json"):
    if grid:
        p.add_argument("--grid-nodes", type=_positive_int, default=None,
                       help="nodes per axis of the 2D entropy grids (default: automatic, >= 1024)")
        p.add_argument("--half-width-mult", type=_positive_float, default=6.0,
                       help="grid half-width in standard deviations, plus one (default: 6)")
        p.add_argument("--refine", action="store_true",
                       help="double every entropy grid")
    if optimizer:
        p.add_argument("--seed", type=int, default=0, help="optimizer seed (default: 0)")
        p.add_argument("--threads", type=_positive_int, default=None,
                       help=f"worker processes (default: ${THREADS_ENV} or all cores)")
    p.add_argument("--format", choices=fmt_choices, default=default_fmt,
                   help=f"output format (default: {default_fmt})")
    p.add_argument("--out", default=None, help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvsteering",
        description="EPR steering and Bell-CHSH tests for two-mode continuous-variable states.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    state_help = "lg:n=<int>,m=<int> | tmsv:r=<float> | sub:r=<float>,order=<1|2>,k=<0|1> | noon:N=<int>"

    p = sub.add_parser("analyze", help="run criteria on one state")
    p.add_argument("state", type=_state, help=state_help)
    p.add_argument("--criteria", type=_criteria, default=CRITERIA,
                   help="comma-separated subset of reid,entropic,bell (default: all)")
    _common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("table", help="comparison tables")
    p.add_argument("which", choices=sorted(TABLES))
    _common(p, default_fmt="csv")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("figure", help="figure data as CSV")
    p.add_argument("which", choices=sorted(FIGURES))
    _common(p, fmt_choices=("csv",), default_fmt="csv")
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("bell-opt", help="maximize the Bell-CHSH sum")
    p.add_argument("state", type=_state, help=state_help)
    p.add_argument("--free-r", action="store_true", help="also optimize the squeezing")
    p.add_argument("--complex", action="store_true", help="search complex displacements")
    p.add_argument("--starts", type=_positive_int, default=N_STARTS,
                   help=f"number of local searches (default: {N_STARTS})")
    p.add_argument("--trace", default=None, help="write the winning start's history as CSV")
    _common(p, grid=False)
    p.set_defaults(func=cmd_bell_opt)

    p = sub.add_parser("version", help="print the version")
    p.set_defaults(func=cmd_version)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (SteeringError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
