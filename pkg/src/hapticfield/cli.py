"""Command-line driver for replays, benchmarks, pyramids, and the service.

Failure lines are machine-readable (one `FAIL kind=... detail=...` line on
stdout, nonzero exit); success prints a short human summary and exits 0.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .errors import HapticFieldError
from .harness import benchmark_latency, check_phases, run_trajectory
from .io import (
    fill_holes,
    load_depth_grid,
    load_trajectory,
    read_force_trace,
    save_depth_grid,
    write_force_trace,
)
from .pyramid import build_pyramid
from .renderer import RenderParams
from .workspace import RoiSelection, select_roi, to_workspace_field


def _params_from(args) -> RenderParams:
    p = RenderParams()
    if args.k is not None:
        p = replace(p, stiffness_k=args.k)
    if args.delta_n is not None:
        p = replace(p, delta_n=args.delta_n)
    return p


def _load_field(args):
    field = fill_holes(load_depth_grid(args.field))
    if args.level is None and args.window is None:
        return field
    level = args.level if args.level is not None else 0
    pyr = build_pyramid(field, level + 1)
    grid = pyr.levels[level]
    if args.window is not None:
        x, y, w, h = args.window
        sel = RoiSelection(level=level, x=x, y=y, w=w, h=h)
    else:
        sel = RoiSelection(level=level, x=0, y=0, w=grid.width, h=grid.height)
    sub, mapping = select_roi(pyr, sel)
    return to_workspace_field(sub, mapping)


def _cmd_run(args) -> int:
    field = _load_field(args)
    traj = load_trajectory(args.trajectory)
    params = _params_from(args)
    if args.timing:
        # measured tick durations make the file non-reproducible; keep the
        # default replay byte-identical between runs
        from .harness import _drive
        from .io import ForceTrace

        durations: list[float] = []
        samples = _drive(field, traj, params, durations=durations)
        samples = [replace(s, tick_us=d) for s, d in zip(samples, durations)]
        trace = ForceTrace(samples=tuple(samples))
    else:
        trace = run_trajectory(field, traj, params)
    write_force_trace(trace, args.out)
    contact = sum(1 for s in trace.samples if s.in_contact)
    print(f"wrote {args.out}: {len(trace)} ticks, {contact} in contact")
    return 0


def _cmd_bench(args) -> int:
    field = _load_field(args)
    traj = load_trajectory(args.trajectory)
    stats = benchmark_latency(field, traj, _params_from(args), repeats=args.repeats)
    print(json.dumps(stats.as_dict()))
    if args.out:
        Path(args.out).write_text(json.dumps(stats.as_dict(), indent=2) + "\n")
    if stats.overrun_count:
        print(f"FAIL kind=latency detail=overruns:{stats.overrun_count}")
        return 2
    return 0


def _cmd_pyramid(args) -> int:
    field = fill_holes(load_depth_grid(args.field))
    pyr = build_pyramid(field, args.levels)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for l, grid in enumerate(pyr.levels):
        path = out_dir / f"level_{l}.mhdf"
        save_depth_grid(grid, path)
        print(f"level {l}: {grid.width}x{grid.height} spacing {grid.spacing} -> {path}")
    return 0


def _cmd_check_phases(args) -> int:
    trace = read_force_trace(args.trace)
    params = RenderParams()
    if args.delta_n is not None:
        params = replace(params, delta_n=args.delta_n)
    report = check_phases(trace, params)
    if report.passed:
        print(
            f"phases ok: free={report.free} contact={report.contact} "
            f"hold={report.hold} settle={report.settle_ticks}"
        )
        return 0
    for failure in report.failures:
        print(f"FAIL kind=phase detail={failure!r}")
    return 2


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(asset_dir=args.assets, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _add_field_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--field", required=True, help="depth grid (.mhdf or .csv)")
    p.add_argument("--k", type=float, default=None, help="stiffness in N/mm")
    p.add_argument("--delta-n", dest="delta_n", type=float, default=None,
                   help="proxy step length in mm")
    p.add_argument("--level", type=int, default=None, help="pyramid level to load")
    p.add_argument("--window", type=lambda s: tuple(int(v) for v in s.split(",")),
                   default=None, metavar="X,Y,W,H",
                   help="ROI window in level node coordinates")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hapticfield")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="replay a trajectory and write the force trace")
    _add_field_args(p)
    p.add_argument("--trajectory", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--timing", action="store_true",
                   help="record measured tick durations (non-reproducible output)")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("bench", help="benchmark per-tick latency")
    _add_field_args(p)
    p.add_argument("--trajectory", required=True)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--out", default=None, help="write stats JSON here too")
    p.set_defaults(fn=_cmd_bench)

    p = sub.add_parser("pyramid", help="build and save a depth pyramid")
    p.add_argument("--field", required=True)
    p.add_argument("--levels", type=int, required=True)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.set_defaults(fn=_cmd_pyramid)

    p = sub.add_parser("check-phases", help="verify the force/time phase structure")
    p.add_argument("--trace", required=True)
    p.add_argument("--delta-n", dest="delta_n", type=float, default=None)
    p.set_defaults(fn=_cmd_check_phases)

    p = sub.add_parser("serve", help="run the live session service")
    p.add_argument("--assets", default=None, help="directory of grids to serve")
    p.add_argument("--static", default=None, help="directory with the explorer UI build")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8077)
    p.set_defaults(fn=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except HapticFieldError as exc:
        print(f"FAIL kind=input detail={exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
