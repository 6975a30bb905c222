"""Command line: render figures from a simulation run directory.

    viz fields   --in RUN_DIR --out FIG_DIR [--fields a,b,c] [--times t1,t2]
    viz monitors --in RUN_DIR --out FIG_DIR [--theta0 X]
    viz iso      --in RUN_DIR --out FIG_DIR [--level 0.8] [--field phi_T]

Every snapshot in the input directory is integrity-checked (raw bytes versus
sidecar) before anything is drawn.  Exit codes: 0 success, 1 bad inputs or
nothing to render, 2 usage errors.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

from .fields import plot_fields
from .io import SnapshotIntegrityError, verify_directory
from .iso import DEFAULT_LEVEL, plot_isosurface
from .monitors import EmptySeriesError, MonitorParseError, plot_monitors

__all__ = ["main"]


def cmd_fields(args: argparse.Namespace) -> int:
    handles = [h for h in verify_directory(args.in_dir) if h.dim == 2]
    if not handles:
        print(f"error: no 2-D snapshots in {args.in_dir}", file=sys.stderr)
        return 1
    fields = [f.strip() for f in args.fields.split(",") if f.strip()]
    if args.times is None:
        times = sorted({h.t for h in handles})
    else:
        times = [float(s) for s in args.times.split(",") if s.strip()]
    out_dir = Path(args.out_dir)
    wrote_any = False
    for scenario in sorted({h.scenario for h in handles}):
        group = [h for h in handles if h.scenario == scenario]
        out_path = out_dir / f"{scenario}_fields.png"
        written, missing = plot_fields(group, fields, times, out_path,
                                       theta0=args.theta0)
        if missing:
            print(f"{scenario}: figure skipped, missing snapshots:")
            for field, t in missing:
                print(f"  {field} at t = {t:g}")
        else:
            print(f"wrote {written}")
            wrote_any = True
    return 0 if wrote_any else 1


def cmd_monitors(args: argparse.Namespace) -> int:
    csv_paths = sorted(Path(args.in_dir).glob("*_monitors.csv"))
    if not csv_paths:
        print(f"error: no *_monitors.csv in {args.in_dir}", file=sys.stderr)
        return 1
    for csv_path in csv_paths:
        for path in plot_monitors(csv_path, args.out_dir, theta0=args.theta0):
            print(f"wrote {path}")
    return 0


def cmd_iso(args: argparse.Namespace) -> int:
    handles = [h for h in verify_directory(args.in_dir)
               if h.dim == 3 and h.field == args.field]
    if not handles:
        print(f"error: no 3-D snapshots of {args.field} in {args.in_dir}",
              file=sys.stderr)
        return 1
    out_dir = Path(args.out_dir)
    for handle in handles:
        out_path = out_dir / (f"{handle.scenario}_{handle.field}"
                              f"_t{handle.t:g}_iso.png")
        result = plot_isosurface(handle, out_path, level=args.level)
        if result.out_path is None:
            print(f"skipped {handle.raw_path.name}: {result.warning}")
        else:
            print(f"wrote {result.out_path} "
                  f"({result.n_components} component(s) "
                  f"at level {args.level:g})")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="viz",
        description="Render figures from a simulation run directory.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--in", dest="in_dir", required=True,
                       help="run directory with snapshots / monitor CSVs")
        p.add_argument("--out", dest="out_dir", required=True,
                       help="directory for the rendered images")

    p_fields = sub.add_parser("fields", help="heatmap panel grid per field")
    add_common(p_fields)
    p_fields.add_argument("--fields", default="phi_T,phi_N,phi_V",
                          help="comma-separated field names (rows)")
    p_fields.add_argument("--times", default=None,
                          help="comma-separated times (columns); "
                               "default: every snapshot time present")
    p_fields.add_argument("--theta0", type=float, default=1.0,
                          help="matrix-density color-scale upper bound")
    p_fields.set_defaults(func=cmd_fields)

    p_mon = sub.add_parser("monitors", help="bound time-series figures")
    add_common(p_mon)
    p_mon.add_argument("--theta0", type=float, default=1.0,
                       help="matrix-density reference line")
    p_mon.set_defaults(func=cmd_monitors)

    p_iso = sub.add_parser("iso", help="3-D isosurface image")
    add_common(p_iso)
    p_iso.add_argument("--level", type=float, default=DEFAULT_LEVEL,
                       help="isosurface level")
    p_iso.add_argument("--field", default="phi_T",
                       help="field to extract the surface from")
    p_iso.set_defaults(func=cmd_iso)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SnapshotIntegrityError, MonitorParseError, EmptySeriesError,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
