"""Command-line entry point: run scenarios, drive studies, grade invariants.

Subcommands
-----------
``run``       step a configured scenario, writing snapshots, the monitor
              CSV, a run summary JSON, and the effective (post-override)
              config for exact reruns.
``converge``  temporal (``time``) or spatial (``space``) self-convergence
              study with per-level probe CSVs.
``check``     run with monitors and grade the structure invariants; exit 0
              only on a clean verdict.

Configuration is TOML with a ``[scenario]`` table (grid, times, scheme,
initial data tag, preset name) and an optional ``[params]`` table of model
parameter overrides.  ``--set key=value`` (repeatable) overrides single
entries; bare keys address the scenario table, dotted keys
(``params.chi_H``) any table.

Exit codes: 0 success, 2 configuration/usage error, 3 structure-invariant
breach, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - version-dependent import
    import tomli as tomllib

from .errors import ConfigurationError, NumericalFailure, StructureViolation
from .grid import GridSpec
from .harness import (spatial_convergence, structure_monitor_report,
                      temporal_convergence, write_probe_csv, write_study_csv)
from .scenarios import MONITOR_CSV_COLUMNS, Scenario, make_scenario, run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STRUCTURE = 3
EXIT_NUMERICAL = 4

_SCENARIO_KEYS = {
    "name", "preset", "dim", "n", "tau", "t_final", "scheme", "initial",
    "initial_options", "snapshot_times", "nutrient_right_edge_source",
    "monitors",
}
_REQUIRED_SCENARIO_KEYS = ("n", "tau", "t_final")


def _parse_set_value(raw: str):
    """Parse an override value as a TOML literal, falling back to a string."""
    try:
        return tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        return raw


def apply_overrides(config: dict, sets: Sequence[str]) -> dict:
    """Apply ``--set key=value`` items; bare keys address the scenario table."""
    for item in sets:
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigurationError(f"--set expects key=value, got {item!r}")
        path = key.split(".")
        if len(path) == 1:
            path = ["scenario"] + path
        node = config
        for part in path[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigurationError(f"--set key {key!r} traverses a non-table")
        node[path[-1]] = _parse_set_value(raw)
    return config


def load_config(path: Path | str) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigurationError(f"cannot read config {path}: {err}") from err
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as err:
        raise ConfigurationError(f"config {path} is not valid TOML: {err}") from err


def scenario_from_config(config: dict, *, default_name: str,
                         scheme_override: Optional[str] = None) -> Scenario:
    """Validate the config dict and resolve it into a Scenario.

    Every error names the offending key; no simulation-sized arrays are
    allocated here.
    """
    table = config.get("scenario")
    if not isinstance(table, dict):
        raise ConfigurationError("config is missing the [scenario] table")
    unknown = sorted(set(table) - _SCENARIO_KEYS)
    if unknown:
        raise ConfigurationError(f"unknown scenario key(s): {', '.join(unknown)}")
    for key in _REQUIRED_SCENARIO_KEYS:
        if key not in table:
            raise ConfigurationError(f"missing required key scenario.{key}")
    params_table = config.get("params", {})
    if not isinstance(params_table, dict):
        raise ConfigurationError("[params] must be a table of parameter overrides")
    initial_options = table.get("initial_options", {})
    if not isinstance(initial_options, dict):
        raise ConfigurationError("scenario.initial_options must be a table")
    snapshot_times = table.get("snapshot_times", [])
    if not isinstance(snapshot_times, (list, tuple)):
        raise ConfigurationError("scenario.snapshot_times must be an array of reals")
    try:
        grid = GridSpec(dim=int(table.get("dim", 2)), n=int(table["n"]))
    except (TypeError, ValueError) as err:
        raise ConfigurationError(f"scenario.dim / scenario.n invalid: {err}") from err
    return make_scenario(
        name=str(table.get("name", default_name)),
        grid=grid,
        preset_name=str(table.get("preset", "baseline")),
        param_overrides=params_table,
        initial=str(table.get("initial", "gaussian_ring")),
        initial_options=initial_options,
        t_final=float(table["t_final"]),
        tau=float(table["tau"]),
        scheme=str(scheme_override or table.get("scheme", "etdrk2")),
        snapshot_times=[float(t) for t in snapshot_times],
        nutrient_right_edge_source=bool(table.get("nutrient_right_edge_source", False)),
        monitors=bool(table.get("monitors", True)),
    )


def _toml_literal(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_literal(v) for v in value) + "]"
    raise ConfigurationError(f"cannot serialize config value {value!r}")


def write_effective_config(config: dict, path: Path) -> None:
    """Emit the post-override config so a rerun reproduces this one exactly."""
    lines: list[str] = []
    for section in ("scenario", "params"):
        table = config.get(section)
        if not isinstance(table, dict):
            continue
        subtables = {k: v for k, v in table.items() if isinstance(v, dict)}
        lines.append(f"[{section}]")
        for key, value in table.items():
            if key not in subtables:
                lines.append(f"{key} = {_toml_literal(value)}")
        for sub, subtable in subtables.items():
            lines.append(f"[{section}.{sub}]")
            for key, value in subtable.items():
                lines.append(f"{key} = {_toml_literal(value)}")
        lines.append("")
    path.write_text("\n".join(lines))


def _summary_payload(sc: Scenario, report, verdict) -> dict:
    final = {key: float(series[-1]) for key, series in report.monitors.items()
             if key in MONITOR_CSV_COLUMNS}
    return {
        "scenario": sc.name,
        "grid": {"dim": sc.grid.dim, "n": sc.grid.n},
        "tau": sc.tau,
        "scheme": sc.scheme,
        "n_steps": report.n_steps,
        "verdict": {"passed": verdict.passed, "failures": verdict.failures},
        "final": final,
        "timing": {"wall_time_s": report.wall_time_s, **report.timing},
    }


def cmd_run(args) -> int:
    config = apply_overrides(load_config(args.config), args.set or [])
    sc = scenario_from_config(config, default_name=Path(args.config).stem,
                              scheme_override=args.scheme)
    out_dir = Path(args.out) if args.out else Path("runs") / sc.name
    out_dir.mkdir(parents=True, exist_ok=True)
    report = run(sc, out_dir=out_dir)
    verdict = structure_monitor_report(report, out_dir=None)
    write_effective_config(config, out_dir / "effective_config.toml")
    (out_dir / "summary.json").write_text(
        json.dumps(_summary_payload(sc, report, verdict), sort_keys=True,
                   indent=1) + "\n")
    if not verdict.passed:
        print(f"structure invariants breached: {verdict.failures[:3]} ...",
              file=sys.stderr)
        return EXIT_STRUCTURE
    print(f"run {sc.name}: {report.n_steps} steps to t = {sc.t_final:g}, "
          f"outputs in {out_dir}")
    return EXIT_OK


def _default_converge_config(mode: str) -> dict:
    n = 128 if mode == "time" else 32
    return {"scenario": {"name": f"converge_{mode}", "dim": 2, "n": n,
                         "tau": 2e-3 if mode == "time" else 1e-4,
                         "t_final": 1.0 if mode == "time" else 0.5,
                         "initial": "gaussian_ring"}}


def cmd_converge(args) -> int:
    if args.mode not in ("time", "space"):
        raise ConfigurationError(
            f"converge mode must be 'time' or 'space', got {args.mode!r}")
    if args.config:
        config = load_config(args.config)
        default_name = Path(args.config).stem
    else:
        config = _default_converge_config(args.mode)
        default_name = config["scenario"]["name"]
    config = apply_overrides(config, args.set or [])
    sc = scenario_from_config(config, default_name=default_name,
                              scheme_override=args.scheme)
    out_dir = Path(args.out) if args.out else Path("runs") / f"{sc.name}_{args.mode}"
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.mode == "time":
        study = temporal_convergence(sc, base_tau=args.base_tau or sc.tau,
                                     levels=args.levels,
                                     probe_field=args.probe, jobs=args.jobs)
        csv_path = out_dir / "temporal_study.csv"
    else:
        try:
            ns = [int(v) for v in args.Ns.split(",")]
        except ValueError as err:
            raise ConfigurationError(f"--Ns must be comma-separated integers: {err}") \
                from err
        study = spatial_convergence(sc, ns=ns, tau=args.tau,
                                    probe_field=args.probe, jobs=args.jobs)
        csv_path = out_dir / "spatial_study.csv"
    write_study_csv(study, csv_path)
    for k, (coords, values) in enumerate(zip(study.coords, study.slices)):
        write_probe_csv(coords, values, out_dir / f"probe_level{k}.csv")
    diffs = ", ".join(f"{d:.3e}" for d in study.diffs)
    orders = ", ".join(f"{o:.2f}" for o in study.orders)
    print(f"{study.mode} study ({study.probe_field} probe): diffs [{diffs}], "
          f"orders [{orders}], CSV in {out_dir}")
    return EXIT_OK


def cmd_check(args) -> int:
    config = apply_overrides(load_config(args.config), args.set or [])
    sc = scenario_from_config(config, default_name=Path(args.config).stem,
                              scheme_override=args.scheme)
    out_dir = Path(args.out) if args.out else Path("runs") / f"{sc.name}_check"
    out_dir.mkdir(parents=True, exist_ok=True)
    report = run(sc, out_dir=out_dir)
    verdict = structure_monitor_report(report, out_dir=out_dir)
    status = "pass" if verdict.passed else "FAIL"
    print(f"structure check {sc.name}: {status} "
          f"({len(verdict.failures)} violation(s)), report in {out_dir}")
    return EXIT_OK if verdict.passed else EXIT_STRUCTURE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tumoretd",
        description="Structure-preserving exponential integrator for a "
                    "five-field tumor growth model.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, config_required: bool) -> None:
        p.add_argument("--config", required=config_required,
                       help="TOML scenario configuration")
        p.add_argument("--out", help="output directory")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config entry (repeatable)")
        p.add_argument("--scheme", choices=("etd1", "etdrk2"),
                       help="override the time integrator")
        p.add_argument("--jobs", type=int, default=1,
                       help="parallel workers for study levels")

    p_run = sub.add_parser("run", help="run one scenario")
    common(p_run, config_required=True)
    p_run.set_defaults(func=cmd_run)

    p_conv = sub.add_parser("converge", help="self-convergence study")
    p_conv.add_argument("mode", help="'time' or 'space'")
    common(p_conv, config_required=False)
    p_conv.add_argument("--levels", type=int, default=4,
                        help="number of halved time steps (time mode)")
    p_conv.add_argument("--base-tau", dest="base_tau", type=float,
                        help="coarsest time step (time mode; default scenario tau)")
    p_conv.add_argument("--Ns", default="32,64,128",
                        help="comma-separated grid sizes (space mode)")
    p_conv.add_argument("--tau", type=float, default=1e-4,
                        help="fixed time step (space mode)")
    p_conv.add_argument("--probe", default=None,
                        help="probe field (default psi_sigma / phi_sigma)")
    p_conv.set_defaults(func=cmd_converge)

    p_check = sub.add_parser("check", help="grade structure invariants")
    common(p_check, config_required=True)
    p_check.set_defaults(func=cmd_check)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_err:
        return EXIT_CONFIG if exit_err.code not in (0, None) else EXIT_OK
    if getattr(args, "probe", None) is None and args.command == "converge":
        args.probe = "psi_sigma" if args.mode == "time" else "phi_sigma"
    try:
        return args.func(args)
    except ConfigurationError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except StructureViolation as err:
        print(f"structure-preservation failure: {err}", file=sys.stderr)
        return EXIT_STRUCTURE
    except NumericalFailure as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
