"""Verification studies: self-convergence, structure monitoring, scaling.

With no analytic solution available, convergence is measured in the Cauchy
sense: runs at successively refined time steps (or grids) are compared on a
probe slice — a field restricted to the line y = 0 (and z = 0 in 3-D) — and
the maximum-norm differences between consecutive levels must shrink, with
observed order log2(diff_k / diff_{k+1}).  Spatial levels compare values on
the shared nodes of the coarsest grid (nodes coincide when N doubles).

:func:`structure_monitor_report` re-checks a finished run's monitor series
against the maximum-bound-principle and bound invariants (slack 1e-12) and
reports violations rather than raising, so corrupted fixtures can be graded.

:func:`perf_scaling` times stepping at increasing N and reports per-step
medians and doubling ratios against the N^dim log N cost model.

CSV formats: studies are written as ``level,refined_value,diff_to_next,
observed_order``; probe slices as ``x,value``.
"""
from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from statistics import median
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigurationError
from .grid import GridSpec
from .model import ModelParams, SimState, psi_from_phi_sigma
from .scenarios import RunReport, Scenario, initial_state, make_scenario, run
from .stepper import INVARIANT_SLACK, StepConfig, Stepper

Array = NDArray[np.float64]

__all__ = [
    "PROBE_FIELDS",
    "ConvergenceStudy",
    "StructureReport",
    "probe_slice",
    "temporal_convergence",
    "spatial_convergence",
    "structure_monitor_report",
    "perf_scaling",
    "write_study_csv",
    "write_probe_csv",
]

PROBE_FIELDS = ("phi_T", "phi_N", "phi_V", "phi_sigma", "psi_sigma", "phi_M", "theta")


def _probe_array(state: SimState, params: ModelParams, field: str) -> Array:
    if field == "psi_sigma":
        return psi_from_phi_sigma(state.phi_sigma, params.phi_sigma0_max)
    if field == "phi_V":
        return state.phi_V()
    try:
        return getattr(state, field)
    except AttributeError:
        raise ConfigurationError(
            f"unknown probe field {field!r}; expected one of {PROBE_FIELDS}") from None


def probe_slice(grid: GridSpec, state: SimState, params: ModelParams,
                field: str = "phi_T") -> tuple[Array, Array]:
    """Field values along the x-axis line through y = 0 (z = 0 in 3-D).

    Returns ``(x, values)``.  Requires even N so the line passes through
    nodes.
    """
    if grid.n % 2 != 0:
        raise ConfigurationError(
            f"probe slices need a node at 0, i.e. even N; got N = {grid.n}")
    arr = _probe_array(state, params, field)
    mid = grid.n // 2
    idx: tuple = (mid,) * (grid.dim - 1) + (slice(None),)
    return grid.axis_coords(), np.array(arr[idx], dtype=np.float64)


@dataclass
class ConvergenceStudy:
    """Per-level probe slices plus successive difference norms and orders."""

    mode: str                       # "temporal" | "spatial"
    probe_field: str
    levels: list[float]             # refined quantity per level (tau or N)
    coords: list[Array]             # probe x-coordinates per level
    slices: list[Array]             # probe values per level
    diffs: list[float]              # max-norm difference level k vs k+1
    orders: list[float]             # log2(diffs[k] / diffs[k+1])


def _run_probe(args: tuple[Scenario, str]) -> tuple[Array, Array]:
    sc, probe_field = args
    report = run(sc, out_dir=None)
    return probe_slice(sc.grid, report.final_state, sc.params, probe_field)


def _finish_study(mode: str, probe_field: str, levels: list[float],
                  results: list[tuple[Array, Array]]) -> ConvergenceStudy:
    coords = [c for c, _ in results]
    slices = [v for _, v in results]
    # Compare on the shared nodes of the coarsest level (exact for doubled N).
    base = coords[0]
    aligned = []
    for c, v in results:
        stride = (len(c) - 1) // (len(base) - 1)
        if len(base) + (stride - 1) * (len(base) - 1) != len(c) or \
                not np.allclose(c[::stride], base, atol=1e-12):
            raise ConfigurationError(
                "probe coordinates of refinement levels do not nest")
        aligned.append(v[::stride])
    diffs = [float(np.max(np.abs(aligned[k] - aligned[k + 1])))
             for k in range(len(aligned) - 1)]
    orders = []
    for k in range(len(diffs) - 1):
        if diffs[k] > 0.0 and diffs[k + 1] > 0.0:
            orders.append(float(np.log2(diffs[k] / diffs[k + 1])))
        else:
            orders.append(float("nan"))
    return ConvergenceStudy(mode=mode, probe_field=probe_field, levels=levels,
                            coords=coords, slices=slices, diffs=diffs,
                            orders=orders)


def _run_levels(scenarios: list[Scenario], probe_field: str,
                jobs: int) -> list[tuple[Array, Array]]:
    args = [(sc, probe_field) for sc in scenarios]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_probe, args))
    return [_run_probe(a) for a in args]


def temporal_convergence(sc: Scenario, base_tau: float, levels: int,
                         *, probe_field: str = "psi_sigma",
                         taus: Optional[Sequence[float]] = None,
                         jobs: int = 1) -> ConvergenceStudy:
    """Cauchy refinement in time: tau, tau/2, ... at fixed grid."""
    if taus is None:
        if levels < 2:
            raise ConfigurationError(f"need at least 2 levels, got {levels}")
        taus = [base_tau / 2.0**k for k in range(levels)]
    taus = [float(t) for t in taus]
    scenarios = [replace(sc, tau=t, snapshot_times=()) for t in taus]
    for level_sc in scenarios:
        StepConfig(level_sc.tau, level_sc.scheme,
                   level_sc.nutrient_right_edge_source).validate(level_sc.params)
    results = _run_levels(scenarios, probe_field, jobs)
    return _finish_study("temporal", probe_field, taus, results)


def spatial_convergence(sc: Scenario, ns: Sequence[int], tau: float,
                        *, probe_field: str = "phi_sigma",
                        jobs: int = 1) -> ConvergenceStudy:
    """Cauchy refinement in space at fixed (small) tau.

    Levels must be strictly increasing and each a multiple of the coarsest N
    so probe nodes nest.
    """
    ns = [int(n) for n in ns]
    if len(ns) < 2 or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ConfigurationError(f"need strictly increasing grid levels, got {ns}")
    if any(n % ns[0] != 0 for n in ns):
        raise ConfigurationError(
            f"grid levels {ns} must be multiples of the coarsest for shared nodes")
    scenarios = [replace(sc, grid=GridSpec(sc.grid.dim, n), tau=float(tau),
                         snapshot_times=()) for n in ns]
    results = _run_levels(scenarios, probe_field, jobs)
    return _finish_study("spatial", probe_field, [float(n) for n in ns], results)


@dataclass
class StructureReport:
    """Verdict of the invariant checks over a run's monitor series."""

    passed: bool
    failures: list[dict]
    series: dict[str, Array]


_SERIES_CHECKS = (
    # (series key, kind, bound)
    ("psi_sigma_norm", "upper", 1.0),
    ("psi_M_norm", "upper", 1.0),
    ("phiT_max", "upper", 1.0),
    ("phiT_min", "lower", 0.0),
    ("phiN_max", "upper", 1.0),
    ("phiN_min", "lower", 0.0),
    ("theta_min", "lower", 0.0),
)


def structure_monitor_report(report: RunReport,
                             out_dir: Path | str | None = None,
                             slack: float = INVARIANT_SLACK) -> StructureReport:
    """Grade a run's monitor series against the structure invariants.

    Reports violations (with their step index) instead of raising.  When
    ``out_dir`` is given, writes the per-step series CSV and a verdict JSON.
    """
    series = report.monitors
    if "step" not in series or len(series["step"]) == 0:
        raise ConfigurationError("run has no monitor series (monitors disabled?)")
    failures: list[dict] = []

    def flag(key: str, step: int, value: float, bound: float) -> None:
        failures.append({"check": key, "step": int(step),
                         "value": float(value), "bound": float(bound)})

    steps = series["step"]
    for key, kind, bound in _SERIES_CHECKS:
        values = series[key]
        if kind == "upper":
            exceed = values > bound + slack
        else:
            exceed = values < bound - slack
        for i in np.flatnonzero(exceed):
            flag(key, steps[i], values[i], bound)
    for i in range(1, len(steps)):
        if series["theta_min"][i] > series["theta_min"][i - 1] + slack:
            flag("theta_min_nonincreasing", steps[i], series["theta_min"][i],
                 series["theta_min"][i - 1])
        if series["phiN_max"][i] < series["phiN_max"][i - 1] - slack:
            flag("phiN_max_nondecreasing", steps[i], series["phiN_max"][i],
                 series["phiN_max"][i - 1])

    result = StructureReport(passed=not failures, failures=failures, series=series)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with (out_dir / "structure_report.csv").open("w", newline="") as fh:
            writer = csv.writer(fh)
            columns = ("step", "psi_sigma_norm", "psi_M_norm", "phiT_max",
                       "phiT_min", "phiN_max", "theta_min")
            writer.writerow(columns)
            for i in range(len(steps)):
                writer.writerow([int(steps[i])] +
                                [repr(float(series[c][i])) for c in columns[1:]])
        (out_dir / "structure_verdict.json").write_text(json.dumps(
            {"passed": result.passed, "failures": result.failures},
            sort_keys=True, indent=1) + "\n")
    return result


@dataclass
class PerfRow:
    n: int
    per_step_s: float
    ratio_to_prev: float


def perf_scaling(dim: int, ns: Sequence[int], *, steps_per_batch: int = 10,
                 batches: int = 5, tau: float = 1e-3) -> list[PerfRow]:
    """Median per-step wall time at each N plus doubling ratios.

    Uses the baseline model on the standard initial data of the dimension
    (radial bump in 2-D, two-bump in 3-D); a couple of warmup steps populate
    caches before timing.
    """
    rows: list[PerfRow] = []
    prev: Optional[float] = None
    for n in ns:
        sc = make_scenario(
            name=f"perf_{dim}d_n{n}",
            grid=GridSpec(dim, int(n)),
            initial="two_tumors_3d" if dim == 3 else "gaussian_ring",
            t_final=0.0, tau=tau, monitors=False,
        )
        stepper = Stepper(sc.grid, sc.params, StepConfig(sc.tau, sc.scheme))
        state = initial_state(sc)
        for _ in range(2):
            state = stepper.step(state)
        samples = []
        for _ in range(batches):
            t0 = time.perf_counter()
            for _ in range(steps_per_batch):
                state = stepper.step(state)
            samples.append((time.perf_counter() - t0) / steps_per_batch)
        per_step = median(samples)
        rows.append(PerfRow(n=int(n), per_step_s=per_step,
                            ratio_to_prev=per_step / prev if prev else float("nan")))
        prev = per_step
    return rows


def write_study_csv(study: ConvergenceStudy, path: Path | str) -> Path:
    """Study summary: ``level,refined_value,diff_to_next,observed_order``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("level", "refined_value", "diff_to_next", "observed_order"))
        for k, value in enumerate(study.levels):
            diff = repr(study.diffs[k]) if k < len(study.diffs) else ""
            order = repr(study.orders[k]) if k < len(study.orders) else ""
            writer.writerow([k, repr(float(value)), diff, order])
    return path


def write_probe_csv(coords: Array, values: Array, path: Path | str) -> Path:
    """Probe slice as two columns ``x,value``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("x", "value"))
        for x, v in zip(coords, values):
            writer.writerow([repr(float(x)), repr(float(v))])
    return path
