"""Initial conditions, named parameter presets, and the simulation run loop.

Initial data: a compactly supported exponential bump for the tumor, a matrix
density that is either a smooth ring hugging the tumor interface, a
two-valued split field, or (in 3-D) the ring formula applied to a two-bump
tumor; the nutrient starts uniformly at 1, the necrotic and enzyme fields at
zero.  Builders are deterministic and resolution-consistent: a shared node
of two grids receives identical values.

:func:`run` steps a scenario to its final time, records a per-step monitor
series (field extrema, psi norms, tumor mass, center of mass), and writes
snapshots at requested times.

External formats
----------------
* Snapshot: raw little-endian float64 array per field per time, C-order with
  x fastest (axis order ``yx`` / ``zyx``), plus a JSON sidecar
  ``{scenario, field, t, dim, N, axis_order, min, max}``.
* Monitor series: CSV with header
  ``step,t,phiT_max,phiT_min,phiN_max,theta_min,psi_sigma_norm,psi_M_norm,com_x``.
"""
from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field, fields as dataclass_fields, replace
from pathlib import Path
from typing import Callable, Iterable, Optional

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigurationError, NumericalFailure, StructureViolation
from .grid import GridSpec, quadrature_weights
from .model import ModelParams, SimState, cutoff, psi_from_phi_sigma
from .stepper import StepConfig, Stepper

Array = NDArray[np.float64]

__all__ = [
    "PRESETS",
    "INITIAL_TAGS",
    "MONITOR_CSV_COLUMNS",
    "SNAPSHOT_FIELDS",
    "Scenario",
    "RunReport",
    "ic_gaussian_tumor",
    "ic_ecm_ring",
    "ic_ecm_halves",
    "ic_3d_two_tumors",
    "preset",
    "make_scenario",
    "initial_state",
    "run",
    "write_snapshot",
    "read_snapshot",
    "write_monitor_csv",
]

#: Named parameter presets: overrides applied on top of the baseline defaults.
PRESETS: dict[str, dict[str, float]] = {
    "baseline": {},
    "aggressive": {"lambda_T_pro": 2.5, "lambda_T_apo": 0.001},
    "high_mde": {"lambda_M_pro": 1.5, "lambda_M_dec": 0.5},
    "low_mde": {"lambda_M_pro": 0.5, "lambda_M_dec": 1.5},
    "high_haptotaxis": {"chi_H": 0.002},
    "low_haptotaxis": {"chi_H": 0.0005},
}

MONITOR_CSV_COLUMNS = ("step", "t", "phiT_max", "phiT_min", "phiN_max",
                       "theta_min", "psi_sigma_norm", "psi_M_norm", "com_x")

SNAPSHOT_FIELDS = ("phi_T", "phi_N", "phi_V", "phi_sigma", "phi_M", "theta")

_AXIS_ORDER = {2: "yx", 3: "zyx"}


def _bump(scaled_r2: Array) -> Array:
    """exp(1 - 1/(1 - s)) where s < 1, extended continuously by 0 outside."""
    out = np.zeros(scaled_r2.shape, dtype=np.float64)
    inside = scaled_r2 < 1.0
    s = scaled_r2[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s))
    return out


def ic_gaussian_tumor(grid: GridSpec) -> Array:
    """Radial bump exp(1 - 1/(1 - 16 r^2)) supported on r < 1/4 (2-D)."""
    if grid.dim != 2:
        raise ConfigurationError("ic_gaussian_tumor requires a 2-D grid")
    x, y = grid.coordinate_fields()
    return _bump(16.0 * (x * x + y * y))


def ic_ecm_ring(phi_T0: Array) -> Array:
    """Matrix ring 1/2 + 1/2 (1 - 2 |phi_T0 - 1/2|): crest 1 on the interface,
    1/2 in the core and the far field."""
    return 0.5 + 0.5 * (1.0 - 2.0 * np.abs(np.asarray(phi_T0) - 0.5))


def ic_ecm_halves(grid: GridSpec, *, axis: str = "x",
                  high_side: str = "negative") -> Array:
    """Two-valued matrix field: 1 on one half of the domain, 1/2 on the other.

    By default the high value sits on x < 0 (nodes with coordinate exactly 0
    belong to the low side).
    """
    names = "xyz"[:grid.dim]
    if axis not in names:
        raise ConfigurationError(f"split axis must be one of {tuple(names)}, got {axis!r}")
    if high_side not in ("negative", "positive"):
        raise ConfigurationError(
            f"high_side must be 'negative' or 'positive', got {high_side!r}")
    coord = grid.coordinate_fields()[names.index(axis)]
    high = coord < 0.0 if high_side == "negative" else coord > 0.0
    return np.where(high, 1.0, 0.5)


def ic_3d_two_tumors(grid: GridSpec) -> Array:
    """Sphere bump at (-0.15, -0.15, 0) plus a rotated ellipsoid bump
    (axis ratio 1.35, rotation pi/4 in the xy-plane) at (0.15, 0.15, 0),
    summed and clamped to at most 1."""
    if grid.dim != 3:
        raise ConfigurationError("ic_3d_two_tumors requires a 3-D grid")
    x, y, z = grid.coordinate_fields()
    ball = _bump(16.0 * ((x + 0.15) ** 2 + (y + 0.15) ** 2 + z * z))
    gamma = np.pi / 4.0
    dx, dy = x - 0.15, y - 0.15
    xr = np.cos(gamma) * dx - np.sin(gamma) * dy
    yr = np.sin(gamma) * dx + np.cos(gamma) * dy
    ellipse = _bump(16.0 * (xr * xr + (yr / 1.35) ** 2 + z * z))
    return np.minimum(ball + ellipse, 1.0)


def _build_gaussian_ring(grid: GridSpec, options: dict) -> tuple[Array, Array, float]:
    phi_T0 = ic_gaussian_tumor(grid)
    return phi_T0, ic_ecm_ring(phi_T0), 1.0


def _build_gaussian_halves(grid: GridSpec, options: dict) -> tuple[Array, Array, float]:
    phi_T0 = ic_gaussian_tumor(grid)
    theta0 = ic_ecm_halves(grid, axis=options.get("axis", "x"),
                           high_side=options.get("high_side", "negative"))
    return phi_T0, theta0, 1.0


def _build_two_tumors_3d(grid: GridSpec, options: dict) -> tuple[Array, Array, float]:
    phi_T0 = ic_3d_two_tumors(grid)
    return phi_T0, ic_ecm_ring(phi_T0), 1.0


def _build_empty(grid: GridSpec, options: dict) -> tuple[Array, Array, float]:
    phi_T0 = np.zeros(grid.shape, dtype=np.float64)
    return phi_T0, ic_ecm_ring(phi_T0), 0.5


#: Initial-condition builders: tag -> (phi_T0, theta0, analytic sup of theta0).
INITIAL_TAGS: dict[str, Callable[[GridSpec, dict], tuple[Array, Array, float]]] = {
    "gaussian_ring": _build_gaussian_ring,
    "gaussian_halves": _build_gaussian_halves,
    "two_tumors_3d": _build_two_tumors_3d,
    "empty": _build_empty,
}


def preset(name: str, **extra) -> ModelParams:
    """Named parameter set; ``extra`` keyword overrides win over the preset."""
    if name not in PRESETS:
        raise ConfigurationError(
            f"unknown preset {name!r}; expected one of {sorted(PRESETS)}")
    kwargs = dict(PRESETS[name])
    kwargs.update(extra)
    valid = {f.name for f in dataclass_fields(ModelParams)}
    unknown = sorted(set(kwargs) - valid)
    if unknown:
        raise ConfigurationError(f"unknown parameter key(s): {', '.join(unknown)}")
    return ModelParams(**kwargs)


@dataclass(frozen=True)
class Scenario:
    """A fully resolved experiment: grid, parameters, initial data recipe,
    and stepping plan."""

    name: str
    grid: GridSpec
    params: ModelParams
    initial: str
    t_final: float
    tau: float
    scheme: str = "etdrk2"
    snapshot_times: tuple[float, ...] = ()
    nutrient_right_edge_source: bool = False
    monitors: bool = True
    initial_options: dict = field(default_factory=dict)


def _snap_step(t_snap: float, tau: float) -> int:
    return int(round(t_snap / tau))


def validate_scenario(sc: Scenario) -> None:
    if sc.initial not in INITIAL_TAGS:
        raise ConfigurationError(
            f"unknown initial tag {sc.initial!r}; expected one of {sorted(INITIAL_TAGS)}")
    if sc.initial in ("gaussian_ring", "gaussian_halves") and sc.grid.dim != 2:
        raise ConfigurationError(f"initial {sc.initial!r} requires dim = 2")
    if sc.initial == "two_tumors_3d" and sc.grid.dim != 3:
        raise ConfigurationError("initial 'two_tumors_3d' requires dim = 3")
    if not (np.isfinite(sc.t_final) and sc.t_final >= 0.0):
        raise ConfigurationError(f"t_final must be >= 0, got {sc.t_final!r}")
    StepConfig(sc.tau, sc.scheme, sc.nutrient_right_edge_source).validate(sc.params)
    if abs(round(sc.t_final / sc.tau) * sc.tau - sc.t_final) > 0.5 * sc.tau + 1e-12:
        raise ConfigurationError(
            f"tau = {sc.tau!r} does not divide t_final = {sc.t_final!r} "
            "within half-step tolerance")
    for t_snap in sc.snapshot_times:
        if not 0.0 <= t_snap <= sc.t_final + 0.5 * sc.tau:
            raise ConfigurationError(
                f"snapshot time {t_snap!r} outside [0, t_final = {sc.t_final!r}]")
        if abs(_snap_step(t_snap, sc.tau) * sc.tau - t_snap) > 0.5 * sc.tau + 1e-12:
            raise ConfigurationError(
                f"tau = {sc.tau!r} does not divide snapshot time {t_snap!r} "
                "within half-step tolerance")


def make_scenario(
    *,
    name: str,
    grid: GridSpec,
    preset_name: str = "baseline",
    param_overrides: Optional[dict] = None,
    initial: str = "gaussian_ring",
    initial_options: Optional[dict] = None,
    t_final: float,
    tau: float,
    scheme: str = "etdrk2",
    snapshot_times: Iterable[float] = (),
    nutrient_right_edge_source: bool = False,
    monitors: bool = True,
) -> Scenario:
    """Resolve preset + overrides against the configured initial data.

    The stabilization constant kappa_M depends on the maximum of the initial
    matrix field, so parameters are finalized here: the analytic supremum of
    the chosen initial family (1 for the ring and split fields, 1/2 for the
    empty tumor) feeds ``theta0_max``, and the uniform initial nutrient
    fixes ``phi_sigma0_max = 1``.
    """
    if initial not in INITIAL_TAGS:
        raise ConfigurationError(
            f"unknown initial tag {initial!r}; expected one of {sorted(INITIAL_TAGS)}")
    overrides = dict(param_overrides or {})
    for derived in ("phi_sigma0_max", "theta0_max"):
        if derived in overrides:
            raise ConfigurationError(
                f"params.{derived} is derived from the initial data and cannot be set")
    dim = 3 if initial == "two_tumors_3d" else grid.dim
    theta0_sup = INITIAL_TAGS[initial](GridSpec(dim, max(4, min(grid.n, 8))),
                                       dict(initial_options or {}))[2]
    params = preset(preset_name, **overrides,
                    phi_sigma0_max=1.0, theta0_max=theta0_sup)
    sc = Scenario(
        name=name, grid=grid, params=params, initial=initial,
        t_final=float(t_final), tau=float(tau), scheme=scheme,
        snapshot_times=tuple(float(t) for t in snapshot_times),
        nutrient_right_edge_source=bool(nutrient_right_edge_source),
        monitors=bool(monitors), initial_options=dict(initial_options or {}),
    )
    validate_scenario(sc)
    return sc


def initial_state(sc: Scenario) -> SimState:
    """Build the five initial fields: configured tumor/matrix, nutrient
    uniformly at phi_sigma0_max, necrotic and enzyme fractions zero."""
    phi_T0, theta0, _ = INITIAL_TAGS[sc.initial](sc.grid, dict(sc.initial_options))
    zeros = np.zeros(sc.grid.shape, dtype=np.float64)
    return SimState(
        t=0.0,
        phi_T=phi_T0,
        phi_N=zeros.copy(),
        phi_sigma=np.full(sc.grid.shape, sc.params.phi_sigma0_max),
        phi_M=zeros.copy(),
        theta=theta0,
    )


@dataclass
class RunReport:
    """Everything a finished run knows about itself."""

    scenario: str
    grid: GridSpec
    tau: float
    scheme: str
    n_steps: int
    monitors: dict[str, Array]
    snapshot_paths: list[str]
    breaches: list[dict]
    wall_time_s: float
    timing: dict[str, float]
    final_state: Optional[SimState] = None


def _format_t(t: float) -> str:
    return f"{t:g}"


def write_snapshot(out_dir: Path | str, scenario_name: str, field_name: str,
                   t: float, grid: GridSpec, arr: Array) -> Path:
    """Write one field at one time as raw float64 plus a JSON sidecar."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{scenario_name}_{field_name}_t{_format_t(t)}"
    raw_path = out_dir / f"{stem}.raw"
    data = np.ascontiguousarray(arr, dtype="<f8")
    raw_path.write_bytes(data.tobytes(order="C"))
    sidecar = {
        "scenario": scenario_name,
        "field": field_name,
        "t": t,
        "dim": grid.dim,
        "N": grid.n,
        "axis_order": _AXIS_ORDER[grid.dim],
        "min": float(arr.min()),
        "max": float(arr.max()),
    }
    (out_dir / f"{stem}.json").write_text(
        json.dumps(sidecar, sort_keys=True, indent=1) + "\n")
    return raw_path


def read_snapshot(raw_path: Path | str) -> tuple[Array, dict]:
    """Load a snapshot written by :func:`write_snapshot`."""
    raw_path = Path(raw_path)
    sidecar = json.loads(raw_path.with_suffix(".json").read_text())
    nodes = sidecar["N"] + 1
    arr = np.fromfile(raw_path, dtype="<f8").reshape((nodes,) * sidecar["dim"])
    return arr, sidecar


def write_monitor_csv(report: RunReport, path: Path | str) -> Path:
    """Write the fixed-header monitor series of a run."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MONITOR_CSV_COLUMNS)
        series = report.monitors
        for i in range(len(series["step"])):
            writer.writerow(
                [int(series["step"][i])]
                + [repr(float(series[c][i])) for c in MONITOR_CSV_COLUMNS[1:]]
            )
    return path


def _monitor_row(grid: GridSpec, params: ModelParams, state: SimState,
                 weights: Array, coords_x: Array) -> dict[str, float]:
    phi_V = state.phi_V()
    psi_s = psi_from_phi_sigma(state.phi_sigma, params.phi_sigma0_max)
    mass = float(np.sum(weights * state.phi_T))
    weighted_x = float(np.sum(weights * coords_x * state.phi_T))
    return {
        "t": state.t,
        "phiT_max": float(state.phi_T.max()),
        "phiT_min": float(state.phi_T.min()),
        "phiN_max": float(state.phi_N.max()),
        "phiN_min": float(state.phi_N.min()),
        "phiM_max": float(state.phi_M.max()),
        "phiM_min": float(state.phi_M.min()),
        "phi_sigma_max": float(state.phi_sigma.max()),
        "phi_sigma_min": float(state.phi_sigma.min()),
        "theta_max": float(state.theta.max()),
        "theta_min": float(state.theta.min()),
        "phiV_max": float(phi_V.max()),
        "phiV_min": float(phi_V.min()),
        "psi_sigma_norm": float(np.abs(psi_s).max()),
        "psi_M_norm": float(np.abs(state.psi_M()).max()),
        "phiNT_excess_max": float((state.phi_N - state.phi_T).max()),
        "tumor_mass": mass,
        "com_x": weighted_x / mass if mass > 1e-300 else 0.0,
    }


def run(sc: Scenario, out_dir: Path | str | None = None,
        keep_final_state: bool = True) -> RunReport:
    """Step a scenario to its final time with monitoring and snapshot export.

    Stepper failures propagate annotated with the step index and time.
    """
    validate_scenario(sc)
    t_start = time.perf_counter()
    timing = {"setup": 0.0, "stepping": 0.0, "monitors": 0.0, "snapshots": 0.0}

    state = initial_state(sc)
    state.validate(sc.grid, sc.params)
    stepper = Stepper(sc.grid, sc.params,
                      StepConfig(sc.tau, sc.scheme, sc.nutrient_right_edge_source))
    n_steps = int(round(sc.t_final / sc.tau)) if sc.t_final > 0 else 0
    snap_at: dict[int, list[float]] = {}
    for t_snap in sc.snapshot_times:
        snap_at.setdefault(_snap_step(t_snap, sc.tau), []).append(t_snap)
    weights = quadrature_weights(sc.grid)
    coords_x = sc.grid.coordinate_fields()[0]
    timing["setup"] = time.perf_counter() - t_start

    series: dict[str, list[float]] = {"step": []}
    snapshot_paths: list[str] = []

    def record(step_index: int, st: SimState) -> None:
        if not sc.monitors:
            return
        t0 = time.perf_counter()
        row = _monitor_row(sc.grid, sc.params, st, weights, coords_x)
        series["step"].append(step_index)
        for key, value in row.items():
            series.setdefault(key, []).append(value)
        timing["monitors"] += time.perf_counter() - t0

    def snapshot(step_index: int, st: SimState) -> None:
        if out_dir is None or step_index not in snap_at:
            return
        t0 = time.perf_counter()
        for t_label in snap_at[step_index]:
            for field_name, arr in st.fields().items():
                snapshot_paths.append(str(write_snapshot(
                    out_dir, sc.name, field_name, t_label, sc.grid, arr)))
        timing["snapshots"] += time.perf_counter() - t0

    record(0, state)
    snapshot(0, state)
    for k in range(1, n_steps + 1):
        t0 = time.perf_counter()
        try:
            state = stepper.step(state)
        except (NumericalFailure, StructureViolation) as err:
            err.step = k
            if err.t is None:
                err.t = state.t + sc.tau
            raise
        timing["stepping"] += time.perf_counter() - t0
        record(k, state)
        snapshot(k, state)

    monitors = {key: np.asarray(values, dtype=np.float64)
                for key, values in series.items()}
    report = RunReport(
        scenario=sc.name, grid=sc.grid, tau=sc.tau, scheme=sc.scheme,
        n_steps=n_steps, monitors=monitors, snapshot_paths=snapshot_paths,
        breaches=[], wall_time_s=time.perf_counter() - t_start, timing=timing,
        final_state=state if keep_final_state else None,
    )
    if out_dir is not None and sc.monitors:
        write_monitor_csv(report, Path(out_dir) / f"{sc.name}_monitors.csv")
    return report
