import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

os.environ.setdefault("MPLBACKEND", "Agg")

_AXIS_ORDER = {2: "yx", 3: "zyx"}

_TINY2D_CONFIG = """\
[scenario]
name = "tiny2d"
dim = 2
n = 16
tau = 1e-3
t_final = 0.2
scheme = "etdrk2"
initial = "gaussian_ring"
snapshot_times = [0.0, 0.05, 0.1, 0.2]
"""

_TINY3D_CONFIG = """\
[scenario]
name = "tiny3d"
dim = 3
n = 32
tau = 8e-3
t_final = 8e-3
scheme = "etdrk2"
initial = "two_tumors_3d"
snapshot_times = [0.0]
"""


def write_raw_snapshot(out_dir: Path, scenario: str, field: str, t: float,
                       arr: np.ndarray, *, sidecar_patch: dict | None = None,
                       truncate: bool = False) -> Path:
    """Write a snapshot in the documented run-directory format.

    ``sidecar_patch`` overrides sidecar entries (to fabricate corrupt
    metadata); ``truncate`` drops the last half of the raw bytes.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{scenario}_{field}_t{t:g}"
    data = np.ascontiguousarray(arr, dtype="<f8").tobytes(order="C")
    if truncate:
        data = data[: len(data) // 2]
    raw_path = out_dir / f"{stem}.raw"
    raw_path.write_bytes(data)
    sidecar = {
        "scenario": scenario,
        "field": field,
        "t": float(t),
        "dim": arr.ndim,
        "N": arr.shape[0] - 1,
        "axis_order": _AXIS_ORDER[arr.ndim],
        "min": float(arr.min()),
        "max": float(arr.max()),
    }
    if sidecar_patch:
        sidecar.update(sidecar_patch)
        for key, value in list(sidecar.items()):
            if value is None:
                del sidecar[key]
    (out_dir / f"{stem}.json").write_text(
        json.dumps(sidecar, sort_keys=True, indent=1) + "\n")
    return raw_path


def radial_field(n: int, dim: int, centers, radius: float = 0.15,
                 width: float = 0.05) -> np.ndarray:
    """Smooth bumps near 1 inside each ball, near 0 outside, in [0, 1]."""
    axes = [np.linspace(0.0, 1.0, n + 1)] * dim
    grids = np.meshgrid(*axes, indexing="ij")
    out = np.zeros((n + 1,) * dim)
    for center in centers:
        r = np.sqrt(sum((g - c) ** 2 for g, c in zip(grids, center)))
        out = np.maximum(out, 0.5 * (1.0 - np.tanh((r - radius) / width)))
    return out


def write_monitor_csv(path: Path, rows: list[dict]) -> Path:
    from tumorviz import MONITOR_COLUMNS

    lines = [",".join(MONITOR_COLUMNS)]
    for row in rows:
        lines.append(",".join(repr(float(row[c])) for c in MONITOR_COLUMNS))
    path.write_text("\n".join(lines) + "\n")
    return path


def compliant_monitor_rows(n: int = 50) -> list[dict]:
    ts = np.linspace(0.0, 1.0, n + 1)[1:]
    rows = []
    for k, t in enumerate(ts, start=1):
        rows.append({
            "step": float(k),
            "t": float(t),
            "phiT_max": 0.95 + 0.04 * t,
            "phiT_min": 0.0,
            "phiN_max": 0.1 * t,
            "theta_min": 1.0 - 0.2 * t,
            "psi_sigma_norm": 0.9 + 0.09 * t,
            "psi_M_norm": 0.85 + 0.1 * t,
            "com_x": 0.001 * t,
        })
    return rows


def _run_primary_cli(config_text: str, workdir: Path) -> Path:
    config = workdir / "scenario.toml"
    config.write_text(config_text)
    out_dir = workdir / "run"
    proc = subprocess.run(
        [sys.executable, "-m", "tumoretd.cli", "run",
         "--config", str(config), "--out", str(out_dir)],
        capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"simulator run failed ({proc.returncode}):\n"
                           f"{proc.stdout}\n{proc.stderr}")
    return out_dir


@pytest.fixture(scope="session")
def real_run_2d(tmp_path_factory) -> Path:
    """A short real 2-D run: 4 snapshot times x 6 fields plus monitors."""
    return _run_primary_cli(_TINY2D_CONFIG, tmp_path_factory.mktemp("real2d"))


@pytest.fixture(scope="session")
def real_run_3d(tmp_path_factory) -> Path:
    """A one-step real 3-D two-tumor run (initial snapshot only)."""
    return _run_primary_cli(_TINY3D_CONFIG, tmp_path_factory.mktemp("real3d"))
