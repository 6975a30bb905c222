"""Time-series figures from a run's per-step monitor CSV.

Two figures per CSV: the transformed-field max norms (whose theoretical
bound is 1), and the raw field extremes (bounded by 0, 1, and the initial
matrix density).  Reference lines mark each bound so a violation is visible
at a glance.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "MONITOR_COLUMNS",
    "EmptySeriesError",
    "MonitorParseError",
    "plot_monitors",
    "read_monitors",
]

#: Fixed header of a run's monitor CSV, one row per accepted step.
MONITOR_COLUMNS = ("step", "t", "phiT_max", "phiT_min", "phiN_max",
                   "theta_min", "psi_sigma_norm", "psi_M_norm", "com_x")


class MonitorParseError(ValueError):
    """A monitor CSV line could not be parsed; the message names the line."""


class EmptySeriesError(ValueError):
    """A monitor CSV has a valid header but no rows to plot."""


def read_monitors(csv_path: Path | str) -> dict[str, np.ndarray]:
    """Parse a monitor CSV into one float array per column.

    The header must match :data:`MONITOR_COLUMNS` exactly; every data row
    must have one numeric value per column.  Errors name the offending
    1-based line.
    """
    csv_path = Path(csv_path)
    lines = csv_path.read_text().splitlines()
    if not lines:
        raise MonitorParseError(f"{csv_path.name} line 1: empty file, "
                                f"expected header {','.join(MONITOR_COLUMNS)}")
    header = tuple(lines[0].strip().split(","))
    if header != MONITOR_COLUMNS:
        raise MonitorParseError(
            f"{csv_path.name} line 1: expected header "
            f"{','.join(MONITOR_COLUMNS)}, got {lines[0].strip()!r}")
    columns: list[list[float]] = [[] for _ in MONITOR_COLUMNS]
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(MONITOR_COLUMNS):
            raise MonitorParseError(
                f"{csv_path.name} line {lineno}: expected "
                f"{len(MONITOR_COLUMNS)} fields, got {len(parts)}")
        for col, part in zip(columns, parts):
            try:
                col.append(float(part))
            except ValueError as exc:
                raise MonitorParseError(
                    f"{csv_path.name} line {lineno}: could not parse "
                    f"{part.strip()!r} as a number") from exc
    return {name: np.asarray(col, dtype=float)
            for name, col in zip(MONITOR_COLUMNS, columns)}


def _reference_line(ax, y: float, label: str) -> None:
    ax.axhline(y, color="0.3", linestyle="--", linewidth=1.0, label=label)


def _monitor_figures(series: dict[str, np.ndarray], name: str,
                     theta0: float) -> list[tuple[plt.Figure, str]]:
    """Build the two monitor figures; returns (figure, filename) pairs."""
    t = series["t"]
    figures = []

    fig1, ax1 = plt.subplots(figsize=(6.0, 4.0), constrained_layout=True)
    ax1.plot(t, series["psi_sigma_norm"], label="max |psi_sigma|")
    ax1.plot(t, series["psi_M_norm"], label="max |psi_M|")
    _reference_line(ax1, 1.0, "bound 1")
    _reference_line(ax1, 0.0, "bound 0")
    ax1.set_xlabel("t")
    ax1.set_ylabel("max norm")
    ax1.set_title(f"{name}: transformed-field max norms")
    ax1.legend(loc="best", fontsize="small")
    figures.append((fig1, f"{name}_mbp.png"))

    fig2, ax2 = plt.subplots(figsize=(6.0, 4.0), constrained_layout=True)
    ax2.plot(t, series["phiT_max"], label="max phi_T")
    ax2.plot(t, series["phiT_min"], label="min phi_T")
    ax2.plot(t, series["phiN_max"], label="max phi_N")
    ax2.plot(t, series["theta_min"], label="min theta")
    _reference_line(ax2, 0.0, "bound 0")
    _reference_line(ax2, 1.0, "bound 1")
    if not np.isclose(theta0, 1.0):
        _reference_line(ax2, theta0, f"bound {theta0:g}")
    ax2.set_xlabel("t")
    ax2.set_ylabel("field extremes")
    ax2.set_title(f"{name}: field bounds")
    ax2.legend(loc="best", fontsize="small")
    figures.append((fig2, f"{name}_bounds.png"))
    return figures


def plot_monitors(csv_path: Path | str, out_dir: Path | str, *,
                  theta0: float = 1.0, dpi: int = 150) -> list[Path]:
    """Render the max-norm and field-bound figures for one monitor CSV.

    ``theta0`` positions the matrix-density reference line when the initial
    density is not 1.  Raises :class:`EmptySeriesError` when the CSV holds
    no data rows.
    """
    csv_path = Path(csv_path)
    series = read_monitors(csv_path)
    name = csv_path.stem
    if name.endswith("_monitors"):
        name = name[:-len("_monitors")]
    if series["t"].size == 0:
        raise EmptySeriesError(f"{csv_path.name}: no data rows to plot")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for fig, filename in _monitor_figures(series, name, theta0):
        path = out_dir / filename
        fig.savefig(path, dpi=dpi)
        plt.close(fig)
        written.append(path)
    return written
