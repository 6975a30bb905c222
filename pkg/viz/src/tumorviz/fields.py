"""Heatmap panel grids of 2-D field snapshots.

One figure holds a rows-by-columns grid: one row per field, one column per
snapshot time, every panel of a row sharing that field's physical color
scale so growth and decay read directly off the colors.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Optional, Sequence

import matplotlib.pyplot as plt

from .io import SnapshotHandle

__all__ = ["physical_bounds", "plot_fields"]

#: Time comparison tolerance when matching requested times to snapshots.
TIME_TOL = 1e-9

_UNIT_FIELDS = frozenset({"phi_T", "phi_N", "phi_V", "phi_sigma", "phi_M"})


def physical_bounds(field: str, theta0: float = 1.0) -> tuple[float, float]:
    """Color limits for a field: its physical range, when one is known.

    Volume fractions and concentrations live in [0, 1]; the matrix density
    lives in [0, ``theta0``].  Unknown field names default to [0, 1].
    """
    if field == "theta":
        return (0.0, float(theta0))
    if field in _UNIT_FIELDS:
        return (0.0, 1.0)
    return (0.0, 1.0)


def _find(handles: Sequence[SnapshotHandle], field: str,
          t: float) -> Optional[SnapshotHandle]:
    for handle in handles:
        if handle.field == field and math.isclose(
                handle.t, t, rel_tol=0.0, abs_tol=TIME_TOL):
            return handle
    return None


def _fields_figure(handles: Sequence[SnapshotHandle], fields: Sequence[str],
                   times: Sequence[float], *, cmap: str,
                   theta0: float) -> plt.Figure:
    """Build the panel-grid figure; callers own closing it."""
    nrows, ncols = len(fields), len(times)
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(2.6 * ncols + 1.2, 2.4 * nrows),
        squeeze=False, constrained_layout=True)
    for i, field in enumerate(fields):
        lo, hi = physical_bounds(field, theta0)
        image = None
        for j, t in enumerate(times):
            ax = axes[i][j]
            handle = _find(handles, field, t)
            arr = handle.load()
            image = ax.imshow(arr, origin="lower", extent=(0.0, 1.0, 0.0, 1.0),
                              vmin=lo, vmax=hi, cmap=cmap)
            if i == 0:
                ax.set_title(f"t = {t:g}")
            if j == 0:
                ax.set_ylabel(field)
            ax.set_xticks([])
            ax.set_yticks([])
        fig.colorbar(image, ax=list(axes[i]), ticks=[lo, hi], shrink=0.85)
    return fig


def plot_fields(snapshots: Iterable[SnapshotHandle], fields: Sequence[str],
                times: Sequence[float], out_path: Path | str, *,
                cmap: str = "viridis", theta0: float = 1.0,
                dpi: int = 150) -> tuple[Optional[Path],
                                         list[tuple[str, float]]]:
    """Render one heatmap panel grid (fields down, times across).

    Returns ``(written_path, missing)``.  When any requested (field, time)
    pair has no snapshot, nothing is rendered: the figure is skipped and
    every missing pair is listed in ``missing``.  Only 2-D snapshots can be
    drawn as heatmaps.
    """
    handles = list(snapshots)
    missing = [(field, float(t)) for field in fields for t in times
               if _find(handles, field, t) is None]
    if missing:
        return None, missing
    for field in fields:
        for t in times:
            handle = _find(handles, field, t)
            if handle.dim != 2:
                raise ValueError(
                    f"field panels need 2-D snapshots; "
                    f"{handle.raw_path.name} is {handle.dim}-D")
    fig = _fields_figure(handles, fields, times, cmap=cmap, theta0=theta0)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=dpi)
    plt.close(fig)
    return out_path, []
