"""Static isosurface renders of 3-D field snapshots.

The surface is extracted with marching cubes at a requested level (default
0.8) and drawn to a PNG.  The number of connected components of the volume
above the level is reported alongside, so "two separate tumors" versus "one
merged mass" is a number, not a judgement call about the picture.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import matplotlib.pyplot as plt
from mpl_toolkits.mplot3d.art3d import Poly3DCollection
from skimage import measure

from .io import SnapshotHandle

__all__ = ["DEFAULT_LEVEL", "IsosurfaceResult", "plot_isosurface"]

DEFAULT_LEVEL = 0.8


@dataclass(frozen=True)
class IsosurfaceResult:
    """What an isosurface render produced.

    ``out_path`` is None when the level missed the data range, in which case
    ``warning`` holds the emitted message and ``n_components`` is 0.
    """

    out_path: Optional[Path]
    level: float
    n_components: int
    warning: Optional[str]


def plot_isosurface(handle: SnapshotHandle, out_path: Path | str, *,
                    level: float = DEFAULT_LEVEL, color: str = "#d95f02",
                    dpi: int = 150) -> IsosurfaceResult:
    """Render the level set of one 3-D snapshot to a static image.

    A level at or outside the data's [min, max] has no surface: a warning is
    emitted and no file is written.
    """
    if handle.dim != 3:
        raise ValueError(f"isosurface needs a 3-D snapshot; "
                         f"{handle.raw_path.name} is {handle.dim}-D")
    vol = handle.load()
    lo, hi = float(vol.min()), float(vol.max())
    if not lo < level < hi:
        message = (f"level {level:g} outside data range [{lo:g}, {hi:g}] "
                   f"for {handle.raw_path.name}; no surface")
        warnings.warn(message)
        return IsosurfaceResult(None, level, 0, message)

    h = 1.0 / handle.n
    verts, faces, _, _ = measure.marching_cubes(
        vol, level=level, spacing=(h, h, h))
    n_components = int(measure.label(vol >= level, connectivity=1).max())

    # The array is stored z-slowest (axis order zyx); flip vertex columns so
    # the plot axes are x, y, z.
    pts = verts[:, ::-1]
    fig = plt.figure(figsize=(6.0, 6.0), constrained_layout=True)
    ax = fig.add_subplot(projection="3d")
    mesh = Poly3DCollection(pts[faces], alpha=0.9)
    mesh.set_facecolor(color)
    mesh.set_edgecolor("none")
    ax.add_collection3d(mesh)
    ax.set_xlim(0.0, 1.0)
    ax.set_ylim(0.0, 1.0)
    ax.set_zlim(0.0, 1.0)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_zlabel("z")
    ax.set_title(f"{handle.field}, t = {handle.t:g}, level {level:g}: "
                 f"{n_components} component(s)")

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=dpi)
    plt.close(fig)
    return IsosurfaceResult(out_path, level, n_components, None)
