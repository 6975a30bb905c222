"""Figure rendering for tumor-growth simulation run directories.

Consumes only the files a run writes — raw snapshot arrays with JSON
sidecars and the per-step monitor CSV — and turns them into heatmap panel
grids, bound time-series figures with reference lines, and 3-D isosurface
images.  The simulator itself is never imported.
"""
from .fields import physical_bounds, plot_fields
from .io import (INTEGRITY_TOL, SnapshotHandle, SnapshotIntegrityError,
                 discover_snapshots, verify_directory)
from .iso import DEFAULT_LEVEL, IsosurfaceResult, plot_isosurface
from .monitors import (MONITOR_COLUMNS, EmptySeriesError, MonitorParseError,
                       plot_monitors, read_monitors)

__version__ = "0.1.0"

__all__ = [
    "INTEGRITY_TOL", "SnapshotHandle", "SnapshotIntegrityError",
    "discover_snapshots", "verify_directory",
    "physical_bounds", "plot_fields",
    "DEFAULT_LEVEL", "IsosurfaceResult", "plot_isosurface",
    "MONITOR_COLUMNS", "EmptySeriesError", "MonitorParseError",
    "plot_monitors", "read_monitors",
    "__version__",
]
