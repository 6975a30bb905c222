"""Reading and integrity-checking simulation run artifacts.

A run directory contains, per field per snapshot time, a raw little-endian
float64 array in C order plus a JSON sidecar describing it (scenario, field,
time, dimension, cells per axis ``N``, axis order, and the array's min/max).
Arrays hold ``N + 1`` nodes per axis.  Everything in this package works from
those files alone; nothing imports the simulator.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "INTEGRITY_TOL",
    "SnapshotHandle",
    "SnapshotIntegrityError",
    "discover_snapshots",
    "verify_directory",
]

#: Allowed disagreement between sidecar min/max and values recomputed from
#: the raw bytes.
INTEGRITY_TOL = 1e-12

_SIDECAR_KEYS = frozenset(
    {"scenario", "field", "t", "dim", "N", "axis_order", "min", "max"})


class SnapshotIntegrityError(ValueError):
    """A snapshot's bytes disagree with its sidecar, or the sidecar is bad."""


@dataclass(frozen=True)
class SnapshotHandle:
    """One field at one time: a raw array file plus its parsed sidecar.

    ``n`` is the number of grid cells per axis; the array on disk has
    ``n + 1`` nodes per axis, C order, with x varying fastest
    (axis order ``yx`` in 2-D, ``zyx`` in 3-D).
    """

    raw_path: Path
    scenario: str
    field: str
    t: float
    dim: int
    n: int
    axis_order: str
    sidecar_min: float
    sidecar_max: float

    @property
    def sidecar_path(self) -> Path:
        return self.raw_path.with_suffix(".json")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n + 1,) * self.dim

    @classmethod
    def open(cls, raw_path: Path | str) -> "SnapshotHandle":
        """Parse the sidecar next to ``raw_path`` without reading the array."""
        raw_path = Path(raw_path)
        sidecar_path = raw_path.with_suffix(".json")
        if not sidecar_path.exists():
            raise SnapshotIntegrityError(
                f"{raw_path.name}: missing sidecar {sidecar_path.name}")
        try:
            meta = json.loads(sidecar_path.read_text())
        except json.JSONDecodeError as exc:
            raise SnapshotIntegrityError(
                f"{sidecar_path.name}: invalid JSON ({exc})") from exc
        missing = _SIDECAR_KEYS - meta.keys()
        if missing:
            raise SnapshotIntegrityError(
                f"{sidecar_path.name}: sidecar missing keys {sorted(missing)}")
        return cls(
            raw_path=raw_path,
            scenario=str(meta["scenario"]),
            field=str(meta["field"]),
            t=float(meta["t"]),
            dim=int(meta["dim"]),
            n=int(meta["N"]),
            axis_order=str(meta["axis_order"]),
            sidecar_min=float(meta["min"]),
            sidecar_max=float(meta["max"]),
        )

    def load(self, check: bool = True) -> np.ndarray:
        """Read the array; with ``check`` verify it matches the sidecar."""
        data = np.fromfile(self.raw_path, dtype="<f8")
        expected = (self.n + 1) ** self.dim
        if data.size != expected:
            raise SnapshotIntegrityError(
                f"{self.raw_path.name}: {data.size} values on disk, "
                f"sidecar implies {expected}")
        arr = data.reshape(self.shape)
        if check:
            lo, hi = float(arr.min()), float(arr.max())
            if (abs(lo - self.sidecar_min) > INTEGRITY_TOL
                    or abs(hi - self.sidecar_max) > INTEGRITY_TOL):
                raise SnapshotIntegrityError(
                    f"{self.raw_path.name}: recomputed min/max "
                    f"({lo:.17g}, {hi:.17g}) disagree with sidecar "
                    f"({self.sidecar_min:.17g}, {self.sidecar_max:.17g}) "
                    f"beyond {INTEGRITY_TOL:g}")
        return arr

    def check_integrity(self) -> None:
        """Raise :class:`SnapshotIntegrityError` unless bytes match sidecar."""
        self.load(check=True)


def discover_snapshots(in_dir: Path | str) -> list[SnapshotHandle]:
    """Open every ``*.raw``/sidecar pair in a directory.

    Returned handles are sorted by scenario, field, then time.  A raw file
    without a readable sidecar raises.
    """
    in_dir = Path(in_dir)
    handles = [SnapshotHandle.open(p) for p in sorted(in_dir.glob("*.raw"))]
    handles.sort(key=lambda h: (h.scenario, h.field, h.t))
    return handles


def verify_directory(in_dir: Path | str) -> list[SnapshotHandle]:
    """Integrity-check every snapshot in a directory.

    Returns the handles when all pass; otherwise raises one
    :class:`SnapshotIntegrityError` listing every failing file.
    """
    handles = discover_snapshots(in_dir)
    problems = []
    for handle in handles:
        try:
            handle.check_integrity()
        except SnapshotIntegrityError as exc:
            problems.append(str(exc))
    if problems:
        raise SnapshotIntegrityError("; ".join(problems))
    return handles
