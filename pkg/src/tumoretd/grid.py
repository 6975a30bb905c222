"""Node-centered tensor grids on [-1, 1]^d and zero-flux difference operators.

Fields live on the (N+1)^d nodes x_i = -1 + i*h, h = 2/N, and are stored as
C-ordered arrays whose *last* axis is x, so that x varies fastest in memory:
2-D arrays are indexed ``[y, x]`` and 3-D arrays ``[z, y, x]``.

Homogeneous Neumann boundaries are realized by mirror ghost nodes reflected
across the boundary node (ghost value = first interior value), which makes
the discrete normal difference vanish on every boundary face.  The resulting
second-difference operator is exactly diagonalized by the type-I discrete
cosine basis (see :mod:`tumoretd.spectral`); a boundary row of the 1-D
operator reads ``(2*f[1] - 2*f[0]) / h**2``.

Variable-coefficient fluxes use edge (midpoint) averages of the coefficient
and edge differences of the potential; at the boundary the ghost edge flux is
the odd reflection of the first interior edge flux, so the discrete total
flux vanishes exactly under trapezoidal quadrature.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigurationError

Array = NDArray[np.float64]

__all__ = [
    "GridSpec",
    "check_field",
    "laplacian",
    "biharmonic",
    "div_mobility_grad",
    "quadrature_weights",
    "integrate",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform node-centered grid on the hypercube [-1, 1]^dim.

    Parameters
    ----------
    dim:
        Spatial dimension, 2 or 3.
    n:
        Number of cells per axis (shared by all axes); there are ``n + 1``
        nodes per axis.
    """

    dim: int
    n: int

    def __post_init__(self) -> None:
        if self.dim not in (2, 3):
            raise ConfigurationError(f"grid dim must be 2 or 3, got {self.dim!r}")
        if not isinstance(self.n, int) or isinstance(self.n, bool):
            raise ConfigurationError(f"grid n must be an integer, got {self.n!r}")
        if self.n < 4:
            raise ConfigurationError(f"grid n must be >= 4, got {self.n}")

    @property
    def h(self) -> float:
        """Node spacing 2/n."""
        return 2.0 / self.n

    @property
    def nodes_per_axis(self) -> int:
        return self.n + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n + 1,) * self.dim

    @property
    def num_nodes(self) -> int:
        return (self.n + 1) ** self.dim

    def axis_coords(self) -> Array:
        """Node coordinates of one axis: -1, -1+h, ..., 1."""
        return -1.0 + self.h * np.arange(self.n + 1, dtype=np.float64)

    def coordinate_fields(self) -> tuple[Array, ...]:
        """Full coordinate arrays ``(X, Y)`` in 2-D or ``(X, Y, Z)`` in 3-D.

        Each array has :attr:`shape`; ``X`` varies along the last axis.
        """
        c = self.axis_coords()
        meshes = np.meshgrid(*([c] * self.dim), indexing="ij")
        # meshes[i] varies along axis i of [z, y, x] / [y, x]; return x first.
        return tuple(meshes[::-1])


def check_field(grid: GridSpec, f: Array, name: str = "field") -> None:
    """Raise :class:`ConfigurationError` unless ``f`` conforms to ``grid``."""
    f = np.asarray(f)
    if f.shape != grid.shape:
        raise ConfigurationError(
            f"{name} has shape {f.shape}, expected {grid.shape} for the given grid"
        )


def _second_difference(f: Array, axis: int) -> Array:
    """Unscaled second difference along one axis with mirror ghost nodes."""
    g = np.moveaxis(f, axis, -1)
    out = np.empty(g.shape, dtype=np.float64)
    out[..., 1:-1] = g[..., 2:] - 2.0 * g[..., 1:-1] + g[..., :-2]
    out[..., 0] = 2.0 * (g[..., 1] - g[..., 0])
    out[..., -1] = 2.0 * (g[..., -2] - g[..., -1])
    return np.moveaxis(out, -1, axis)


def laplacian(grid: GridSpec, f: Array) -> Array:
    """Second-order 5-point (2-D) / 7-point (3-D) Laplacian with zero-flux
    mirror boundaries."""
    check_field(grid, f)
    out = _second_difference(f, 0)
    for axis in range(1, grid.dim):
        out += _second_difference(f, axis)
    out /= grid.h * grid.h
    return out


def biharmonic(grid: GridSpec, f: Array) -> Array:
    """Squared Laplacian, applying the mirror boundary at each stage."""
    return laplacian(grid, laplacian(grid, f))


def div_mobility_grad(
    grid: GridSpec,
    coef: Array,
    pot: Array,
    scale: float = 1.0,
    *,
    edge_transform: Callable[[Array], Array] | None = None,
) -> Array:
    """Conservative divergence ``scale * div(coef * grad(pot))``.

    Per axis the flux on edge i+1/2 is the edge average of ``coef`` times the
    edge difference of ``pot``; ``edge_transform``, when given, is applied to
    the edge-averaged coefficient before it multiplies the gradient (used for
    nonlinear mobilities evaluated at edge midpoints).  Boundary ghost fluxes
    are odd reflections of the first interior edge flux, so the normal flux
    through every boundary face vanishes and the quadrature-weighted total of
    the output telescopes to zero.
    """
    check_field(grid, coef, "coef")
    check_field(grid, pot, "pot")
    if not np.isfinite(scale):
        raise ConfigurationError(f"scale must be finite, got {scale!r}")
    total = np.zeros(grid.shape, dtype=np.float64)
    for axis in range(grid.dim):
        c = np.moveaxis(coef, axis, -1)
        p = np.moveaxis(pot, axis, -1)
        ce = 0.5 * (c[..., 1:] + c[..., :-1])
        if edge_transform is not None:
            ce = edge_transform(ce)
        flux = ce * (p[..., 1:] - p[..., :-1])
        out = np.empty(p.shape, dtype=np.float64)
        out[..., 1:-1] = flux[..., 1:] - flux[..., :-1]
        out[..., 0] = 2.0 * flux[..., 0]
        out[..., -1] = -2.0 * flux[..., -1]
        total += np.moveaxis(out, -1, axis)
    total *= scale / (grid.h * grid.h)
    return total


def quadrature_weights(grid: GridSpec) -> Array:
    """Trapezoidal quadrature weights (including the h^dim volume factor)."""
    w1 = np.ones(grid.nodes_per_axis, dtype=np.float64)
    w1[0] = w1[-1] = 0.5
    w = w1
    for _ in range(grid.dim - 1):
        w = np.multiply.outer(w, w1)
    return w * grid.h**grid.dim


def integrate(grid: GridSpec, f: Array) -> float:
    """Trapezoidal approximation of the integral of ``f`` over the domain."""
    check_field(grid, f)
    return float(np.sum(quadrature_weights(grid) * f))
