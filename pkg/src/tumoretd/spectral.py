"""Cosine-basis diagonalization of the stabilized linear operators.

The zero-flux second difference of :mod:`tumoretd.grid` has eigenvectors
``cos((k-1)(i-1)pi/N)`` with eigenvalues

    d_k = -(4/h^2) * sin^2((k-1) pi / (2N)),   k = 1..N+1,

so each stabilized linear operator is a diagonal multiplier in the type-I
discrete cosine basis:

* ``phase_field``:  lambda = -kappa_T1 * s + kappa_T2 * s^2
* ``nutrient``:     lambda = kappa_sigma - (M_sigma / delta_sigma) * s
* ``mde``:          lambda = kappa_M - M_M * s

with ``s = d_k + d_l (+ d_m)`` the tensor-sum of per-axis eigenvalues.

The forward transform mirror-extends each axis ``[v_1..v_{N+1}, v_N..v_2]``
to 2N points, applies a real FFT, and keeps the first N+1 real components
halved.  Applying the same transform twice scales a vector by N/2 per axis,
so the inverse is the forward transform times 2/N per axis.

Time stepping needs the entire functions

    Upsilon_0(x) = exp(-x),
    Upsilon_1(x) = (1 - exp(-x)) / x,
    Upsilon_2(x) = (exp(-x) - 1 + x) / x^2,

evaluated at x = lambda * tau >= 0.  Below ``|x| < 1e-2`` the quotient forms
lose digits to cancellation and are replaced by 6-term alternating Taylor
partial sums; both branches agree to ~1e-14 at the switch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigurationError
from .grid import GridSpec, check_field

if TYPE_CHECKING:  # pragma: no cover
    from .model import ModelParams

Array = NDArray[np.float64]

__all__ = [
    "OPERATOR_KINDS",
    "TAYLOR_SWITCH",
    "SpectralOperator",
    "PhiTable",
    "laplacian_eigs",
    "build_operator",
    "upsilon",
    "build_phi_table",
    "dct_forward",
    "dct_inverse",
    "apply_phi",
    "etd_predictor_apply",
]

OPERATOR_KINDS = ("phase_field", "nutrient", "mde")

#: Arguments below this switch from the quotient forms to Taylor sums.
TAYLOR_SWITCH = 1e-2

# Coefficients of sum_{m=0}^{5} (-x)^m / (m+i)!  for Upsilon_i, i = 1, 2.
_TAYLOR_1 = tuple((-1.0) ** m / math.factorial(m + 1) for m in range(6))
_TAYLOR_2 = tuple((-1.0) ** m / math.factorial(m + 2) for m in range(6))


def laplacian_eigs(grid: GridSpec) -> tuple[Array, ...]:
    """Per-axis eigenvalues of the zero-flux second difference.

    Returns one array of length N+1 per axis (axes share N, so the arrays
    are equal); entry k is ``-(4/h^2) sin^2((k-1)pi/(2N))``.
    """
    k = np.arange(grid.nodes_per_axis, dtype=np.float64)
    d = -(4.0 / grid.h**2) * np.sin(k * np.pi / (2.0 * grid.n)) ** 2
    return (d,) * grid.dim


@dataclass(frozen=True)
class SpectralOperator:
    """Eigenvalue grid of one stabilized linear operator.

    ``eigs`` has the grid's node shape; entry (k, l[, m]) is the operator
    eigenvalue on the corresponding cosine mode.
    """

    grid: GridSpec
    kind: str
    eigs: Array


def build_operator(grid: GridSpec, kind: str, params: "ModelParams") -> SpectralOperator:
    """Assemble the eigenvalue grid for one operator kind."""
    if kind not in OPERATOR_KINDS:
        raise ConfigurationError(
            f"unknown operator kind {kind!r}; expected one of {OPERATOR_KINDS}"
        )
    per_axis = laplacian_eigs(grid)
    s = per_axis[0]
    for d in per_axis[1:]:
        s = np.add.outer(s, d)
    if kind == "phase_field":
        eigs = -params.kappa_T1 * s + params.kappa_T2 * s * s
    elif kind == "nutrient":
        eigs = params.kappa_sigma - (params.M_sigma / params.delta_sigma) * s
    else:  # mde
        eigs = params.kappa_M - params.M_M * s
    return SpectralOperator(grid=grid, kind=kind, eigs=eigs)


def upsilon(i: int, x):
    """Evaluate Upsilon_i at x >= 0 (scalar or array).

    Uses the quotient forms away from zero and 6-term Taylor partial sums
    below :data:`TAYLOR_SWITCH` to avoid catastrophic cancellation.
    """
    if i not in (0, 1, 2):
        raise ConfigurationError(f"upsilon index must be 0, 1 or 2, got {i!r}")
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr < 0.0):
        raise ValueError("upsilon argument must be nonnegative "
                         "(stabilized eigenvalues are >= 0)")
    scalar = arr.ndim == 0
    a = np.atleast_1d(arr)
    if i == 0:
        out = np.exp(-a)
        return float(out[0]) if scalar else out

    out = np.empty_like(a)
    small = a < TAYLOR_SWITCH
    coeffs = _TAYLOR_1 if i == 1 else _TAYLOR_2
    if np.any(small):
        xs = a[small]
        acc = np.full_like(xs, coeffs[-1])
        for c in coeffs[-2::-1]:
            acc = acc * xs + c
        out[small] = acc
    if not np.all(small):
        xl = a[~small]
        em1 = np.expm1(-xl)  # exp(-x) - 1, computed without cancellation
        if i == 1:
            out[~small] = -em1 / xl
        else:
            out[~small] = (em1 + xl) / (xl * xl)
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class PhiTable:
    """Precomputed Upsilon_i(lambda * tau) multiplier tables for one operator.

    Built once per (operator, tau) pair and reused across all steps.
    """

    op: SpectralOperator
    tau: float
    tables: tuple[Array, Array, Array]


def build_phi_table(op: SpectralOperator, tau: float) -> PhiTable:
    if not (tau > 0.0 and np.isfinite(tau)):
        raise ConfigurationError(f"tau must be a positive finite real, got {tau!r}")
    x = op.eigs * tau
    return PhiTable(op=op, tau=tau, tables=(upsilon(0, x), upsilon(1, x), upsilon(2, x)))


def _dct_axis(f: Array, axis: int) -> Array:
    """One-axis type-I cosine transform via mirror extension and real FFT."""
    g = np.moveaxis(f, axis, -1)
    mirror = np.concatenate([g, g[..., -2:0:-1]], axis=-1)  # length 2N
    spec = np.fft.rfft(mirror, axis=-1)  # 2N real -> N+1 complex bins
    return np.moveaxis(0.5 * spec.real, -1, axis)


def dct_forward(grid: GridSpec, f: Array) -> Array:
    """Forward cosine transform applied along every axis."""
    check_field(grid, f)
    out = np.asarray(f, dtype=np.float64)
    for axis in range(grid.dim):
        out = _dct_axis(out, axis)
    return out


def dct_inverse(grid: GridSpec, coeffs: Array) -> Array:
    """Inverse of :func:`dct_forward` (same transform scaled by 2/N per axis)."""
    check_field(grid, coeffs)
    out = np.asarray(coeffs, dtype=np.float64)
    for axis in range(grid.dim):
        out = _dct_axis(out, axis)
    out *= (2.0 / grid.n) ** grid.dim
    return out


def apply_phi(table: PhiTable, i: int, f: Array) -> Array:
    """Apply Upsilon_i(L * tau) to a field: iDCT(table_i * DCT(f))."""
    if i not in (0, 1, 2):
        raise ConfigurationError(f"phi index must be 0, 1 or 2, got {i!r}")
    g = table.op.grid
    check_field(g, f)
    return dct_inverse(g, table.tables[i] * dct_forward(g, f))


def etd_predictor_apply(table: PhiTable, f: Array, nf: Array) -> Array:
    """Fused ``Upsilon_0(L tau) f + tau Upsilon_1(L tau) nf``.

    Equivalent to two :func:`apply_phi` calls up to roundoff but shares the
    single inverse transform.
    """
    g = table.op.grid
    check_field(g, f)
    check_field(g, nf)
    combined = table.tables[0] * dct_forward(g, f) \
        + table.tau * (table.tables[1] * dct_forward(g, nf))
    return dct_inverse(g, combined)
