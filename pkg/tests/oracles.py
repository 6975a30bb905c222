"""Independent dense-matrix and high-precision oracles used by the tests.

Everything here is assembled from first principles (explicit matrices,
Gauss-Legendre quadrature, arbitrary-precision arithmetic) so that it shares
no code path with the package's spectral machinery.
"""
from __future__ import annotations

from functools import reduce

import mpmath
import numpy as np
import scipy.linalg


def dense_neumann_laplacian_1d(n: int) -> np.ndarray:
    """(N+1)x(N+1) second-difference matrix with mirror ghost nodes."""
    h = 2.0 / n
    m = n + 1
    a = np.zeros((m, m))
    for j in range(1, m - 1):
        a[j, j - 1] = 1.0
        a[j, j] = -2.0
        a[j, j + 1] = 1.0
    a[0, 0] = -2.0
    a[0, 1] = 2.0
    a[m - 1, m - 2] = 2.0
    a[m - 1, m - 1] = -2.0
    return a / h**2


def dense_laplacian(dim: int, n: int) -> np.ndarray:
    """Dense Laplacian on the raveled C-order grid (x varies fastest)."""
    l1 = dense_neumann_laplacian_1d(n)
    eye = np.eye(n + 1)
    mats = []
    for axis in range(dim):
        factors = [l1 if k == axis else eye for k in range(dim)]
        mats.append(reduce(np.kron, factors))
    return sum(mats)


def dense_stabilized_operator(dim: int, n: int, kind: str, params) -> np.ndarray:
    lap = dense_laplacian(dim, n)
    eye = np.eye(lap.shape[0])
    if kind == "phase_field":
        return -params.kappa_T1 * lap + params.kappa_T2 * (lap @ lap)
    if kind == "nutrient":
        return params.kappa_sigma * eye - (params.M_sigma / params.delta_sigma) * lap
    if kind == "mde":
        return params.kappa_M * eye - params.M_M * lap
    raise ValueError(kind)


def dense_upsilon_apply(a: np.ndarray, i: int, tau: float,
                        f: np.ndarray, quad_nodes: int = 24) -> np.ndarray:
    """Apply Upsilon_i(tau*A) to f via dense exponentials.

    Uses scipy's scaling-and-squaring expm directly for i=0, and
    Gauss-Legendre quadrature of the integral representations

        Upsilon_1(B) = int_0^1 exp(-s B) ds
        Upsilon_2(B) = int_0^1 (1 - s) exp(-s B) ds

    for i=1,2, which remain well defined when A is singular.
    """
    b = tau * a
    flat = f.ravel()
    if i == 0:
        return (scipy.linalg.expm(-b) @ flat).reshape(f.shape)
    nodes, weights = np.polynomial.legendre.leggauss(quad_nodes)
    s_vals = 0.5 * (nodes + 1.0)
    w_vals = 0.5 * weights
    acc = np.zeros_like(flat)
    for s, w in zip(s_vals, w_vals):
        factor = w if i == 1 else w * (1.0 - s)
        acc = acc + factor * (scipy.linalg.expm(-s * b) @ flat)
    return acc.reshape(f.shape)


def upsilon_mpmath(i: int, x: float, dps: int = 50) -> float:
    """Arbitrary-precision reference for the exponential-integrator kernels."""
    with mpmath.workdps(dps):
        xm = mpmath.mpf(x)
        if i == 0:
            val = mpmath.e**(-xm)
        elif i == 1:
            val = (1 - mpmath.e**(-xm)) / xm if xm != 0 else mpmath.mpf(1)
        elif i == 2:
            if xm == 0:
                val = mpmath.mpf("0.5")
            else:
                val = (mpmath.e**(-xm) - 1 + xm) / xm**2
        else:
            raise ValueError(i)
        return float(val)


def picard_trapezoid_necrotic(phi_n, phi_T_n, phi_T_np1, h_n, h_p,
                              lam, tau, iters: int = 200):
    """Fixed-point iterate of the implicit necrotic-fraction trapezoid."""
    x = np.array(phi_n, dtype=float)
    for _ in range(iters):
        x = phi_n + 0.5 * tau * lam * (h_n * (phi_T_n - phi_n)
                                       + h_p * (phi_T_np1 - x))
    return x


def picard_trapezoid_ecm(theta_n, phi_M_n, phi_M_np1, lam, tau,
                         iters: int = 200):
    """Fixed-point iterate of the implicit matrix-degradation trapezoid."""
    x = np.array(theta_n, dtype=float)
    for _ in range(iters):
        x = theta_n - 0.5 * tau * lam * (theta_n * phi_M_n + x * phi_M_np1)
    return x
