"""Model parameters, constitutive functions, and nonlinear right-hand sides.

The coupled five-field system evolves the tumor fraction ``phi_T``
(Cahn-Hilliard-type with degenerate mobility and haptotaxis), the necrotic
fraction ``phi_N`` (pointwise ODE switched by low nutrient), the nutrient
``phi_sigma`` (reaction-diffusion), the matrix-degrading enzyme ``phi_M``
(reaction-diffusion), and the extracellular matrix density ``theta``
(pointwise degradation ODE).  The viable fraction is
``phi_V = clamp(phi_T) - phi_N``.

Time integration splits each diffusive equation into a stabilized linear
part and a bounded nonlinear remainder.  With the affine transforms

    psi_sigma = 2 phi_sigma / max|phi_sigma(0)| - 1,    psi_M = 2 phi_M - 1,

the remainders evaluated here satisfy ``|N_sigma| <= kappa_sigma`` and
``|N_M| <= kappa_M`` on the admissible boxes (|psi| <= 1, phi_V in [0,1],
theta in [0, theta0_max]), which is what makes the exponential schemes
preserve the maximum bound principle.  The stabilization constants are
derived from the rate constants:

    kappa_T1 = 2 M_T E_bar,            kappa_T2 = (C_stab eps_T)^2,
    kappa_sigma >= lambda_sigma,
    kappa_M >= lambda_M_dec + (lambda_M_pro + lambda_theta_dec) * theta0_max,

with equality by default and upward overrides allowed.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigurationError, StructureViolation
from .grid import GridSpec, check_field, div_mobility_grad, laplacian

Array = NDArray[np.float64]

__all__ = [
    "ModelParams",
    "SimState",
    "heaviside_smooth",
    "cutoff",
    "mobility",
    "chemical_potential",
    "nonlinear_T",
    "nonlinear_sigma",
    "nonlinear_M",
    "psi_from_phi_sigma",
    "phi_from_psi_sigma",
    "psi_from_phi_M",
    "phi_from_psi_M",
]

_NONNEGATIVE_FIELDS = (
    "M_T", "M_M", "M_sigma", "chi_H",
    "lambda_T_pro", "lambda_T_apo", "lambda_VN", "lambda_sigma",
    "lambda_M_pro", "lambda_M_dec", "lambda_theta_deg", "lambda_theta_dec",
    "sigma_VN", "sigma_H", "beta_sigma", "beta_M", "theta0_max",
)
_POSITIVE_FIELDS = ("eps_T", "E_bar", "M_T", "M_M", "M_sigma", "delta_sigma",
                    "eps1", "C_stab", "phi_sigma0_max")


@dataclass(frozen=True)
class ModelParams:
    """All rate constants, mobilities, thresholds, and stabilization constants.

    Defaults are the dimensionless baseline parameter set.  ``kappa_sigma``
    and ``kappa_M`` may be passed explicitly to increase stabilization; when
    left ``None`` they resolve to their lower bounds.
    """

    eps_T: float = 0.005          # interface width
    E_bar: float = 0.045          # double-well energy scale
    M_T: float = 2.0              # tumor mobility scale
    M_M: float = 0.1              # enzyme diffusion mobility
    M_sigma: float = 0.001        # nutrient mobility
    delta_sigma: float = 0.01     # nutrient time-scale separation
    chi_H: float = 0.001          # haptotaxis strength
    lambda_T_pro: float = 2.0     # tumor proliferation rate
    lambda_T_apo: float = 0.005   # tumor apoptosis rate
    lambda_VN: float = 1.0        # viable-to-necrotic conversion rate
    lambda_sigma: float = 1.5     # nutrient consumption rate
    lambda_M_pro: float = 1.0     # enzyme production rate
    lambda_M_dec: float = 1.0     # enzyme decay rate
    lambda_theta_deg: float = 1.0  # matrix degradation rate
    lambda_theta_dec: float = 0.1  # enzyme loss per matrix binding
    sigma_VN: float = 0.44        # necrosis nutrient threshold
    sigma_H: float = 0.6          # enzyme-production nutrient scale
    eps1: float = 1e-3            # Heaviside smoothing width
    C_stab: float = 0.125         # biharmonic stabilization prefactor
    beta_sigma: float = 1.0       # admissible psi_sigma bound
    beta_M: float = 1.0           # admissible psi_M bound
    phi_sigma0_max: float = 1.0   # max of the initial nutrient field
    theta0_max: float = 1.0       # max of the initial matrix field
    kappa_sigma: Optional[float] = None
    kappa_M: Optional[float] = None

    def __post_init__(self) -> None:
        for name in _NONNEGATIVE_FIELDS:
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0.0):
                raise ConfigurationError(f"parameter {name} must be >= 0, got {v!r}")
        for name in _POSITIVE_FIELDS:
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0.0):
                raise ConfigurationError(f"parameter {name} must be > 0, got {v!r}")
        if self.kappa_sigma is None:
            object.__setattr__(self, "kappa_sigma", self.kappa_sigma_lower)
        elif self.kappa_sigma < self.kappa_sigma_lower:
            raise ConfigurationError(
                f"kappa_sigma = {self.kappa_sigma!r} is below its lower bound "
                f"{self.kappa_sigma_lower!r} (= lambda_sigma)"
            )
        if self.kappa_M is None:
            object.__setattr__(self, "kappa_M", self.kappa_M_lower)
        elif self.kappa_M < self.kappa_M_lower:
            raise ConfigurationError(
                f"kappa_M = {self.kappa_M!r} is below its lower bound "
                f"{self.kappa_M_lower!r} "
                "(= lambda_M_dec + (lambda_M_pro + lambda_theta_dec) * theta0_max)"
            )
        if self.kappa_sigma <= 0.0 or self.kappa_M <= 0.0:
            raise ConfigurationError("stabilization constants must be positive")

    @property
    def kappa_T1(self) -> float:
        return 2.0 * self.M_T * self.E_bar

    @property
    def kappa_T2(self) -> float:
        return (self.C_stab * self.eps_T) ** 2

    @property
    def kappa_sigma_lower(self) -> float:
        return self.lambda_sigma

    @property
    def kappa_M_lower(self) -> float:
        return self.lambda_M_dec + (self.lambda_M_pro + self.lambda_theta_dec) * self.theta0_max

    def with_initial_maxima(self, phi_sigma0_max: float, theta0_max: float,
                            *, rederive_kappas: bool = True) -> "ModelParams":
        """Copy with the initial-field maxima (and, by default, the dependent
        stabilization constants) recomputed."""
        kwargs = dict(phi_sigma0_max=phi_sigma0_max, theta0_max=theta0_max)
        if rederive_kappas:
            kwargs["kappa_M"] = None
            kwargs["kappa_sigma"] = None
        return replace(self, **kwargs)


def heaviside_smooth(x, eps1: float):
    """Smooth step 0.5 * (1 + (2/pi) * arctan(x / eps1)), strictly in (0, 1)."""
    if not eps1 > 0.0:
        raise ConfigurationError(f"eps1 must be > 0, got {eps1!r}")
    return 0.5 * (1.0 + (2.0 / np.pi) * np.arctan(np.asarray(x, dtype=np.float64) / eps1))


def cutoff(f):
    """Pointwise clamp to [0, 1]; idempotent."""
    return np.clip(f, 0.0, 1.0)


def mobility(phi_V, M_T: float):
    """Degenerate tumor mobility M_T * phi_V^2 * (1 - phi_V)^2."""
    v = np.asarray(phi_V, dtype=np.float64)
    return M_T * (v * (1.0 - v)) ** 2


def chemical_potential(grid: GridSpec, phi_T: Array, params: ModelParams) -> Array:
    """Double-well derivative minus interface term:
    E_bar * (4 phi^3 - 6 phi^2 + 2 phi) - eps_T^2 * laplacian(phi)."""
    check_field(grid, phi_T)
    well = params.E_bar * (phi_T * (2.0 + phi_T * (4.0 * phi_T - 6.0)))
    return well - params.eps_T**2 * laplacian(grid, phi_T)


def nonlinear_T(grid: GridSpec, phi_T: Array, phi_V: Array, phi_sigma: Array,
                theta: Array, params: ModelParams) -> Array:
    """Stabilized nonlinear remainder of the tumor equation.

    div(m(phi_V) grad mu) - div(chi_H phi_V grad theta)
    + lambda_T_pro * phi_sigma * phi_V * (1 - phi_T) - lambda_T_apo * phi_V
    - kappa_T1 * laplacian(phi_T) + kappa_T2 * biharmonic(phi_T),
    with the mobility evaluated at edge-averaged phi_V.
    """
    lap_T = laplacian(grid, phi_T)
    mu = params.E_bar * (phi_T * (2.0 + phi_T * (4.0 * phi_T - 6.0))) \
        - params.eps_T**2 * lap_T
    out = div_mobility_grad(grid, phi_V, mu, 1.0,
                            edge_transform=lambda v: mobility(v, params.M_T))
    out -= div_mobility_grad(grid, phi_V, theta, params.chi_H)
    out += params.lambda_T_pro * phi_sigma * phi_V * (1.0 - phi_T)
    out -= params.lambda_T_apo * phi_V
    out -= params.kappa_T1 * lap_T
    out += params.kappa_T2 * laplacian(grid, lap_T)
    return out


def nonlinear_sigma(phi_V: Array, psi_sigma: Array, params: ModelParams) -> Array:
    """Stabilized nutrient remainder kappa_sigma * psi - lambda_sigma * phi_V * (psi + 1)."""
    return params.kappa_sigma * psi_sigma - params.lambda_sigma * phi_V * (psi_sigma + 1.0)


def nonlinear_M(phi_V: Array, psi_M: Array, phi_sigma: Array, theta: Array,
                params: ModelParams) -> Array:
    """Stabilized enzyme remainder.

    kappa_M * psi - lambda_M_dec * (psi + 1)
    + lambda_M_pro * phi_V * theta * sigma_H / (sigma_H + phi_sigma) * (1 - psi)
    - lambda_theta_dec * theta * (psi + 1).
    """
    production = params.lambda_M_pro * phi_V * theta \
        * (params.sigma_H / (params.sigma_H + phi_sigma)) * (1.0 - psi_M)
    return params.kappa_M * psi_M - params.lambda_M_dec * (psi_M + 1.0) \
        + production - params.lambda_theta_dec * theta * (psi_M + 1.0)


def psi_from_phi_sigma(phi_sigma: Array, phi_sigma0_max: float) -> Array:
    """Affine map of the nutrient onto [-1, 1]: 2 phi / max|phi(0)| - 1."""
    if not phi_sigma0_max > 0.0:
        raise ConfigurationError(
            f"phi_sigma0_max must be > 0, got {phi_sigma0_max!r}")
    return 2.0 * phi_sigma / phi_sigma0_max - 1.0


def phi_from_psi_sigma(psi_sigma: Array, phi_sigma0_max: float) -> Array:
    if not phi_sigma0_max > 0.0:
        raise ConfigurationError(
            f"phi_sigma0_max must be > 0, got {phi_sigma0_max!r}")
    return phi_sigma0_max * (psi_sigma + 1.0) / 2.0


def psi_from_phi_M(phi_M: Array) -> Array:
    """Affine map of the enzyme onto [-1, 1]: 2 phi_M - 1."""
    return 2.0 * phi_M - 1.0


def phi_from_psi_M(psi_M: Array) -> Array:
    return (psi_M + 1.0) / 2.0


@dataclass
class SimState:
    """The five physical fields at one time level.

    Derived fields (viable fraction, affine psi transforms) are computed on
    demand.  Steppers produce new states rather than mutating old ones.
    """

    t: float
    phi_T: Array
    phi_N: Array
    phi_sigma: Array
    phi_M: Array
    theta: Array

    def phi_V(self) -> Array:
        return cutoff(self.phi_T) - self.phi_N

    def psi_sigma(self, params: ModelParams) -> Array:
        return psi_from_phi_sigma(self.phi_sigma, params.phi_sigma0_max)

    def psi_M(self) -> Array:
        return psi_from_phi_M(self.phi_M)

    def fields(self) -> dict[str, Array]:
        """All exportable fields keyed by their snapshot names."""
        return {
            "phi_T": self.phi_T,
            "phi_N": self.phi_N,
            "phi_V": self.phi_V(),
            "phi_sigma": self.phi_sigma,
            "phi_M": self.phi_M,
            "theta": self.theta,
        }

    def validate(self, grid: GridSpec, params: ModelParams,
                 slack: float = 1e-12,
                 cross_field_slack: float = 1e-9) -> None:
        """Check every pointwise state invariant; raise on breach.

        Invariants: 0 <= phi_N <= phi_T <= 1, phi_sigma in
        [0, phi_sigma0_max], phi_M in [0, 1], theta in [0, theta0_max],
        all within ``slack``, and every entry finite.  The cross-field
        comparison phi_N <= phi_T uses the wider ``cross_field_slack``
        because a receding tumor fringe can legitimately leave a necrotic
        residue of order 1e-12 on nodes where phi_T has clamped to zero.
        """
        for name, arr in (("phi_T", self.phi_T), ("phi_N", self.phi_N),
                          ("phi_sigma", self.phi_sigma), ("phi_M", self.phi_M),
                          ("theta", self.theta)):
            check_field(grid, arr, name)
            if not np.all(np.isfinite(arr)):
                raise StructureViolation(f"non-finite values in {name}",
                                         violations=[(name + "_finite", np.nan, 0.0)])
        bad: list[tuple[str, float, float]] = []

        def _box(name: str, arr: Array, lo: float, hi: float) -> None:
            amin, amax = float(arr.min()), float(arr.max())
            if amin < lo - slack:
                bad.append((f"{name}_min", amin, lo))
            if amax > hi + slack:
                bad.append((f"{name}_max", amax, hi))

        _box("phi_T", self.phi_T, 0.0, 1.0)
        _box("phi_N", self.phi_N, 0.0, 1.0)
        _box("phi_sigma", self.phi_sigma, 0.0, params.phi_sigma0_max)
        _box("phi_M", self.phi_M, 0.0, 1.0)
        _box("theta", self.theta, 0.0, params.theta0_max)
        excess = float((self.phi_N - self.phi_T).max())
        if excess > cross_field_slack:
            bad.append(("phi_N_le_phi_T", excess, 0.0))
        if bad:
            raise StructureViolation("state invariants violated", violations=bad)
