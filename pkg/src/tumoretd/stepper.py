"""One full time step of the coupled system.

The three diffusive fields advance by exponential time differencing in the
cosine basis; the two pointwise ODE fields advance by trapezoidal rules with
closed-form solutions.  A step executes, in order:

1. predictors for phi_T, psi_sigma, psi_M:
   ``X~ = Upsilon_0(L tau) X^n + tau Upsilon_1(L tau) N(old)``;
2. stage fields ``phi_sigma~`` (from psi), ``phi_V~ = clamp(phi_T~) - phi_N^n``,
   ``phi_T^ = clamp(phi_T~)``;
3. correctors ``X = X^/X~ + tau Upsilon_2(L tau) (N(stage) - N(old))`` for
   each of the three fields, where the tumor corrector increments from the
   *clamped* predictor and the stage nonlinearities are evaluated at
   ``(phi_T^, phi_V~, phi_sigma~, theta^n)``;
4. ``phi_T^{n+1} = clamp(phi_T-bar)``; nutrient/enzyme recovered from psi;
5. ``theta^{n+1}`` by the trapezoidal closed form with phi_M^n, phi_M^{n+1};
6. ``phi_N^{n+1}`` by the trapezoidal closed form with phi_T^n, the clamped
   phi_T^{n+1}, phi_sigma^n, and the *predictor* nutrient phi_sigma~;
7. optional clamp of the rightmost nutrient layer to its source value.

The single-stage variant stops after the predictors (with the same clamp and
trapezoidal updates).  After every stage the new fields are checked for
NaN/Inf; after every step the maximum-bound-principle and bound invariants
are asserted with absolute slack 1e-12, aborting instead of silently
repairing (the tumor clamp is part of the scheme; nothing else is clamped).

Trapezoidal closed forms (H is the smooth nutrient switch
``H(sigma_VN - phi_sigma)``, a = tau * lambda_VN / 2, b = tau * lambda_theta_deg / 2):

    phi_N^{n+1} = [(1 - a H^n) phi_N^n + a (H^n phi_T^n + H^{n+1} phi_T^{n+1})]
                  / (1 + a H^{n+1}),
    theta^{n+1} = theta^n (1 - b phi_M^n) / (1 + b phi_M^{n+1}),

valid (and bound-preserving) for tau <= 2/lambda_VN and
tau <= 2/lambda_theta_deg, enforced at configuration time.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigurationError, NumericalFailure, StructureViolation
from .grid import GridSpec
from .model import (ModelParams, SimState, cutoff, heaviside_smooth,
                    nonlinear_M, nonlinear_sigma, nonlinear_T,
                    phi_from_psi_M, phi_from_psi_sigma, psi_from_phi_M,
                    psi_from_phi_sigma)
from .spectral import (PhiTable, apply_phi, build_operator, build_phi_table,
                       etd_predictor_apply)

Array = NDArray[np.float64]

__all__ = [
    "SCHEMES",
    "INVARIANT_SLACK",
    "StepConfig",
    "StepOperators",
    "build_step_operators",
    "trapezoid_N",
    "trapezoid_theta",
    "etd1_step",
    "etdrk2_step",
    "Stepper",
]

SCHEMES = ("etd1", "etdrk2")

#: Absolute tolerance absorbing roundoff in the invariant assertions.
INVARIANT_SLACK = 1e-12


@dataclass(frozen=True)
class StepConfig:
    """Time-step size, scheme selection, and the optional nutrient source."""

    tau: float
    scheme: str = "etdrk2"
    nutrient_right_edge_source: bool = False

    def validate(self, params: ModelParams) -> None:
        if not (np.isfinite(self.tau) and self.tau > 0.0):
            raise ConfigurationError(f"tau must be a positive real, got {self.tau!r}")
        if self.scheme not in SCHEMES:
            raise ConfigurationError(
                f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if params.lambda_VN > 0.0 and self.tau > 2.0 / params.lambda_VN:
            raise ConfigurationError(
                f"tau = {self.tau!r} exceeds the necrosis bound "
                f"2/lambda_VN = {2.0 / params.lambda_VN!r}")
        if params.lambda_theta_deg > 0.0 and self.tau > 2.0 / params.lambda_theta_deg:
            raise ConfigurationError(
                f"tau = {self.tau!r} exceeds the matrix-degradation bound "
                f"2/lambda_theta_deg = {2.0 / params.lambda_theta_deg!r}")


@dataclass(frozen=True)
class StepOperators:
    """The three multiplier tables shared by every step at fixed tau."""

    grid: GridSpec
    tau: float
    phase_field: PhiTable
    nutrient: PhiTable
    mde: PhiTable


def build_step_operators(grid: GridSpec, params: ModelParams, tau: float) -> StepOperators:
    """Diagonalize all three stabilized operators and tabulate Upsilon_i(lambda tau)."""
    tables = {kind: build_phi_table(build_operator(grid, kind, params), tau)
              for kind in ("phase_field", "nutrient", "mde")}
    return StepOperators(grid=grid, tau=tau, **tables)


def _require_tau(tau: float, rate: float, label: str) -> None:
    if not (np.isfinite(tau) and tau > 0.0):
        raise ConfigurationError(f"tau must be a positive real, got {tau!r}")
    if rate > 0.0 and tau > 2.0 / rate:
        raise ConfigurationError(
            f"tau = {tau!r} exceeds the bound 2/{label} = {2.0 / rate!r}")


def trapezoid_N(phi_N_n: Array, phi_T_n: Array, phi_T_np1: Array,
                phi_sigma_n: Array, phi_sigma_pred: Array,
                params: ModelParams, tau: float) -> Array:
    """Closed-form trapezoidal update of the necrotic fraction."""
    _require_tau(tau, params.lambda_VN, "lambda_VN")
    a = 0.5 * tau * params.lambda_VN
    h_n = a * heaviside_smooth(params.sigma_VN - phi_sigma_n, params.eps1)
    h_p = a * heaviside_smooth(params.sigma_VN - phi_sigma_pred, params.eps1)
    return ((1.0 - h_n) * phi_N_n + h_n * phi_T_n + h_p * phi_T_np1) / (1.0 + h_p)


def trapezoid_theta(theta_n: Array, phi_M_n: Array, phi_M_np1: Array,
                    params: ModelParams, tau: float) -> Array:
    """Closed-form trapezoidal update of the matrix density."""
    _require_tau(tau, params.lambda_theta_deg, "lambda_theta_deg")
    b = 0.5 * tau * params.lambda_theta_deg
    return theta_n * (1.0 - b * phi_M_n) / (1.0 + b * phi_M_np1)


def _check_finite(stage: str, **fields: Array) -> None:
    for name, arr in fields.items():
        if not np.all(np.isfinite(arr)):
            raise NumericalFailure(f"non-finite values in {name}", stage=stage)


# The cross-field comparison phi_N <= phi_T is the one bound that the scheme
# does not satisfy exactly: where the tumor fringe recedes through the cutoff
# a node can retain a necrotic residue of order 1e-12 after phi_T clamps to
# zero.  The abort threshold for that single check is therefore wider than
# the roundoff slack used for the unconditional single-field bounds.
CROSS_FIELD_SLACK = 1e-9


def _check_step_invariants(params: ModelParams, new: SimState, theta_old: Array,
                           slack: float = INVARIANT_SLACK) -> None:
    """Assert the MBP and bound invariants of a freshly produced state."""
    bad: list[tuple[str, float, float]] = []
    psi_s_norm = float(np.abs(new.psi_sigma(params)).max())
    if psi_s_norm > 1.0 + slack:
        bad.append(("psi_sigma_norm", psi_s_norm, 1.0))
    psi_m_norm = float(np.abs(new.psi_M()).max())
    if psi_m_norm > 1.0 + slack:
        bad.append(("psi_M_norm", psi_m_norm, 1.0))
    if float(new.phi_T.min()) < -slack or float(new.phi_T.max()) > 1.0 + slack:
        bad.append(("phi_T_box", float(new.phi_T.max()), 1.0))
    if float(new.phi_N.min()) < -slack:
        bad.append(("phi_N_min", float(new.phi_N.min()), 0.0))
    excess = float((new.phi_N - new.phi_T).max())
    if excess > CROSS_FIELD_SLACK:
        bad.append(("phi_N_le_phi_T", excess, 0.0))
    if float(new.theta.min()) < -slack:
        bad.append(("theta_min", float(new.theta.min()), 0.0))
    decrease = float((new.theta - theta_old).max())
    if decrease > slack:
        bad.append(("theta_nonincreasing", decrease, 0.0))
    if bad:
        raise StructureViolation("step broke a structure-preservation invariant",
                                 violations=bad, t=new.t)


def _predict(state: SimState, params: ModelParams, ops: StepOperators):
    """Shared predictor stage; returns old nonlinear terms and predicted fields."""
    grid = ops.grid
    phi_V = cutoff(state.phi_T) - state.phi_N
    psi_s = psi_from_phi_sigma(state.phi_sigma, params.phi_sigma0_max)
    psi_m = psi_from_phi_M(state.phi_M)
    n_T = nonlinear_T(grid, state.phi_T, phi_V, state.phi_sigma, state.theta, params)
    n_s = nonlinear_sigma(phi_V, psi_s, params)
    n_m = nonlinear_M(phi_V, psi_m, state.phi_sigma, state.theta, params)
    _check_finite("nonlinear_terms", n_T=n_T, n_sigma=n_s, n_M=n_m)
    phi_T_pred = etd_predictor_apply(ops.phase_field, state.phi_T, n_T)
    psi_s_pred = etd_predictor_apply(ops.nutrient, psi_s, n_s)
    psi_m_pred = etd_predictor_apply(ops.mde, psi_m, n_m)
    _check_finite("predictor", phi_T=phi_T_pred, psi_sigma=psi_s_pred,
                  psi_M=psi_m_pred)
    return (n_T, n_s, n_m), (phi_T_pred, psi_s_pred, psi_m_pred)


def _finalize(state: SimState, params: ModelParams, cfg: StepConfig,
              tau: float, phi_T_new: Array, psi_s_new: Array, psi_m_new: Array,
              phi_sigma_pred: Array) -> SimState:
    """Trapezoidal updates, optional nutrient source, and invariant checks."""
    phi_sigma_new = phi_from_psi_sigma(psi_s_new, params.phi_sigma0_max)
    phi_M_new = phi_from_psi_M(psi_m_new)
    theta_new = trapezoid_theta(state.theta, state.phi_M, phi_M_new, params, tau)
    phi_N_new = trapezoid_N(state.phi_N, state.phi_T, phi_T_new,
                            state.phi_sigma, phi_sigma_pred, params, tau)
    _check_finite("trapezoid", phi_N=phi_N_new, theta=theta_new)
    if cfg.nutrient_right_edge_source:
        phi_sigma_new[..., -1] = params.phi_sigma0_max
    new = SimState(t=state.t + tau, phi_T=phi_T_new, phi_N=phi_N_new,
                   phi_sigma=phi_sigma_new, phi_M=phi_M_new, theta=theta_new)
    _check_step_invariants(params, new, state.theta)
    return new


def etd1_step(state: SimState, params: ModelParams, cfg: StepConfig,
              ops: StepOperators) -> SimState:
    """Single-stage exponential step (the predictor) plus trapezoidal updates."""
    tau = ops.tau
    _, (phi_T_pred, psi_s_pred, psi_m_pred) = _predict(state, params, ops)
    phi_T_new = cutoff(phi_T_pred)
    phi_sigma_pred = phi_from_psi_sigma(psi_s_pred, params.phi_sigma0_max)
    return _finalize(state, params, cfg, tau, phi_T_new, psi_s_pred,
                     psi_m_pred, phi_sigma_pred)


def etdrk2_step(state: SimState, params: ModelParams, cfg: StepConfig,
                ops: StepOperators) -> SimState:
    """Two-stage exponential step with the tumor corrector started from the
    clamped predictor."""
    grid, tau = ops.grid, ops.tau
    (n_T, n_s, n_m), (phi_T_pred, psi_s_pred, psi_m_pred) = \
        _predict(state, params, ops)
    phi_sigma_pred = phi_from_psi_sigma(psi_s_pred, params.phi_sigma0_max)
    phi_T_hat = cutoff(phi_T_pred)
    phi_V_stage = phi_T_hat - state.phi_N
    n_T_stage = nonlinear_T(grid, phi_T_hat, phi_V_stage, phi_sigma_pred,
                            state.theta, params)
    n_s_stage = nonlinear_sigma(phi_V_stage, psi_s_pred, params)
    n_m_stage = nonlinear_M(phi_V_stage, psi_m_pred, phi_sigma_pred,
                            state.theta, params)
    _check_finite("stage_nonlinear_terms", n_T=n_T_stage, n_sigma=n_s_stage,
                  n_M=n_m_stage)
    phi_T_bar = phi_T_hat + tau * apply_phi(ops.phase_field, 2, n_T_stage - n_T)
    psi_s_new = psi_s_pred + tau * apply_phi(ops.nutrient, 2, n_s_stage - n_s)
    psi_m_new = psi_m_pred + tau * apply_phi(ops.mde, 2, n_m_stage - n_m)
    _check_finite("corrector", phi_T=phi_T_bar, psi_sigma=psi_s_new,
                  psi_M=psi_m_new)
    phi_T_new = cutoff(phi_T_bar)
    return _finalize(state, params, cfg, tau, phi_T_new, psi_s_new,
                     psi_m_new, phi_sigma_pred)


class Stepper:
    """Bundles validated configuration with the precomputed multiplier tables.

    The tables depend only on (grid, params, tau) and are reused across every
    step; construct a new Stepper to change tau.
    """

    def __init__(self, grid: GridSpec, params: ModelParams, cfg: StepConfig):
        cfg.validate(params)
        self.grid = grid
        self.params = params
        self.cfg = cfg
        self.ops = build_step_operators(grid, params, cfg.tau)
        self._step = etdrk2_step if cfg.scheme == "etdrk2" else etd1_step

    def step(self, state: SimState) -> SimState:
        return self._step(state, self.params, self.cfg, self.ops)
