"""Structure-preserving exponential time integration for a five-field
phase-field model of tumor growth with ECM degradation.

The package couples a Cahn-Hilliard-type tumor field to necrotic, nutrient,
matrix-degrading-enzyme, and extracellular-matrix fields on uniform grids
with homogeneous Neumann boundaries.  Linear stiffness is absorbed into
operator exponentials applied via fast cosine transforms; cutoffs and
trapezoidal closed forms keep every field inside its physical bounds, and
per-step monitors verify that they stayed there.
"""
from .errors import (ConfigurationError, NumericalFailure, StructureViolation,
                     TumorEtdError)
from .grid import (GridSpec, div_mobility_grad, integrate, laplacian,
                   quadrature_weights)
from .harness import (ConvergenceStudy, PerfRow, StructureReport,
                      perf_scaling, probe_slice, spatial_convergence,
                      structure_monitor_report, temporal_convergence,
                      write_probe_csv, write_study_csv)
from .model import (ModelParams, SimState, chemical_potential, cutoff,
                    heaviside_smooth, mobility, nonlinear_M, nonlinear_T,
                    nonlinear_sigma, phi_from_psi_M, phi_from_psi_sigma,
                    psi_from_phi_M, psi_from_phi_sigma)
from .scenarios import (MONITOR_CSV_COLUMNS, PRESETS, SNAPSHOT_FIELDS,
                        RunReport, Scenario, initial_state, make_scenario,
                        preset, read_snapshot, run, write_monitor_csv,
                        write_snapshot)
from .spectral import (PhiTable, SpectralOperator, apply_phi, build_operator,
                       build_phi_table, dct_forward, dct_inverse,
                       laplacian_eigs, upsilon)
from .stepper import (StepConfig, Stepper, build_step_operators, etd1_step,
                      etdrk2_step, trapezoid_N, trapezoid_theta)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "NumericalFailure", "StructureViolation",
    "TumorEtdError",
    "GridSpec", "div_mobility_grad", "integrate", "laplacian",
    "quadrature_weights",
    "ConvergenceStudy", "PerfRow", "StructureReport", "perf_scaling",
    "probe_slice", "spatial_convergence", "structure_monitor_report",
    "temporal_convergence", "write_probe_csv", "write_study_csv",
    "ModelParams", "SimState", "chemical_potential", "cutoff",
    "heaviside_smooth", "mobility", "nonlinear_M", "nonlinear_T",
    "nonlinear_sigma", "phi_from_psi_M", "phi_from_psi_sigma",
    "psi_from_phi_M", "psi_from_phi_sigma",
    "MONITOR_CSV_COLUMNS", "PRESETS", "SNAPSHOT_FIELDS", "RunReport",
    "Scenario", "initial_state", "make_scenario", "preset", "read_snapshot",
    "run", "write_monitor_csv", "write_snapshot",
    "PhiTable", "SpectralOperator", "apply_phi", "build_operator",
    "build_phi_table", "dct_forward", "dct_inverse", "laplacian_eigs",
    "upsilon",
    "StepConfig", "Stepper", "build_step_operators", "etd1_step",
    "etdrk2_step", "trapezoid_N", "trapezoid_theta",
    "__version__",
]
