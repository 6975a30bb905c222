"""Self-convergence studies and the fast-transform cost scaling.

Temporal: fixed grid, halved time steps; successive midline-probe
differences shrink as the integrator refines.  Spatial: fixed small time
step, doubled resolution; the second-order stencils show up as an observed
order near 2.  Performance: per-step cost grows like the FFT work
O(N^d log N), far below the O(N^(2d)) of dense linear algebra.

Desk-scale sizes; the study CSVs land in ``runs/demo_convergence``.
"""
from __future__ import annotations

from tumoretd import (GridSpec, make_scenario, perf_scaling,
                      spatial_convergence, temporal_convergence,
                      write_study_csv)

# --- temporal refinement at fixed N ------------------------------------
sc_time = make_scenario(name="demo_time", grid=GridSpec(2, 64), t_final=1.0,
                        tau=2e-3, initial="gaussian_ring", monitors=False)
study_t = temporal_convergence(sc_time, base_tau=2e-3, levels=4,
                               probe_field="psi_sigma")
write_study_csv(study_t, "runs/demo_convergence/temporal_study.csv")
print("temporal refinement (N=64, T=1, psi_sigma probe):")
for k, tau in enumerate(study_t.levels):
    diff = f"{study_t.diffs[k]:.3e}" if k < len(study_t.diffs) else "   --   "
    print(f"  tau = {tau:.2e}   diff to next level = {diff}")

# --- spatial refinement at fixed tau ------------------------------------
sc_space = make_scenario(name="demo_space", grid=GridSpec(2, 32), t_final=0.5,
                         tau=1e-4, initial="gaussian_ring", monitors=False)
study_s = spatial_convergence(sc_space, ns=[32, 64, 128], tau=1e-4,
                              probe_field="phi_sigma")
write_study_csv(study_s, "runs/demo_convergence/spatial_study.csv")
print("\nspatial refinement (tau=1e-4, T=0.5, phi_sigma probe):")
for k, n in enumerate(study_s.levels):
    diff = f"{study_s.diffs[k]:.3e}" if k < len(study_s.diffs) else "   --   "
    order = f"{study_s.orders[k]:.2f}" if k < len(study_s.orders) else "--"
    print(f"  N = {int(n):4d}   diff = {diff}   observed order = {order}")

# --- per-step cost scaling ----------------------------------------------
print("\nper-step cost (median of batched timings):")
for dim, ns in ((2, [64, 128, 256]), (3, [16, 32])):
    rows = perf_scaling(dim, ns)
    for row in rows:
        ratio = "  --" if row.ratio_to_prev != row.ratio_to_prev \
            else f"{row.ratio_to_prev:4.1f}x"
        print(f"  {dim}D N={row.n:4d}: {row.per_step_s * 1e3:8.2f} ms/step  {ratio}")
