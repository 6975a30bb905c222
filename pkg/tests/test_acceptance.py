"""End-to-end acceptance gate: structure preservation, oracle agreement,
convergence behavior, qualitative dynamics, and per-step cost scaling.

Each test pins one deliverable property of the built system at desk scale;
tolerances and runtime budgets are asserted, not merely reported.
"""
from __future__ import annotations

import time

import numpy as np
import pytest

from oracles import (dense_stabilized_operator, dense_upsilon_apply,
                     picard_trapezoid_ecm, picard_trapezoid_necrotic)
from tumoretd import (GridSpec, ModelParams, heaviside_smooth, initial_state,
                      make_scenario, perf_scaling, run, spatial_convergence,
                      structure_monitor_report, temporal_convergence,
                      trapezoid_N, trapezoid_theta)
from tumoretd.grid import biharmonic, laplacian
from tumoretd.spectral import (apply_phi, build_operator, build_phi_table,
                               dct_forward, dct_inverse, laplacian_eigs)

SLACK = 1e-12


@pytest.fixture(scope="module")
def baseline_t2():
    sc = make_scenario(name="accept_base", grid=GridSpec(2, 64), t_final=2.0,
                       tau=1e-3, initial="gaussian_ring")
    return sc, run(sc)


# 1 ------------------------------------------------------------- MBP
def test_mbp_norms_stay_bounded(baseline_t2):
    sc, report = baseline_t2
    assert report.n_steps == 2000
    assert float(report.monitors["psi_sigma_norm"].max()) <= 1.0 + SLACK
    assert float(report.monitors["psi_M_norm"].max()) <= 1.0 + SLACK
    assert report.wall_time_s < 60.0


# 2 ------------------------------------------- bound preservation
def test_bounds_preserved_every_step(baseline_t2):
    _, report = baseline_t2
    m = report.monitors
    assert report.breaches == []
    assert float(m["phiT_max"].max()) <= 1.0 + SLACK
    assert float(m["phiT_min"].min()) >= -SLACK
    assert float(m["phiN_min"].min()) >= -SLACK
    assert float(m["phiN_max"].max()) <= 1.0 + SLACK
    # phi_N never exceeds phi_T anywhere, at any step
    assert float(m["phiNT_excess_max"].max()) <= SLACK
    theta_min = m["theta_min"]
    assert float(theta_min.min()) >= -SLACK
    assert float(theta_min.max()) <= 1.0 + SLACK
    assert np.all(np.diff(theta_min) <= SLACK)
    assert np.all(np.diff(m["phiN_max"]) >= -SLACK)


# 3 --------------------------------------------- spectral oracle
def test_operator_exponentials_match_dense_oracle():
    start = time.perf_counter()
    g = GridSpec(2, 8)
    p = ModelParams()
    tau = 0.05
    rng = np.random.default_rng(7)
    f = rng.uniform(-1.0, 1.0, g.shape)
    for kind in ("phase_field", "nutrient", "mde"):
        table = build_phi_table(build_operator(g, kind, p), tau)
        a = dense_stabilized_operator(2, 8, kind, p)
        for i, tol in ((0, 1e-10), (1, 1e-9), (2, 1e-9)):
            got = apply_phi(table, i, f)
            want = dense_upsilon_apply(a, i, tau, f)
            assert float(np.max(np.abs(got - want))) <= tol, (kind, i)
    assert time.perf_counter() - start < 5.0


# 4 ------------------------------------- stencil vs transform
def test_stencils_match_spectral_application():
    start = time.perf_counter()
    rng = np.random.default_rng(11)
    for n in (8, 16, 32):
        g = GridSpec(2, n)
        d = laplacian_eigs(g)
        eigs = d[0][:, None] + d[1][None, :]
        for _ in range(20):
            f = rng.uniform(-1.0, 1.0, g.shape)
            coeffs = dct_forward(g, f)
            lap_spec = dct_inverse(g, eigs * coeffs)
            bih_spec = dct_inverse(g, eigs**2 * coeffs)
            lap = laplacian(g, f)
            bih = biharmonic(g, f)
            assert np.max(np.abs(lap - lap_spec)) <= 1e-8 * np.max(np.abs(lap))
            assert np.max(np.abs(bih - bih_spec)) <= 1e-8 * np.max(np.abs(bih))
    assert time.perf_counter() - start < 5.0


# 5 --------------------------------- trapezoid closed forms
def test_trapezoid_closed_forms_match_picard():
    start = time.perf_counter()
    p = ModelParams()
    rng = np.random.default_rng(13)
    n = 1000
    tau = 1.3
    phi_T_n = rng.uniform(0.0, 1.0, n)
    phi_N_n = phi_T_n * rng.uniform(0.0, 1.0, n)
    phi_T_np1 = rng.uniform(0.0, 1.0, n)
    sig_n = rng.uniform(0.0, 1.0, n)
    sig_p = rng.uniform(0.0, 1.0, n)
    got_N = trapezoid_N(phi_N_n, phi_T_n, phi_T_np1, sig_n, sig_p, p, tau)
    want_N = picard_trapezoid_necrotic(
        phi_N_n, phi_T_n, phi_T_np1,
        heaviside_smooth(p.sigma_VN - sig_n, p.eps1),
        heaviside_smooth(p.sigma_VN - sig_p, p.eps1),
        p.lambda_VN, tau)
    assert float(np.max(np.abs(got_N - want_N))) <= 1e-13

    theta_n = rng.uniform(0.0, 1.0, n)
    phi_M_n = rng.uniform(0.0, 1.0, n)
    phi_M_np1 = rng.uniform(0.0, 1.0, n)
    got_t = trapezoid_theta(theta_n, phi_M_n, phi_M_np1, p, tau)
    want_t = picard_trapezoid_ecm(theta_n, phi_M_n, phi_M_np1,
                                  p.lambda_theta_deg, tau)
    assert float(np.max(np.abs(got_t - want_t))) <= 1e-13
    assert time.perf_counter() - start < 1.0


# 6 --------------------------------- temporal self-convergence
def test_temporal_self_convergence_ratios():
    start = time.perf_counter()
    sc = make_scenario(name="accept_time", grid=GridSpec(2, 128), t_final=1.0,
                       tau=2e-3, initial="gaussian_ring", monitors=False)
    study = temporal_convergence(sc, base_tau=2e-3, levels=5,
                                 probe_field="psi_sigma")
    diffs = study.diffs
    assert all(a > b for a, b in zip(diffs, diffs[1:])), diffs
    ratios = [diffs[k] / diffs[k + 1] for k in range(len(diffs) - 1)]
    assert all(r >= 1.8 for r in ratios), (diffs, ratios)
    assert time.perf_counter() - start < 600.0


# 7 ---------------------------------- spatial self-convergence
def test_spatial_self_convergence_order():
    start = time.perf_counter()
    sc = make_scenario(name="accept_space", grid=GridSpec(2, 32), t_final=0.5,
                       tau=1e-4, initial="gaussian_ring", monitors=False)
    study = spatial_convergence(sc, ns=[32, 64, 128], tau=1e-4,
                                probe_field="phi_sigma")
    diffs = study.diffs
    assert all(a > b for a, b in zip(diffs, diffs[1:])), diffs
    assert all(o >= 1.7 for o in study.orders), study.orders
    assert time.perf_counter() - start < 600.0


# 8 -------------------------------------- qualitative dynamics
def test_qualitative_necrosis_ecm_decay_and_drift():
    start = time.perf_counter()

    ring_sc = make_scenario(name="accept_ring", grid=GridSpec(2, 64),
                            t_final=10.0, tau=1e-3, initial="gaussian_ring")
    ring_rep = run(ring_sc)
    phiN_max = ring_rep.monitors["phiN_max"]
    assert float(phiN_max[0]) == 0.0
    assert float(phiN_max.max()) > 0.3

    ring = initial_state(ring_sc).theta >= 0.9
    theta0 = float(initial_state(ring_sc).theta[ring].min())
    theta1 = float(ring_rep.final_state.theta[ring].min())
    assert (theta0 - theta1) / theta0 > 0.10

    drift_sc = make_scenario(name="accept_drift", grid=GridSpec(2, 64),
                             t_final=10.0, tau=1e-3,
                             initial="gaussian_halves",
                             nutrient_right_edge_source=True)
    drift_rep = run(drift_sc)
    com_x = drift_rep.monitors["com_x"]
    assert float(com_x[-1]) > float(com_x[0])

    assert time.perf_counter() - start < 900.0


# 9 --------------------------------------- per-step cost scaling
def test_per_step_cost_scaling():
    start = time.perf_counter()
    rows2 = perf_scaling(2, [128, 256])
    assert rows2[1].ratio_to_prev <= 6.0
    rows3 = perf_scaling(3, [32, 64])
    assert rows3[1].ratio_to_prev <= 12.0
    assert time.perf_counter() - start < 300.0


# 10 ------------------------------------------------- 3D smoke
def test_three_dimensional_smoke():
    start = time.perf_counter()
    sc = make_scenario(name="accept_3d", grid=GridSpec(3, 32), t_final=1.0,
                       tau=8e-3, initial="two_tumors_3d")
    report = run(sc)
    verdict = structure_monitor_report(report)
    assert verdict.passed, verdict.failures[:5]
    assert time.perf_counter() - start < 600.0
