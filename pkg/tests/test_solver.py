"""Fixed-point solver: linear exactness, pairing, symmetry, failure modes."""

import numpy as np
import pytest

from wavefan import (
    ConfigError,
    RiemannData,
    SolverConfig,
    WavefanError,
    apply_T,
    auto_domain,
    cubic_law,
    hardening_law,
    linear_law,
    solve_excised,
    solve_profile,
)
from wavefan.measures import WaveMeasure
from wavefan.solver import delta0_cutoff, middle_state, reconstruct_v


LIN = linear_law(2.0)
HARD = hardening_law()
STEP = RiemannData(0.0, 0.0, 0.0, 1.0)


def test_linear_middle_state_exact():
    # sigma = 4w, data (0,0,0,1): the exact middle state is 1/2 and the
    # measures are built from a constant sigma_w, so the iteration lands
    # on it in two sweeps
    sol = solve_profile(LIN, SolverConfig(eps=0.05, n_nodes=801), STEP)
    assert sol.converged
    assert sol.iterations == 2
    assert sol.w_star == 0.5
    assert abs(sol.w_star - 0.5) <= 5 * 0.05
    assert sol.conservation_defect <= 1e-14


def test_linear_rho_and_tv():
    sol = solve_profile(LIN, SolverConfig(eps=0.05, n_nodes=801), STEP)
    rm, rp = sol.rho_candidates
    assert rp == pytest.approx(np.sqrt(4.0 - 0.05), abs=1e-12)
    assert rm == pytest.approx(-np.sqrt(4.0 - 0.05), abs=1e-12)
    assert sol.tv_w == pytest.approx(1.0, abs=1e-12)
    # v variation ~ c0 |dw| for the linear law
    assert sol.tv_v == pytest.approx(2.0, abs=0.05)
    assert sol.monotone_ok
    assert sol.l_margin_ok


def test_linear_middle_state_eps_scaling():
    for eps in (0.1, 0.05, 0.025):
        sol = solve_profile(LIN, SolverConfig(eps=eps, n_nodes=1201), STEP)
        assert abs(sol.w_star - 0.5) <= 5 * eps


def test_conservation_pairing_exact():
    # the moment quadrature pairs with the v reconstruction: the closure
    # defect is roundoff, far below the fixed-point tolerance
    sol = solve_profile(HARD, SolverConfig(eps=0.05, n_nodes=1201, max_iter=400),
                        RiemannData(0.2, -0.5, -0.3, 0.6))
    assert sol.converged
    assert sol.conservation_defect <= 1e-8


def test_idempotence_at_fixed_point():
    cfg = SolverConfig(eps=0.05, n_nodes=1201, max_iter=400)
    sol = solve_profile(HARD, cfg, RiemannData(0.2, -0.5, -0.3, 0.6))
    nxt, _ = apply_T(sol.grid, HARD, cfg, sol.data)
    assert float(np.max(np.abs(nxt.w - sol.grid.w))) <= cfg.tol


def test_mirror_data_bitwise():
    # the mirror map y -> -y, v -> -v sends data (vl, wl, vr, wr) to
    # (-vr, wr, -vl, wl); both runs do identical arithmetic through the
    # plus-side formulas, so the w profiles are bitwise reversals
    cfg = SolverConfig(eps=0.05, n_nodes=1201, max_iter=400)
    a = solve_profile(HARD, cfg, RiemannData(0.3, -0.2, -0.1, 0.4))
    b = solve_profile(HARD, cfg, RiemannData(0.1, 0.4, -0.3, -0.2))
    assert np.array_equal(a.grid.w, b.grid.w[::-1])
    assert a.w_star == b.w_star
    # v mirrors with a sign, up to the conservation defect
    np.testing.assert_allclose(a.grid.v, -b.grid.v[::-1], atol=1e-8)


def test_v_reconstruction_endpoints():
    cfg = SolverConfig(eps=0.05, n_nodes=1201, max_iter=400)
    data = RiemannData(0.2, -0.5, -0.3, 0.6)
    sol = solve_profile(HARD, cfg, data)
    v, defect = reconstruct_v(sol.grid, data)
    assert v[0] == data.v_l
    assert defect <= 1e-8
    assert abs(v[-1] - data.v_r) == defect


def test_to_summary_keys():
    sol = solve_profile(LIN, SolverConfig(eps=0.05, n_nodes=801), STEP)
    summary = sol.to_summary()
    for key in ("w_star", "v_star", "tv_w", "tv_v", "weighted_tv_w",
                "conservation_defect", "residual_ode", "iterations",
                "converged", "rho_minus", "rho_plus", "denominator_D"):
        assert key in summary, key
    assert summary["converged"] is True


def test_auto_domain_exceeds_speeds():
    L = auto_domain(HARD, RiemannData(0.0, -1.0, 0.5, 1.0))
    assert L >= 2.0 + 2.0  # lam_M = 2 at |w| = 1, plus the margin
    sol = solve_profile(HARD, SolverConfig(eps=0.05, n_nodes=1201, max_iter=400),
                        RiemannData(0.0, -1.0, 0.5, 1.0))
    assert sol.l_margin_ok


def test_warm_start_accelerates():
    cfg = SolverConfig(eps=0.05, n_nodes=1201, max_iter=400)
    data = RiemannData(0.2, -0.5, -0.3, 0.6)
    cold = solve_profile(HARD, cfg, data)
    warm = solve_profile(HARD, cfg, data, warm_start=cold)
    assert warm.converged
    assert warm.iterations <= 2
    assert warm.w_star == pytest.approx(cold.w_star, abs=1e-9)


def test_not_converged_carries_best_effort():
    with pytest.raises(WavefanError) as exc:
        solve_profile(HARD, SolverConfig(eps=0.05, n_nodes=1201, max_iter=1),
                      RiemannData(0.2, -0.5, -0.3, 0.6))
    err = exc.value
    assert err.name == "not_converged"
    sol = err.context["solution"]
    assert sol.converged is False
    assert sol.iterations == 1
    assert len(err.context["history"]) == 1


def test_denominator_collapse():
    # both measures concentrated at the axis: the closure has no moment arm
    h = 1e-10
    plus = WaveMeasure(
        side="plus",
        support_nodes=np.array([0.0, h, 4.0]),
        density=np.array([2.0 / h, 0.0, 0.0]),
        exponent=np.zeros(3),
        rho=1.0,
        amplitude_prefactor=1.0,
        first_moment=0.0,
        lam_m=1.0,
        lam_M=1.0,
    )
    minus = WaveMeasure(
        side="minus",
        support_nodes=np.array([-4.0, -h, 0.0]),
        density=np.array([0.0, 0.0, 2.0 / h]),
        exponent=np.zeros(3),
        rho=-1.0,
        amplitude_prefactor=1.0,
        first_moment=0.0,
        lam_m=1.0,
        lam_M=1.0,
    )
    with pytest.raises(WavefanError) as exc:
        middle_state(minus, plus, STEP)
    assert exc.value.name == "denominator_collapse"


def test_config_validation():
    with pytest.raises(ConfigError):
        SolverConfig(eps=0.0)
    with pytest.raises(ConfigError):
        SolverConfig(eps=0.05, gamma=-0.1)
    with pytest.raises(ConfigError):
        SolverConfig(eps=0.05, gamma=0.3)
    with pytest.raises(ConfigError):
        SolverConfig(eps=0.05, damping=0.0)
    with pytest.raises(ConfigError):
        SolverConfig(eps=0.05, max_iter=0)
    with pytest.raises(ConfigError):
        SolverConfig(eps=0.05, L=0.5, excision_delta=1.0)
    with pytest.raises(ConfigError):
        RiemannData(0.0, float("nan"), 0.0, 1.0)


# ------------------------------------------------------------ excised solves


def test_excised_needs_positive_delta():
    with pytest.raises(ConfigError):
        solve_excised(cubic_law(), SolverConfig(eps=0.05, L=4.0), STEP, 0.0)


def test_capillary_cutoff_enforced():
    cub = cubic_law()
    d0 = delta0_cutoff(cub, 0.125)
    assert d0 == 1.0  # sqrt(4 * 1 * (1/8) / (1/2))
    cfg = SolverConfig(eps=0.05, gamma=0.125, L=4.0, n_nodes=1201)
    with pytest.raises(WavefanError) as exc:
        solve_excised(cub, cfg, RiemannData(0.0, -1.2, 0.1, 1.2), 0.5 * d0)
    assert exc.value.name == "delta_below_cutoff"


def test_delta0_cutoff_values():
    cub = cubic_law()
    assert delta0_cutoff(cub, 0.01) == pytest.approx(0.2041241452319315, abs=1e-15)
    assert delta0_cutoff(cub, 0.05) == 0.5
    with pytest.raises(ConfigError):
        delta0_cutoff(cub, 0.25)
    with pytest.raises(ConfigError):
        delta0_cutoff(cub, 0.0)


def test_viscous_excised_phase_solve():
    # the viscous branch accepts any positive excision; the straddled datum
    # converges at delta = 1 from the cold start
    cub = cubic_law()
    cfg = SolverConfig(eps=0.05, gamma=0.0, n_nodes=1601, L=4.0, max_iter=600)
    sol = solve_excised(cub, cfg, RiemannData(0.0, -1.2, 0.1, 1.2), 1.0)
    assert sol.converged
    assert abs(sol.grid.nodes).min() >= 1.0 - 1e-12
    assert sol.w_star == pytest.approx(0.048312, abs=2e-4)


def test_excised_warm_start_chain():
    # halving the excision with a warm start stays convergent where the
    # cold start cycles
    cub = cubic_law()
    cfg = SolverConfig(eps=0.05, gamma=0.0, n_nodes=1601, L=4.0, max_iter=600)
    data = RiemannData(0.0, -1.2, 0.1, 1.2)
    prev = solve_excised(cub, cfg, data, 1.0)
    nxt = solve_excised(cub, cfg, data, 0.5, warm_start=prev)
    assert nxt.converged
    assert nxt.w_star > prev.w_star  # the middle state drifts as delta shrinks
