"""Half-line boundary solves: velocity trace, layer absence, representation."""

import numpy as np
import pytest

from wavefan import (
    BoundaryData,
    ConfigError,
    SolverConfig,
    WavefanError,
    boundary_layer_check,
    cubic_law,
    hardening_law,
    linear_law,
    solve_boundary,
)

LIN = linear_law(2.0)
HARD = hardening_law()
STEP = BoundaryData(w_b=1.0, v_r=0.0, w_r=0.0)


def test_linear_trace_approaches_rh_value():
    # the far state is connected by a single 2-wave with speed 2, so the
    # inviscid trace is v_r - s (w_b - w_r) = -2; the viscous trace misses
    # it by O(eps)
    errs = []
    for eps in (0.04, 0.02, 0.01):
        sol = solve_boundary(LIN, SolverConfig(eps=eps, n_nodes=1601), STEP)
        assert sol.converged
        err = abs(sol.v0_trace + 2.0)
        assert err <= 5.0 * eps
        errs.append(err)
    assert errs[0] > errs[1] > errs[2]


def test_linear_trace_frozen():
    sol = solve_boundary(LIN, SolverConfig(eps=0.02, n_nodes=1601), STEP)
    assert sol.v0_trace == pytest.approx(-1.9975018349708633, abs=1e-12)
    assert sol.iterations == 2


def test_representation_pins_all_boundary_values():
    sol = solve_boundary(HARD, SolverConfig(eps=0.05, n_nodes=801),
                         BoundaryData(0.4, 0.1, -0.2))
    assert sol.grid.w[0] == 0.4
    assert sol.grid.w[-1] == -0.2
    assert sol.grid.v[-1] == 0.1


def test_hardening_solve_frozen():
    sol = solve_boundary(HARD, SolverConfig(eps=0.05, n_nodes=801),
                         BoundaryData(0.4, 0.1, -0.2))
    assert sol.converged
    assert sol.v0_trace == pytest.approx(-0.5297257302457743, abs=1e-12)
    assert sol.monotone_ok
    # monotone profile: total variation equals the prescribed jump
    assert sol.tv_w == pytest.approx(0.6, abs=1e-12)


def test_no_boundary_layer_on_linear_sweep():
    # w == w_b holds exactly below lam_m / 4 because the measure carries no
    # representable mass there, so the fitted constant vanishes
    consts = []
    for eps in (0.04, 0.02, 0.01):
        sol = solve_boundary(LIN, SolverConfig(eps=eps, n_nodes=1601), STEP)
        rep = boundary_layer_check(sol, eps)
        assert rep.y_upper == pytest.approx(0.5, abs=1e-12)
        assert rep.n_nodes > 0
        consts.append(rep.constant)
    assert consts == [0.0, 0.0, 0.0]


def test_layer_ratio_bound():
    ratios = []
    prev = None
    for eps in (0.04, 0.02, 0.01):
        sol = solve_boundary(LIN, SolverConfig(eps=eps, n_nodes=1601), STEP)
        c = boundary_layer_check(sol, eps).constant
        if prev is not None:
            ratios.append(c / prev if prev > 0 else 0.0)
        prev = c
    assert all(r <= 2.0 for r in ratios)


def test_capillary_boundary_trace():
    sol = solve_boundary(LIN, SolverConfig(eps=0.02, gamma=0.1, n_nodes=1601), STEP)
    assert sol.converged
    assert sol.v0_trace == pytest.approx(-1.9975008467085198, abs=1e-12)
    # capillary concentration sits at sqrt(sigma_w - eps/2)
    assert sol.measure.rho == pytest.approx(np.sqrt(4.0 - 0.01), rel=1e-12)


def test_boundary_data_validation():
    with pytest.raises(ConfigError):
        BoundaryData(w_b=float("nan"), v_r=0.0, w_r=0.0)
    with pytest.raises(ConfigError):
        BoundaryData(w_b=0.0, v_r=float("inf"), w_r=0.0)


def test_rejects_non_hyperbolic_law():
    with pytest.raises(ConfigError):
        solve_boundary(cubic_law(), SolverConfig(eps=0.05, n_nodes=801), STEP)


def test_not_converged_carries_best_effort():
    cfg = SolverConfig(eps=0.05, n_nodes=801, max_iter=1)
    with pytest.raises(WavefanError) as exc:
        solve_boundary(HARD, cfg, BoundaryData(0.4, 0.1, -0.2))
    assert exc.value.name == "not_converged"
    best = exc.value.context["solution"]
    assert best.iterations == 1
    assert not best.converged


def test_to_summary_keys():
    sol = solve_boundary(LIN, SolverConfig(eps=0.02, n_nodes=1601), STEP)
    summary = sol.to_summary()
    for key in ("v0_trace", "tv_w", "tv_v", "iterations", "converged",
                "rho_plus", "w_b", "w_r"):
        assert key in summary
    assert summary["v0_trace"] == sol.v0_trace
