"""Generalized eigenstructure: pencil solves, closed form, perturbation orders,
admissibility records, and the two Lax conditions."""

import numpy as np
import pytest

from wavefan import (
    ConfigError,
    DiffusionSystem,
    WavefanError,
    admissibility_check,
    generalized_eigen,
    generalized_speed,
    hardening_law,
    lax_equivalence,
    linear_law,
    perturbation_scaling,
    standard_frames,
    two_by_two_closed_form,
)

A22 = np.array([[0.7, 1.1], [0.7, 2.7]])
SYM = np.array([[0.0, 1.0], [1.0, 0.0]])
HARD = hardening_law()


def _const_system(A, B):
    n = A.shape[0]
    return DiffusionSystem(n=n, A=lambda u: A, B=lambda u: B)


def _p_system(law, B=None):
    # conservative p-system in (v, w): A = [[0, -sigma_w], [-1, 0]]
    Bm = np.eye(2) if B is None else B
    return DiffusionSystem(
        n=2,
        A=lambda u: np.array([[0.0, -float(law.sigma_w(u[1]))], [-1.0, 0.0]]),
        B=lambda u: Bm,
    )


def _two_shock(law, w_minus, w_plus, v_minus=0.0):
    s = np.sqrt((law.sigma(w_plus) - law.sigma(w_minus)) / (w_plus - w_minus))
    v_plus = v_minus - s * (w_plus - w_minus)
    return (np.array([v_minus, w_minus]), np.array([v_plus, w_plus]), float(s))


# --------------------------------------------------------------------------
# pencil solves


def test_identity_diffusion_reduces_to_standard_frames():
    sys_i = _const_system(A22, np.eye(2))
    lam, L0, R0 = standard_frames(A22)
    y = 0.3
    pairs = generalized_eigen(sys_i, [0.0, 0.0], y)
    for j, p in enumerate(pairs):
        assert p.mu == pytest.approx(-y + lam[j], abs=1e-12)
        assert np.linalg.norm(p.r_hat - R0[:, j]) <= 1e-12
        assert np.linalg.norm(p.l_hat - L0[j]) <= 1e-12


def test_bi_orthonormality_and_separation():
    for n, lams in ((2, [1.0, 4.0]), (3, [1.0, 2.0, 5.0]), (4, [0.5, 1.0, 2.0, 3.0])):
        A = np.diag(lams)
        B = np.eye(n) + 0.02 * (np.ones((n, n)) + np.eye(n))
        pairs = generalized_eigen(_const_system(A, B), np.zeros(n), 0.2)
        mus = np.array([p.mu for p in pairs])
        assert np.all(np.diff(mus) > 0)
        gram = np.array(
            [[float(pairs[i].l_hat @ B @ pairs[j].r_hat) for j in range(n)]
             for i in range(n)]
        )
        assert np.max(np.abs(gram - np.eye(n))) <= 1e-10


def test_singular_b_raises():
    sys_b = _const_system(np.diag([1.0, 2.0]), np.array([[1.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(WavefanError) as exc:
        generalized_eigen(sys_b, [0.0, 0.0], 0.0)
    assert exc.value.name == "pencil_degenerate"


def test_complex_roots_raise():
    # b12 b21 >> b11 b22 pushes the pencil discriminant negative
    sys_b = _const_system(np.diag([1.0, 4.0]), np.array([[1.0, 3.0], [3.0, 1.0]]))
    with pytest.raises(WavefanError) as exc:
        generalized_eigen(sys_b, [0.0, 0.0], 2.5)
    assert exc.value.name == "complex_pencil"


def test_map_shape_validation():
    bad = DiffusionSystem(n=2, A=lambda u: np.zeros((3, 3)), B=lambda u: np.eye(2))
    with pytest.raises(ConfigError):
        bad.a_at([0.0, 0.0])


# --------------------------------------------------------------------------
# 2x2 closed form


def test_closed_form_frozen_pair():
    b = np.eye(2) + 0.1 * SYM
    mu1, mu2 = two_by_two_closed_form(b, 1.0, 4.0, 0.0)
    assert mu1 == pytest.approx(0.9966923282402469, abs=1e-14)
    assert mu2 == pytest.approx(4.053812722264803, abs=1e-14)


def test_closed_form_matches_charpoly_roots():
    # random admissible transformed entries against the direct quadratic
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(300):
        b11, b22 = rng.uniform(0.5, 2.0, 2)
        beta = rng.uniform(0.05, 0.95)
        b12 = rng.uniform(0.1, 1.0)
        b21 = beta * b11 * b22 / b12
        lam1 = rng.uniform(-1.0, 1.0)
        lam2 = lam1 + rng.uniform(0.5, 3.0)
        y = rng.uniform(-2.0, 2.0)
        bt = np.array([[b11, b12], [b21, b22]])
        mu1, mu2 = two_by_two_closed_form(bt, lam1, lam2, y)
        M = np.diag([lam1, lam2]) - y * np.eye(2)
        c2 = np.linalg.det(bt)
        c1 = M[0, 0] * bt[1, 1] + M[1, 1] * bt[0, 0] - M[0, 1] * bt[1, 0] - M[1, 0] * bt[0, 1]
        roots = np.sort(np.roots([c2, -c1, np.linalg.det(M)]).real)
        worst = max(worst, abs(mu1 - roots[0]), abs(mu2 - roots[1]))
    assert worst <= 1e-10


def test_closed_form_rejects_inadmissible_entries():
    with pytest.raises(WavefanError) as exc:
        two_by_two_closed_form(np.array([[-1.0, 0.1], [0.1, 1.0]]), 1.0, 4.0, 0.0)
    assert exc.value.name == "beta_out_of_range"
    with pytest.raises(WavefanError):
        # beta = 9 > 1
        two_by_two_closed_form(np.array([[1.0, 3.0], [3.0, 1.0]]), 1.0, 4.0, 0.0)


def test_admissibility_records_flag_without_raising():
    recs = admissibility_check(_const_system(A22, np.eye(2)), [[0.0, 0.0]])
    # B = I sits on the boundary of the inequalities: flagged, not an error
    assert not recs[0].cross_pos
    assert not recs[0].passed

    neg = _const_system(A22, np.array([[-1.0, 0.1], [0.1, 1.0]]))
    assert not admissibility_check(neg, [[0.0, 0.0]])[0].b11_pos

    ok = _const_system(A22, np.eye(2) + 0.1 * SYM)
    rec = admissibility_check(ok, [[0.0, 0.0]])[0]
    assert rec.passed
    assert 0.0 < rec.beta < 1.0


# --------------------------------------------------------------------------
# perturbation orders


def test_perturbation_first_order_slopes():
    # T has nonzero diagonal in the eigenframe of A, so every deviation is
    # genuinely first order in eta
    T = np.array([[0.3, 0.1], [0.1, 0.4]])
    rep = perturbation_scaling(lambda u: A22, lambda u: T, [0.0, 0.0], 0.3,
                               [0.1, 0.05, 0.025])
    for slope in (rep.slope_mu, rep.slope_r, rep.slope_l, rep.slope_cross):
        assert 0.9 <= slope <= 1.1
    assert np.all(np.diff(rep.dev_mu) < 0)
    assert np.all(rep.dev_cross > 0)


def test_perturbation_needs_two_etas():
    with pytest.raises(ConfigError):
        perturbation_scaling(lambda u: A22, lambda u: SYM, [0.0, 0.0], 0.0, [0.1])


# --------------------------------------------------------------------------
# Lax comparisons


def test_lax_identity_diffusion_two_shock():
    shock = _two_shock(HARD, 0.7, 0.3)
    verdict = lax_equivalence(_p_system(HARD), shock)
    assert verdict.family == 1
    assert verdict.standard_lax
    assert verdict.generalized_lax
    assert not verdict.marginal
    # impinging characteristics around s = 1.3379...
    assert verdict.lambda_plus < shock[2] < verdict.lambda_minus
    # with B = I the generalized speeds collapse onto the standard ones
    assert verdict.lambda_hat_minus == pytest.approx(verdict.lambda_minus, abs=1e-9)
    assert verdict.lambda_hat_plus == pytest.approx(verdict.lambda_plus, abs=1e-9)


def test_lax_agreement_under_small_perturbation():
    B = np.eye(2) + 0.05 * SYM
    rng = np.random.default_rng(3)
    total = 0
    for _ in range(30):
        w_minus = rng.uniform(0.35, 0.8)
        w_plus = w_minus - rng.uniform(0.1, 0.25)
        shock = _two_shock(HARD, w_minus, w_plus, v_minus=rng.uniform(-0.5, 0.5))
        a = lax_equivalence(_p_system(HARD), shock)
        b = lax_equivalence(_p_system(HARD, B), shock)
        if a.marginal or b.marginal:
            continue
        total += 1
        assert a.standard_lax == b.generalized_lax
    assert total >= 20


def test_lax_linearly_degenerate_is_marginal():
    lin = linear_law(2.0)
    shock = (np.array([0.0, 0.0]), np.array([-2.0, 1.0]), 2.0)
    verdict = lax_equivalence(_p_system(lin), shock)
    assert verdict.marginal


def test_lax_gnl_violation_raises():
    # the segment w: 0.5 -> -0.3 crosses the inflection of the stress
    with pytest.raises(WavefanError) as exc:
        lax_equivalence(_p_system(HARD), _two_shock(HARD, 0.5, -0.3))
    assert exc.value.name == "gnl_violated"


def test_generalized_speed_identity_diffusion():
    speeds = generalized_speed(_p_system(HARD), np.array([0.0, 0.5]), 0.0)
    lam = np.sqrt(float(HARD.sigma_w(0.5)))
    assert speeds[0] == pytest.approx(-lam, abs=1e-9)
    assert speeds[1] == pytest.approx(lam, abs=1e-9)
