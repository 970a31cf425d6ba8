"""Self-similar Riemann solver: middle state, fixed point, reconstruction.

The two-point problem on [-L, L] is closed by a single scalar unknown, the
middle state w*. Given a profile iterate w, the two wave measures phi-/phi+
are built from it, w* follows from the moment closure

    w* = (v_r - v_l + w_r I+ - w_l I-) / (I+ - I-),   I+- = moment of phi+-,

and the next profile is the endpoint-pinned representation

    w(y) = w_l + (w* - w_l) int_{-L}^y phi-   (y < 0),
    w(y) = w_r + (w* - w_r) int_y^L  phi+    (y > 0),

the same sign convention on both branches. Iterating this map with optional
damping is the whole solver; v is recovered afterwards from v' = -y w'.

Moment quadrature pairing: the moments I+- use cell-midpoint y times the
trapezoid cell mass. The v-reconstruction uses cell-midpoint y times the
nodal w increment, which the representation makes equal to (w*-w_end) times
the same cell mass. The closure defect |v(L) - v_r| is therefore exactly the
fixed-point residual plus roundoff, never a quadrature mismatch.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .constitutive import StressLaw
from .errors import ConfigError, WavefanError
from .measures import (
    ProfileGrid,
    WaveMeasure,
    build_phi_capillary,
    build_phi_viscous,
    make_grid,
)

DENOMINATOR_FLOOR = 1e-8


@dataclass(frozen=True)
class RiemannData:
    """Far-field states (v_l, w_l) at y = -L and (v_r, w_r) at y = +L."""

    v_l: float
    w_l: float
    v_r: float
    w_r: float

    def __post_init__(self):
        for name in ("v_l", "w_l", "v_r", "w_r"):
            if not np.isfinite(getattr(self, name)):
                raise ConfigError(f"RiemannData.{name} must be finite")


@dataclass(frozen=True)
class SolverConfig:
    """Run parameters for one self-similar solve.

    L = None picks the domain automatically: the largest characteristic
    speed over the a-priori state box, plus 2. gamma = 0 selects the
    viscous-only branch; gamma > 0 the viscous-capillary one with the
    implied capillarity delta = gamma * eps^2.
    """

    eps: float
    gamma: float = 0.0
    L: float | None = None
    n_nodes: int = 2001
    excision_delta: float = 0.0
    damping: float = 1.0
    tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if self.eps <= 0:
            raise ConfigError("eps must be > 0")
        if self.gamma < 0:
            raise ConfigError("gamma must be >= 0")
        if self.gamma >= 0.25:
            raise ConfigError("gamma must be < 1/4 for the capillary branch")
        if not 0.0 < self.damping <= 1.0:
            raise ConfigError("damping must lie in (0, 1]")
        if self.tol <= 0:
            raise ConfigError("tol must be > 0")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be >= 1")
        if self.excision_delta < 0:
            raise ConfigError("excision_delta must be >= 0")
        if self.L is not None and self.L <= self.excision_delta:
            raise ConfigError("L must exceed excision_delta")


@dataclass(frozen=True)
class MiddleState:
    w_star: float
    denominator: float
    moment_minus: float
    moment_plus: float
    bound_value: float
    bound_ok: bool


@dataclass
class SelfSimilarSolution:
    """Converged (or best-effort) profile with its diagnostics.

    v is reconstructed from w after the fixed point; conservation_defect is
    |v(L) - v_r|. weighted_tv_w and near_axis_sup are the phase-regime
    diagnostics sup|y w| over delta <= |y| <= 1 and int |y| |dw|.
    """

    grid: ProfileGrid
    data: RiemannData
    config: SolverConfig
    w_star: float
    v_star: float
    tv_w: float
    tv_v: float
    weighted_tv_w: float
    iterations: int
    converged: bool
    residual_ode: float
    conservation_defect: float
    denominator: float
    measures: tuple
    change_history: list = field(default_factory=list)
    lam_m: float = float("nan")
    lam_M: float = float("nan")
    monotone_ok: bool = True
    l_margin_ok: bool = True
    near_axis_sup: float = 0.0
    rho_candidates: tuple = ()

    def to_summary(self) -> dict:
        phi_minus, phi_plus = self.measures
        return {
            "w_star": self.w_star,
            "v_star": self.v_star,
            "tv_w": self.tv_w,
            "tv_v": self.tv_v,
            "weighted_tv_w": self.weighted_tv_w,
            "conservation_defect": self.conservation_defect,
            "residual_ode": self.residual_ode,
            "iterations": self.iterations,
            "converged": self.converged,
            "rho_minus": phi_minus.rho,
            "rho_plus": phi_plus.rho,
            "denominator_D": self.denominator,
        }


# --------------------------------------------------------------------------
# middle state


def _cell_masses(measure: WaveMeasure):
    """(s_mid, dm) per cell in outward |y| order; dm sums to 1 exactly."""
    y = measure.support_nodes
    d = measure.density
    if measure.side == "minus":
        y, d = y[::-1], d[::-1]
    s = np.abs(y)
    dm = 0.5 * (d[:-1] + d[1:]) * np.diff(s)
    s_mid = 0.5 * (s[:-1] + s[1:])
    return s_mid, dm


def paired_moment(measure: WaveMeasure) -> float:
    """Signed moment int y phi dy by the cell-midpoint rule.

    This quadrature, not the plain trapezoid of y*density, is what pairs
    with reconstruct_v; see the module docstring.
    """
    s_mid, dm = _cell_masses(measure)
    m = float(np.dot(s_mid, dm))
    return -m if measure.side == "minus" else m


def middle_state(phi_minus: WaveMeasure, phi_plus: WaveMeasure, data: RiemannData) -> MiddleState:
    """Moment closure for w*; raises denominator_collapse when both measures
    concentrate at the axis (phase regime without excision)."""
    i_minus = paired_moment(phi_minus)
    i_plus = paired_moment(phi_plus)
    D = i_plus - i_minus
    if D < DENOMINATOR_FLOOR:
        raise WavefanError(
            "denominator_collapse",
            f"moment denominator {D:.3e} below {DENOMINATOR_FLOOR:.0e}",
            denominator=D,
        )
    # moment terms are grouped so the sum commutes with the mirror map
    # (v_l, w_l, v_r, w_r) -> (-v_r, w_r, -v_l, w_l) at bit level
    w_star = ((data.v_r - data.v_l) + (data.w_r * i_plus - data.w_l * i_minus)) / D
    bound = max(abs(data.w_l), abs(data.w_r)) + abs(data.v_r - data.v_l) / D
    return MiddleState(
        w_star=float(w_star),
        denominator=float(D),
        moment_minus=float(i_minus),
        moment_plus=float(i_plus),
        bound_value=float(bound),
        bound_ok=bool(abs(w_star) <= bound * (1.0 + 1e-12)),
    )


# --------------------------------------------------------------------------
# representation and T


def _build_measures(law, grid, config):
    if config.gamma > 0.0:
        fm = build_phi_capillary(law, grid, config.eps, config.gamma, "minus")
        fp = build_phi_capillary(law, grid, config.eps, config.gamma, "plus")
    else:
        fm = build_phi_viscous(law, grid, config.eps, "minus")
        fp = build_phi_viscous(law, grid, config.eps, "plus")
    return fm, fp


def _represent_w(grid: ProfileGrid, fm: WaveMeasure, fp: WaveMeasure, w_star: float, data):
    """Endpoint-pinned profile from the cumulative measure masses."""
    w = np.empty_like(grid.nodes)
    for measure, w_end in ((fm, data.w_l), (fp, data.w_r)):
        idx = grid.side_indices(measure.side)
        _, dm = _cell_masses(measure)
        cum = np.empty(len(idx))
        cum[0] = 0.0
        np.cumsum(dm, out=cum[1:])
        # remaining mass from s outward to L: 1 at the axis, ~0 at L
        w[idx] = w_end + (w_star - w_end) * (1.0 - cum)
        w[idx[-1]] = w_end  # pin the far endpoint exactly
        w[idx[0]] = w_star  # and the axis value, not w_end + (w*-w_end)*1
    return w


@dataclass(frozen=True)
class TReport:
    middle: MiddleState
    phi_minus: WaveMeasure
    phi_plus: WaveMeasure


def apply_T(grid: ProfileGrid, law: StressLaw, config: SolverConfig, data: RiemannData):
    """One fixed-point sweep: measures from grid.w, then w*, then the new w.

    Returns (next_grid, TReport). The input grid is not modified.
    """
    fm, fp = _build_measures(law, grid, config)
    mid = middle_state(fm, fp, data)
    w_next = _represent_w(grid, fm, fp, mid.w_star, data)
    if not np.isfinite(w_next).all():
        raise WavefanError("nan_detected", "non-finite profile after T sweep")
    nxt = replace(grid, w=w_next, v=None)
    return nxt, TReport(middle=mid, phi_minus=fm, phi_plus=fp)


# --------------------------------------------------------------------------
# initial guess and domain sizing


def _guess_speed(law: StressLaw, data: RiemannData) -> float:
    c2 = float(law.sigma_w(0.5 * (data.w_l + data.w_r)))
    if c2 < 0.25:
        c2 = max(float(law.sigma_w(data.w_l)), float(law.sigma_w(data.w_r)))
    return np.sqrt(max(c2, 0.25))


def initial_guess(law: StressLaw, grid: ProfileGrid, data: RiemannData) -> np.ndarray:
    """Exact linear-law Riemann profile at the frozen mean sound speed,
    smoothed by one trapezoid pass."""
    c = _guess_speed(law, data)
    w_mid = 0.5 * (data.w_l + data.w_r) + (data.v_r - data.v_l) / (2.0 * c)
    y = grid.nodes
    w = np.where(y < -c, data.w_l, np.where(y > c, data.w_r, w_mid))
    sm = w.copy()
    # neighbor pair is summed first so the stencil commutes with y -> -y
    # at bit level (float addition is commutative but not associative)
    sm[1:-1] = 0.5 * w[1:-1] + 0.25 * (w[:-2] + w[2:])
    return sm


def auto_domain(law: StressLaw, data: RiemannData) -> float:
    """L = max characteristic speed over the a-priori state box, plus 2."""
    c0 = np.sqrt(law.c0_sq) if law.c0_sq > 0 else 1.0
    box = max(abs(data.w_l), abs(data.w_r)) + abs(data.v_r - data.v_l) / c0
    ws = np.linspace(-box, box, 2001)
    lam2 = float(np.max(law.sigma_w(ws)))
    return float(np.sqrt(max(lam2, 0.25)) + 2.0)


# --------------------------------------------------------------------------
# fixed point


def solve_profile(
    law: StressLaw,
    config: SolverConfig,
    data: RiemannData,
    warm_start: SelfSimilarSolution | None = None,
) -> SelfSimilarSolution:
    """Damped Picard iteration of T, then v-reconstruction and diagnostics.

    Convergence is judged on the undamped residual sup|T(w) - w|. Damping
    starts at config.damping and halves, permanently, after any sweep whose
    residual fails to decrease (so the first fallback is 0.5), floored at
    1/16 or the starting value if lower: phase runs on the cubic law
    oscillate at 0.5 and 0.25 but settle below that, and exact 2-cycles
    keep the residual constant rather than growing. Heavily damped runs
    converge slowly; give them max_iter ~ 500.

    warm_start seeds the iteration with another solution's w profile
    (resampled onto this grid) instead of the built-in step guess. Sequence
    drivers use it: small-excision phase runs that cycle from a cold start
    converge when continued from the previous member of their sequence.

    Raises not_converged (carrying the best-effort solution in
    .context["solution"]) when max_iter is exhausted, and bound_violated
    if an iterate escapes the a-priori middle-state box by more than 10%
    on a uniformly hyperbolic law.
    """
    L = config.L if config.L is not None else auto_domain(law, data)
    grid = make_grid(L, config.n_nodes, config.excision_delta)
    if warm_start is not None:
        grid.w = np.interp(grid.nodes, warm_start.grid.nodes, warm_start.grid.w)
    else:
        grid.w = initial_guess(law, grid, data)

    hyperbolic = law.c0_sq > 0
    lam0 = (
        max(abs(data.w_l), abs(data.w_r)) + abs(data.v_r - data.v_l) / np.sqrt(law.c0_sq)
        if hyperbolic
        else np.inf
    )

    theta = config.damping
    # a starting damping below 1/16 is a deliberate choice; never raise back
    theta_floor = min(1.0 / 16.0, theta)
    prev_change = np.inf
    history: list[float] = []
    converged = False
    report = None
    iterations = 0
    for it in range(1, config.max_iter + 1):
        iterations = it
        nxt, report = apply_T(grid, law, config, data)
        if hyperbolic and np.max(np.abs(nxt.w)) > lam0 * 1.1 + 1e-12:
            raise WavefanError(
                "bound_violated",
                f"sup|w| = {np.max(np.abs(nxt.w)):.6g} exceeds the a-priori "
                f"bound {lam0:.6g} by more than 10%",
                iteration=it,
            )
        change = float(np.max(np.abs(nxt.w - grid.w)))
        history.append(change)
        if change <= config.tol:
            grid = nxt
            converged = True
            break
        if change >= prev_change:
            # non-strict: an exact 2-cycle keeps the residual constant and
            # must still trigger the ladder
            theta = max(0.5 * theta, theta_floor)
        if theta < 1.0:
            nxt.w = (1.0 - theta) * grid.w + theta * nxt.w
        grid = nxt
        prev_change = change

    solution = _finalize(law, config, data, grid, report, iterations, converged, history)
    if not converged:
        raise WavefanError(
            "not_converged",
            f"no fixed point after {config.max_iter} sweeps "
            f"(last change {history[-1]:.3e}, tol {config.tol:.1e})",
            solution=solution,
            history=history,
        )
    return solution


def _finalize(law, config, data, grid, report, iterations, converged, history):
    v, defect = reconstruct_v(grid, data)
    grid.v = v
    if grid.excision == 0.0:
        i0 = grid.side_indices("plus")[0]
        v_star = float(v[i0])
    else:
        ip = grid.side_indices("plus")[0]
        im = grid.side_indices("minus")[0]
        v_star = 0.5 * float(v[ip] + v[im])

    dw = np.diff(grid.w)
    dv = np.diff(v)
    y_mid = 0.5 * (grid.nodes[:-1] + grid.nodes[1:])
    tv_w = float(np.sum(np.abs(dw)))
    tv_v = float(np.sum(np.abs(dv)))
    weighted = float(np.sum(np.abs(y_mid) * np.abs(dw)))

    fm, fp = report.phi_minus, report.phi_plus
    lam_m = min(fm.lam_m, fp.lam_m)
    lam_M = max(fm.lam_M, fp.lam_M)

    monotone = True
    for meas, w_end in ((fm, data.w_l), (fp, data.w_r)):
        idx = grid.side_indices(meas.side)
        seg = grid.w[idx]  # outward order: w* -> endpoint
        step = np.diff(seg)
        direction = np.sign(w_end - report.middle.w_star)
        if direction != 0 and np.any(direction * step < -1e-12):
            monotone = False

    near = np.abs(grid.nodes) <= 1.0
    near_sup = float(np.max(np.abs(grid.nodes[near] * grid.w[near]))) if near.any() else 0.0

    sol = SelfSimilarSolution(
        grid=grid,
        data=data,
        config=config,
        w_star=report.middle.w_star,
        v_star=v_star,
        tv_w=tv_w,
        tv_v=tv_v,
        weighted_tv_w=weighted,
        iterations=iterations,
        converged=converged,
        residual_ode=float("nan"),
        conservation_defect=defect,
        denominator=report.middle.denominator,
        measures=(fm, fp),
        change_history=history,
        lam_m=lam_m,
        lam_M=lam_M,
        monotone_ok=monotone,
        l_margin_ok=bool(grid.L > lam_M + 1.0),
        near_axis_sup=near_sup,
        rho_candidates=(fm.rho, fp.rho),
    )
    sol.residual_ode = ode_residual(sol, law, config)
    return sol


# --------------------------------------------------------------------------
# v reconstruction


def reconstruct_v(grid: ProfileGrid, data: RiemannData):
    """v(y) = v_l + int_{-L}^y (-x) w'(x) dx via midpoint-x nodal increments.

    Works unchanged on excised grids: the gap cell has midpoint 0 and zero w
    increment (both traces equal w*), so it contributes nothing. Returns
    (v, defect) with defect = |v(L) - v_r|.
    """
    if grid.w is None:
        raise ConfigError("grid carries no w field")
    y_mid = 0.5 * (grid.nodes[:-1] + grid.nodes[1:])
    incr = -y_mid * np.diff(grid.w)
    v = np.empty_like(grid.nodes)
    v[0] = data.v_l
    np.cumsum(incr, out=v[1:])
    v[1:] += data.v_l
    return v, float(abs(v[-1] - data.v_r))


# --------------------------------------------------------------------------
# excised solve and ODE residual


def delta0_cutoff(law: StressLaw, gamma: float) -> float:
    """Smallest admissible excision for the capillary phase branch,
    delta0 = sqrt(4 c gamma / (1 - 4 gamma)) with sigma_w >= -c."""
    if not 0.0 < gamma < 0.25:
        raise ConfigError("delta0_cutoff needs 0 < gamma < 1/4")
    c = law.c_lower
    if c <= 0.0:
        return 0.0
    return float(np.sqrt(4.0 * c * gamma / (1.0 - 4.0 * gamma)))


def solve_excised(
    law: StressLaw,
    config: SolverConfig,
    data: RiemannData,
    delta: float,
    warm_start: SelfSimilarSolution | None = None,
) -> SelfSimilarSolution:
    """Fixed point on |y| in [delta, L], the two half-problems glued by w*.

    The capillary branch refuses delta below the turning-point cutoff
    delta0; the viscous branch accepts any delta > 0 (the delta-sequence
    diagnostics live in the limit-analysis layer). Pass the previous
    member of a delta-sequence as warm_start when halving delta.
    """
    if delta <= 0:
        raise ConfigError("solve_excised needs delta > 0")
    if config.gamma > 0.0:
        d0 = delta0_cutoff(law, config.gamma)
        if delta < d0 * (1.0 - 1e-12):
            raise WavefanError(
                "delta_below_cutoff",
                f"delta = {delta:.6g} below the capillary cutoff {d0:.6g}",
                delta=delta,
                delta0=d0,
            )
    cfg = replace(config, excision_delta=float(delta))
    return solve_profile(law, cfg, data, warm_start=warm_start)


def ode_residual(solution: SelfSimilarSolution, law: StressLaw, config: SolverConfig) -> float:
    """Mesh-weighted L1 norm of the profile equation residual
    (y^2 + eps - sigma_w(w)) w' + eps y w'' (+ gamma eps^2 w''') on interior
    nodes, skipping the 3 nodes nearest the axis on each half-axis where the
    profile is only mildly regular.
    """
    grid = solution.grid
    h = grid.h
    eps, gamma = config.eps, config.gamma
    total = 0.0
    for side in ("minus", "plus"):
        idx = grid.side_indices(side)
        order = np.argsort(grid.nodes[idx])
        yy = grid.nodes[idx][order]
        ww = grid.w[idx][order]
        n = len(yy)
        if n < 9:
            continue
        # centered stencils; i = [3, n-4] drops 3 nodes at each segment end,
        # which covers both the near-axis exclusion and stencil validity
        i = np.arange(3, n - 3)
        w1 = (ww[i + 1] - ww[i - 1]) / (2 * h)
        w2 = (ww[i + 1] - 2 * ww[i] + ww[i - 1]) / h**2
        r = (yy[i] ** 2 + eps - law.sigma_w(ww[i])) * w1 + eps * yy[i] * w2
        if gamma > 0.0:
            w3 = (ww[i + 2] - 2 * ww[i + 1] + 2 * ww[i - 1] - ww[i - 2]) / (2 * h**3)
            r = r + gamma * eps**2 * w3
        total += float(np.sum(np.abs(r)) * h)
    return total
