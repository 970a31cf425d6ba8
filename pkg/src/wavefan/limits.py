"""Small-viscosity limit analysis: sweeps, jump detection, classification.

A family of profiles at decreasing eps is treated as a measured Cauchy
sequence in L^1 away from the axis; individual profiles are scanned for
jump cores (|w'| above a layer-scale threshold), whose plateau traces feed
the Rankine-Hugoniot and Lax checks. The sum rule audits that jumps plus
smooth fans account for the full jump w_r - w_l; it telescopes interval
edge values, so it is exact up to roundoff by construction, while the
plateau traces used for RH carry the physical layer-smearing error.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .constitutive import StressLaw, hyperbolic_region
from .errors import ConfigError, WavefanError
from .solver import (
    RiemannData,
    SelfSimilarSolution,
    SolverConfig,
    delta0_cutoff,
    solve_excised,
    solve_profile,
)

H_PLATEAU_NODES = 10
MIN_PLATEAU_NODES = 5


@dataclass
class JumpRecord:
    """One detected discontinuity of the limit profile.

    Traces are plateau averages taken over [s-3H, s-H] and [s+H, s+3H]
    with H = 10 grid cells, which sits outside the O(eps) layer core at
    the resolutions the acceptance runs use.
    """

    location: float
    v_minus: float
    w_minus: float
    v_plus: float
    w_plus: float
    rh_w: float
    rh_v: float
    i_lo: int
    i_hi: int
    classification: str = ""

    @property
    def w_jump(self) -> float:
        return self.w_plus - self.w_minus


def _profile_slope(grid) -> np.ndarray:
    return np.gradient(grid.w, grid.nodes)


def detect_jumps(
    solution: SelfSimilarSolution,
    threshold: float | None = None,
    law: StressLaw | None = None,
):
    """Scan a converged profile for jump cores.

    A core is a maximal run of nodes with |w'| > threshold/eps; its
    location is the |w'|-weighted centroid. Default threshold is
    0.1 (|w_r - w_l| + |w_star - w_l|), viscous layers being O(1/eps)
    steep against O(1) rarefaction slopes. The stress residual needs the
    law; without one it is left nan for a later rh_residuals pass.
    """
    grid = solution.grid
    data = solution.data
    eps = solution.config.eps
    if threshold is None:
        threshold = 0.1 * (abs(data.w_r - data.w_l) + abs(solution.w_star - data.w_l))
    y = grid.nodes
    w = grid.w
    v = grid.v
    slope = np.abs(_profile_slope(grid))
    mask = slope > threshold / eps
    records: list[JumpRecord] = []
    if not mask.any():
        return records
    idx = np.flatnonzero(mask)
    runs = np.split(idx, np.flatnonzero(np.diff(idx) > 1) + 1)
    H = H_PLATEAU_NODES * grid.h
    for run in runs:
        i_lo, i_hi = int(run[0]), int(run[-1])
        weights = slope[run]
        s = float(np.average(y[run], weights=weights))
        lmask = (y >= s - 3 * H) & (y <= s - H) & (np.arange(len(y)) < i_lo)
        rmask = (y >= s + H) & (y <= s + 3 * H) & (np.arange(len(y)) > i_hi)
        if lmask.sum() < MIN_PLATEAU_NODES or rmask.sum() < MIN_PLATEAU_NODES:
            raise WavefanError(
                "no_plateau",
                f"jump at y={s:.4g} has plateaus of {lmask.sum()}/{rmask.sum()} nodes",
                location=s,
            )
        w_m = float(np.mean(w[lmask]))
        w_p = float(np.mean(w[rmask]))
        v_m = float(np.mean(v[lmask]))
        v_p = float(np.mean(v[rmask]))
        rec = JumpRecord(
            location=s,
            v_minus=v_m,
            w_minus=w_m,
            v_plus=v_p,
            w_plus=w_p,
            rh_w=abs(s * (w_p - w_m) + (v_p - v_m)),
            rh_v=np.nan,
            i_lo=i_lo,
            i_hi=i_hi,
        )
        if law is not None:
            rec.rh_w, rec.rh_v = rh_residuals(rec, law)
        records.append(rec)
    return records


def rh_residuals(jump: JumpRecord, law: StressLaw):
    """|s[w]+[v]| and |s[v]+[sigma]| from the plateau traces."""
    dw = jump.w_plus - jump.w_minus
    dv = jump.v_plus - jump.v_minus
    dsig = float(law.sigma(jump.w_plus) - law.sigma(jump.w_minus))
    return (
        abs(jump.location * dw + dv),
        abs(jump.location * dv + dsig),
    )


def classify_wave(jump: JumpRecord, law: StressLaw, eps: float) -> str:
    """Bucket one jump: phase_boundary / classical_lax / marginal / nonclassical.

    The family is picked by the sign of the speed (lambda = +-sqrt(sigma_w));
    equality of the Lax inequalities within a 10 eps band is marginal.
    Traces in different connected hyperbolic components (or off every
    component) make a phase boundary.
    """
    w_m, w_p, s = jump.w_minus, jump.w_plus, jump.location
    span = (min(w_m, w_p) - 1.0, max(w_m, w_p) + 1.0)
    comps = hyperbolic_region(law, span)

    def comp_of(wv):
        for k, (lo, hi) in enumerate(comps):
            if lo - 1e-12 <= wv <= hi + 1e-12:
                return k
        return None

    cm, cp = comp_of(w_m), comp_of(w_p)
    if cm is None or cp is None or cm != cp:
        return "phase_boundary"

    sgn = 1.0 if s >= 0 else -1.0
    lam_m = sgn * float(np.sqrt(max(law.sigma_w(w_m), 0.0)))
    lam_p = sgn * float(np.sqrt(max(law.sigma_w(w_p), 0.0)))
    band = 10.0 * eps
    if abs(lam_m - s) <= band or abs(lam_p - s) <= band:
        return "marginal"
    if lam_p <= s <= lam_m:
        return "classical_lax"
    return "nonclassical"


def analyze_jumps(solution: SelfSimilarSolution, law: StressLaw, threshold=None):
    """detect_jumps + RH residuals + classification in one pass."""
    eps = solution.config.eps
    jumps = detect_jumps(solution, threshold, law)
    for j in jumps:
        j.classification = classify_wave(j, law, eps)
    return jumps


def sum_rule_defect(solution: SelfSimilarSolution, jumps) -> float:
    """|sum of jump increments + sum of fan increments - (w_r - w_l)|.

    Jump increments use interval edge values and fans the complementary
    segments, so the decomposition telescopes the endpoint-pinned profile.
    """
    w = solution.grid.w
    total = 0.0
    prev = 0
    for j in sorted(jumps, key=lambda r: r.i_lo):
        total += w[j.i_lo] - w[prev]  # fan up to the core
        total += w[j.i_hi] - w[j.i_lo]  # the core itself
        prev = j.i_hi
    total += w[len(w) - 1] - w[prev]
    return abs(total - (solution.data.w_r - solution.data.w_l))


# --------------------------------------------------------------------------
# eps sweeps


@dataclass
class SweepResult:
    eps_list: list
    solutions: list
    distances: list
    cauchy: bool
    r0: float
    tv_w: list = field(default_factory=list)


def _l1_away_from_axis(grid_a, grid_b, r0: float) -> float:
    if len(grid_a.nodes) != len(grid_b.nodes) or not np.allclose(
        grid_a.nodes, grid_b.nodes
    ):
        raise ConfigError("sweep members must share a grid")
    y = grid_a.nodes
    diff = np.abs(grid_a.w - grid_b.w)
    diff = np.where(np.abs(y) > r0, diff, 0.0)
    return float(np.trapezoid(diff, y))


def epsilon_sweep(
    law: StressLaw,
    base_config: SolverConfig,
    data: RiemannData,
    eps_list,
    gamma: float = 0.0,
    r0: float = 0.1,
) -> SweepResult:
    """Solve the same data at each eps and measure Cauchy behavior.

    d_k = L1 distance between consecutive members on |y| > r0; the verdict
    is positive iff every ratio d_k/d_{k+1} >= 1.5 (halving steps assumed).
    A member failure propagates with the partial results attached.
    """
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ConfigError("eps_list must be strictly decreasing")
    solutions = []
    for e in eps_list:
        cfg = dataclasses.replace(base_config, eps=e, gamma=gamma)
        try:
            solutions.append(solve_profile(law, cfg, data))
        except WavefanError as err:
            raise WavefanError(
                err.name,
                f"sweep member eps={e} failed: {err}",
                partial_solutions=solutions,
                failed_eps=e,
            ) from err
    return sweep_from_solutions(solutions, eps_list, r0)


def sweep_from_solutions(solutions, eps_list, r0: float) -> SweepResult:
    """Distances and Cauchy verdict for already-solved sweep members."""
    distances = [
        _l1_away_from_axis(a.grid, b.grid, r0)
        for a, b in zip(solutions, solutions[1:])
    ]
    cauchy = True
    for d0, d1 in zip(distances, distances[1:]):
        if d1 == 0.0:
            continue
        if d0 / d1 < 1.5:
            cauchy = False
    return SweepResult(
        eps_list=list(eps_list),
        solutions=list(solutions),
        distances=distances,
        cauchy=cauchy,
        r0=r0,
        tv_w=[s.tv_w for s in solutions],
    )


# --------------------------------------------------------------------------
# kinetic sampling and phase diagnostics


@dataclass
class KineticRow:
    gamma: float
    delta: float
    speed: float
    w_minus: float
    w_plus: float
    v_minus: float
    v_plus: float
    classification: str
    error: str = ""


def kinetic_sample(
    law: StressLaw,
    data,
    gamma_list,
    eps: float,
    base_config: SolverConfig | None = None,
) -> list[KineticRow]:
    """Tabulate the detected phase-boundary record against gamma.

    Each member runs the excised capillary solve at delta = 1.05 delta0
    (the WKB frequency can graze zero exactly at the cutoff). Rows are
    reported, never asserted; failed members keep a row with the error
    name so the table stays aligned with gamma_list.
    """
    if isinstance(data, RiemannData):
        data = [data]
    rows: list[KineticRow] = []
    for g in gamma_list:
        d0 = delta0_cutoff(law, g)
        delta = 1.05 * d0 if d0 > 0 else 0.0
        for dat in data:
            cfg = (
                base_config
                if base_config is not None
                else SolverConfig(eps=eps, gamma=g)
            )
            cfg = dataclasses.replace(cfg, eps=eps, gamma=g)
            try:
                sol = solve_excised(law, cfg, dat, delta)
                jumps = analyze_jumps(sol, law)
            except WavefanError as err:
                rows.append(
                    KineticRow(g, delta, np.nan, np.nan, np.nan, np.nan, np.nan,
                               "", error=err.name)
                )
                continue
            pb = [j for j in jumps if j.classification == "phase_boundary"]
            pick = pb[0] if pb else (jumps[0] if jumps else None)
            if pick is None:
                rows.append(
                    KineticRow(g, delta, np.nan, np.nan, np.nan, np.nan, np.nan,
                               "none")
                )
            else:
                rows.append(
                    KineticRow(
                        g, delta, pick.location, pick.w_minus, pick.w_plus,
                        pick.v_minus, pick.v_plus, pick.classification,
                    )
                )
    return rows


def delta_sequence(law, base_config, data, deltas):
    """Viscosity-only excised solves at a decreasing excision sequence.

    Each member is warm-started from the previous solution; w* roughly
    doubles per halving on phase laws, so the cold-start guess lands in
    the wrong basin below delta ~ 0.25. A member that still cycles is
    retried once with deep starting damping (1/64) and an enlarged
    iteration budget. Failures of the retry propagate.
    """
    ds = [float(d) for d in deltas]
    if any(b >= a for a, b in zip(ds, ds[1:])):
        raise ConfigError("delta_sequence needs strictly decreasing deltas")
    cfg = dataclasses.replace(base_config, gamma=0.0)
    sols = []
    prev = None
    for d in ds:
        try:
            sol = solve_excised(law, cfg, data, d, warm_start=prev)
        except WavefanError as err:
            if err.name != "not_converged":
                raise
            deep = dataclasses.replace(
                cfg, damping=1.0 / 64.0, max_iter=max(8 * cfg.max_iter, 4000)
            )
            sol = solve_excised(law, deep, data, d, warm_start=prev)
        sols.append(sol)
        prev = sol
    return sols


@dataclass
class ConcentrationReport:
    deltas: list
    near_axis_sup: list
    weighted_tv: list
    tv_w: list
    near_axis_mass: list
    oscillations: list
    sup_bounded: bool
    weighted_bounded: bool


def oscillation_count(solution: SelfSimilarSolution, radius: float = 1.0) -> int:
    """Sign changes of w' within |y| <= radius; reported, never gated."""
    y = solution.grid.nodes
    slope = _profile_slope(solution.grid)
    m = np.abs(y) <= radius
    sl = slope[m]
    sl = sl[np.abs(sl) > 1e-12]
    if len(sl) < 2:
        return 0
    return int(np.count_nonzero(np.diff(np.sign(sl)) != 0))


def concentration_diagnostics(solutions) -> ConcentrationReport:
    """Axis-concentration diagnostics across a decreasing-delta sequence.

    Checks sup_{|y|<=1} |y w| and the weighted TV stay bounded (consecutive
    ratios <= 2); reports the unweighted TV and near-axis mass trends
    without asserting them, since a concentration term on the axis is not
    excluded.
    """
    sols = list(solutions)
    sup = [s.near_axis_sup for s in sols]
    wtv = [s.weighted_tv_w for s in sols]
    tv = [s.tv_w for s in sols]
    mass = []
    osc = []
    for s in sols:
        y = s.grid.nodes
        m = np.abs(y) <= 0.5
        mass.append(float(np.trapezoid(np.abs(s.grid.w[m]), y[m])))
        osc.append(oscillation_count(s))

    def bounded(seq):
        for a, b in zip(seq, seq[1:]):
            if b > 2.0 * max(a, 1e-300):
                return False
        return True

    return ConcentrationReport(
        deltas=[s.config.excision_delta for s in sols],
        near_axis_sup=sup,
        weighted_tv=wtv,
        tv_w=tv,
        near_axis_mass=mass,
        oscillations=osc,
        sup_bounded=bounded(sup),
        weighted_bounded=bounded(wtv),
    )


# --------------------------------------------------------------------------
# summary emission


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def summary_rows(solutions, jumps_per_solution=None):
    """Flatten solutions (one row per eps/gamma/delta) for CSV emission."""
    if jumps_per_solution is None:
        jumps_per_solution = [[] for _ in solutions]
    n_jump = max((len(j) for j in jumps_per_solution), default=0)
    header = [
        "eps", "gamma", "delta", "w_star", "v_star", "tv_w", "tv_v",
        "weighted_tv_w", "conservation_defect", "iterations", "converged",
        "n_jumps",
    ]
    for k in range(n_jump):
        header += [f"jump{k}_s", f"jump{k}_dw", f"jump{k}_class"]
    rows = []
    for sol, jumps in zip(solutions, jumps_per_solution):
        cfg = sol.config
        row = [
            cfg.eps, cfg.gamma, cfg.excision_delta, sol.w_star, sol.v_star,
            sol.tv_w, sol.tv_v, sol.weighted_tv_w, sol.conservation_defect,
            sol.iterations, sol.converged, len(jumps),
        ]
        for k in range(n_jump):
            if k < len(jumps):
                row += [jumps[k].location, jumps[k].w_jump, jumps[k].classification]
            else:
                row += ["", "", ""]
        rows.append([_fmt(x) for x in row])
    return header, rows


def write_summary_csv(path, solutions, jumps_per_solution=None) -> None:
    import csv

    header, rows = summary_rows(solutions, jumps_per_solution)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        wr.writerows(rows)


def profile_plot_script(csv_name: str, out_name: str = "profile.png") -> str:
    """gnuplot script plotting w(y) and v(y) from a profile CSV."""
    return "\n".join(
        [
            "set datafile separator ','",
            f"set output '{out_name}'",
            "set terminal pngcairo size 900,600",
            "set xlabel 'y'",
            "set key left top",
            f"plot '{csv_name}' using 1:2 with lines title 'w', \\",
            f"     '{csv_name}' using 1:3 with lines title 'v'",
            "",
        ]
    )


def sweep_plot_script(csv_name: str, out_name: str = "sweep.png") -> str:
    """gnuplot script plotting the sweep summary (tv_w against eps)."""
    return "\n".join(
        [
            "set datafile separator ','",
            f"set output '{out_name}'",
            "set terminal pngcairo size 900,600",
            "set logscale x",
            "set xlabel 'eps'",
            "set ylabel 'tv_w'",
            f"plot '{csv_name}' using 1:5 with linespoints title 'tv_w'",
            "",
        ]
    )
