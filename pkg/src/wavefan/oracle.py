"""Brute-force time-dependent check of the self-similar construction.

Evolves the regularized system

    v_t = sigma(w)_x + (eps t) v_xx - (delta t^2) w_xxx,
    w_t = v_x,

from mollified Riemann data with an explicit Heun scheme and central
differences, then compares w(t, x) against the profile w(x/t). The growing
coefficients eps*t and delta*t^2 make the x/t reduction of this system the
exact profile equation, so the self-similar solution is an attractor the
oracle should approach as t grows. The scheme is deliberately plain: its
value is that it shares no code path with the fixed-point solver.

Numerics live in _kernels (numba-compiled when available; set
WAVEFAN_NO_NUMBA=1 to force the pure-numpy path).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import (
    KERNEL_BACKEND,
    STATUS_BLOWUP,
    STATUS_NAN,
    STATUS_OK,
    STATUS_STEP_BUDGET,
    evolve_kernel,
)
from .constitutive import StressLaw
from .errors import ConfigError, WavefanError
from .solver import RiemannData, SelfSimilarSolution


@dataclass
class OracleResult:
    """Evolved fields plus the conservation audit of the run."""

    x: np.ndarray
    v: np.ndarray
    w: np.ndarray
    t_final: float
    steps: int
    conservation_v: float
    conservation_w: float
    conservation_v_rel: float
    conservation_w_rel: float
    backend: str
    eps: float
    delta: float

    def rescaled(self):
        """(y, v, w) with y = x/t_final."""
        return self.x / self.t_final, self.v, self.w


def _speed_bound(law: StressLaw, data: RiemannData) -> float:
    c0 = np.sqrt(law.c0_sq) if law.c0_sq > 0 else 1.0
    box = max(abs(data.w_l), abs(data.w_r)) + abs(data.v_r - data.v_l) / c0
    ws = np.linspace(-box, box, 2001)
    return float(np.sqrt(max(np.max(law.sigma_w(ws)), 0.25)))


def _mollified_step(x, left, right, width):
    return left + (right - left) * 0.5 * (1.0 + np.tanh(x / width))


def evolve(
    law: StressLaw,
    data: RiemannData,
    eps: float,
    delta: float,
    X: float,
    t_final: float,
    cfl: float = 0.4,
    n_nodes: int = 4001,
    max_steps: int = 20_000_000,
) -> OracleResult:
    """Advance mollified Riemann data to t_final on [-X, X].

    The domain must hold the fan: max|lambda| * t_final < 0.9 X. Two nodes
    at each end stay clamped to the Riemann states, standing in for the
    far-field boundary condition. Initial data crosses over ~4 cells (tanh
    of width 2h), which kills the grid-scale Gibbs transient without
    affecting any t >= 1 comparison.
    """
    if eps < 0 or delta < 0:
        raise ConfigError("eps and delta must be nonnegative")
    if t_final <= 0 or X <= 0 or cfl <= 0 or cfl > 1:
        raise ConfigError("need t_final > 0, X > 0, 0 < cfl <= 1")
    if n_nodes < 16:
        raise ConfigError("n_nodes too small for the audit stencils")
    lam = _speed_bound(law, data)
    if lam * t_final >= 0.9 * X:
        raise ConfigError(
            f"domain too small: max|lambda|*t = {lam * t_final:.3g} "
            f"exceeds 0.9X = {0.9 * X:.3g}"
        )
    x = np.linspace(-X, X, n_nodes)
    h = x[1] - x[0]
    v = _mollified_step(x, data.v_l, data.v_r, 2.0 * h)
    w = _mollified_step(x, data.w_l, data.w_r, 2.0 * h)

    code, p, tw, ts = law.kernel_spec()
    tds = np.gradient(ts, tw) if len(tw) > 2 else np.ones_like(tw)
    lam0 = max(abs(data.v_l), abs(data.w_l), abs(data.v_r), abs(data.w_r), 1.0)
    blow_lim = 10.0 * lam0

    status, steps, resid_v, resid_w = evolve_kernel(
        v, w, float(h), float(eps), float(delta), float(t_final), float(cfl),
        code, float(p[0]), float(p[1]), tw, ts, tds, float(blow_lim),
        int(max_steps),
    )
    if status == STATUS_BLOWUP:
        raise WavefanError(
            "blowup_detected",
            f"|w| exceeded {blow_lim:.3g} after {steps} steps",
            steps=steps,
        )
    if status in (STATUS_NAN, STATUS_STEP_BUDGET):
        reason = "NaN appeared" if status == STATUS_NAN else "step budget exhausted"
        raise WavefanError(
            "cfl_violation",
            f"{reason} after {steps} steps (cfl={cfl}, h={h:.3g})",
            steps=steps,
        )
    assert status == STATUS_OK
    scale_w = max(1.0, float(np.trapezoid(np.abs(w), x)))
    scale_v = max(1.0, float(np.trapezoid(np.abs(v), x)))
    return OracleResult(
        x=x,
        v=v,
        w=w,
        t_final=float(t_final),
        steps=int(steps),
        conservation_v=float(resid_v),
        conservation_w=float(resid_w),
        conservation_v_rel=float(abs(resid_v) / scale_v),
        conservation_w_rel=float(abs(resid_w) / scale_w),
        backend=KERNEL_BACKEND,
        eps=float(eps),
        delta=float(delta),
    )


@dataclass
class CompareReport:
    l1_w: float
    l1_v: float
    r0: float
    t_final: float


def self_similar_compare(
    result: OracleResult,
    solution: SelfSimilarSolution,
    r0: float = 0.0,
) -> CompareReport:
    """L1 distances in y = x/t between the evolved fields and the profile.

    The evolved fields are resampled at the solver's nodes; |y| <= r0 is
    excluded (r0 = 0 compares everywhere). The (eps, delta) pairing with
    the profile run is the caller's contract; it is checked here.
    """
    eps = solution.config.eps
    delta = solution.config.gamma * eps * eps
    if abs(eps - result.eps) > 1e-14 or abs(delta - result.delta) > 1e-14:
        raise ConfigError(
            f"mismatched regularization: oracle (eps={result.eps}, delta={result.delta}) "
            f"vs profile (eps={eps}, delta={delta})"
        )
    y_o, v_o, w_o = result.rescaled()
    y = solution.grid.nodes
    w_i = np.interp(y, y_o, w_o)
    v_i = np.interp(y, y_o, v_o)
    mask = np.abs(y) > r0
    dw = np.where(mask, np.abs(w_i - solution.grid.w), 0.0)
    dv = np.where(mask, np.abs(v_i - solution.grid.v), 0.0)
    return CompareReport(
        l1_w=float(np.trapezoid(dw, y)),
        l1_v=float(np.trapezoid(dv, y)),
        r0=float(r0),
        t_final=result.t_final,
    )
