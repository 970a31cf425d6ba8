"""Constitutive stress laws sigma(w) and their regime metadata.

The wave structure of the underlying model is controlled entirely by the sign
and size of sigma_w: strictly positive sigma_w gives a hyperbolic (elastic)
regime with characteristic speeds +-sqrt(sigma_w), while an interval where
sigma_w < 0 is an elliptic strip separating material phases.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ConfigError

# integer codes shared with the jitted oracle kernel
LAW_LINEAR = 0
LAW_HARDENING = 1
LAW_CUBIC = 2
LAW_TABLE = 3

_KIND_CODES = {
    "linear": LAW_LINEAR,
    "hardening": LAW_HARDENING,
    "cubic": LAW_CUBIC,
    "custom": LAW_TABLE,
}


@dataclass(frozen=True)
class StressLaw:
    """A stress-strain law with analytic derivative and regime metadata.

    kind:
        linear     sigma = c0^2 * w                params (c0,)
        hardening  sigma = a*w + b*w^3, a,b > 0    params (a, b)
        cubic      sigma = w^3 - w                 params ()
        custom     tabulated (w, sigma) pairs, monotone cubic interpolation

    c0_sq   infimum of sigma_w over the working range (0.0 when the law has
            an elliptic strip, as the cubic does)
    c_lower lower bound c with sigma_w >= -c everywhere on the working range
    growth  optional (c1, eta) marker meaning |sigma_w(w)| <= c1 |w|^(2-eta)
            for |w| > 1
    """

    kind: str
    params: tuple = ()
    c0_sq: float = 0.0
    c_lower: float = 0.0
    growth: tuple | None = None
    table_w: np.ndarray | None = None
    table_sigma: np.ndarray | None = None
    _interp: object = field(default=None, repr=False, compare=False)
    _interp_d: object = field(default=None, repr=False, compare=False)

    def sigma(self, w):
        w = np.asarray(w, dtype=float)
        if self.kind == "linear":
            return self.params[0] ** 2 * w
        if self.kind == "hardening":
            a, b = self.params
            return a * w + b * w**3
        if self.kind == "cubic":
            return w**3 - w
        return self._interp(w)

    def sigma_w(self, w):
        w = np.asarray(w, dtype=float)
        if self.kind == "linear":
            return np.full_like(w, self.params[0] ** 2)
        if self.kind == "hardening":
            a, b = self.params
            return a + 3.0 * b * w**2
        if self.kind == "cubic":
            return 3.0 * w**2 - 1.0
        return self._interp_d(w)

    def kernel_spec(self):
        """(code, params, table_w, table_sigma) consumed by the oracle kernel.

        Custom laws are resampled densely so the kernel's linear interpolation
        tracks the monotone cubic to high accuracy.
        """
        code = _KIND_CODES[self.kind]
        if self.kind == "custom":
            wd = np.linspace(self.table_w[0], self.table_w[-1], 4097)
            return code, np.zeros(2), wd, np.asarray(self._interp(wd), dtype=float)
        p = np.zeros(2)
        if self.kind == "linear":
            p[0] = self.params[0] ** 2
        elif self.kind == "hardening":
            p[0], p[1] = self.params
        dummy = np.array([0.0, 1.0])
        return code, p, dummy, dummy


def linear_law(c0: float) -> StressLaw:
    """sigma = c0^2 * w; uniform characteristic speeds +-c0."""
    if c0 <= 0:
        raise ConfigError("linear law needs c0 > 0")
    return StressLaw(
        kind="linear",
        params=(float(c0),),
        c0_sq=float(c0) ** 2,
        c_lower=0.0,
        growth=(float(c0) ** 2, 1.0),
    )


def hardening_law(a: float = 1.0, b: float = 1.0) -> StressLaw:
    """sigma = a*w + b*w^3 with a, b > 0; strictly hyperbolic, sigma_w >= a."""
    if a <= 0 or b <= 0:
        raise ConfigError("hardening law needs a > 0 and b > 0")
    # sigma_w / w^2 = a/w^2 + 3b peaks at |w| = 1, so the growth constant
    # valid on all |w| >= 1 is a + 3b, not the asymptotic 3b
    return StressLaw(
        kind="hardening",
        params=(float(a), float(b)),
        c0_sq=float(a),
        c_lower=0.0,
        growth=(float(a) + 3.0 * float(b), 0.0),
    )


def cubic_law() -> StressLaw:
    """sigma = w^3 - w: two hyperbolic phases |w| > 1/sqrt(3), sigma_w >= -1."""
    return StressLaw(
        kind="cubic",
        params=(),
        c0_sq=0.0,
        c_lower=1.0,
        growth=(3.0, 0.0),
    )


def custom_law(table_w, table_sigma, growth: tuple | None = None) -> StressLaw:
    """Law from tabulated (w, sigma) pairs via monotone cubic interpolation.

    The derivative is the interpolant's analytic derivative, so the derivative
    consistency check applies to custom laws exactly as to closed-form ones.
    """
    w = np.asarray(table_w, dtype=float)
    s = np.asarray(table_sigma, dtype=float)
    if w.ndim != 1 or w.shape != s.shape or len(w) < 4:
        raise ConfigError("custom law table needs >= 4 (w, sigma) pairs")
    if np.any(np.diff(w) <= 0):
        raise ConfigError("custom law table abscissae must be strictly increasing")
    interp = PchipInterpolator(w, s)
    interp_d = interp.derivative()
    ws = np.linspace(w[0], w[-1], 4001)
    dv = np.asarray(interp_d(ws), dtype=float)
    return StressLaw(
        kind="custom",
        params=(),
        c0_sq=float(max(dv.min(), 0.0)),
        c_lower=float(max(-dv.min(), 0.0)),
        growth=growth,
        table_w=w,
        table_sigma=s,
        _interp=interp,
        _interp_d=interp_d,
    )


def load_custom_law(path: str, growth: tuple | None = None) -> StressLaw:
    """Read a two-column CSV of (w, sigma) rows; '#' lines are comments."""
    rows = []
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ConfigError(f"{path}:{ln}: expected 'w,sigma', got {line!r}")
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise ConfigError(f"{path}:{ln}: {exc}") from exc
    if len(rows) < 4:
        raise ConfigError(f"{path}: custom law table needs >= 4 rows")
    arr = np.array(rows)
    return custom_law(arr[:, 0], arr[:, 1], growth=growth)


def hyperbolic_region(law: StressLaw, w_range: tuple, samples: int = 10001):
    """Maximal intervals of {w : sigma_w(w) > 0} inside w_range.

    Sign changes located on a uniform sampling are refined by bisection to an
    interval width below 1e-10, so each interior endpoint carries
    |sigma_w| <= 1e-9 for laws with order-one curvature.
    """
    lo, hi = float(w_range[0]), float(w_range[1])
    if not hi > lo:
        raise ConfigError("hyperbolic_region needs w_range with lo < hi")
    ws = np.linspace(lo, hi, samples)
    pos = law.sigma_w(ws) > 0.0

    def refine(wa, wb):
        # sigma_w changes sign on [wa, wb]; shrink to width <= 1e-10
        fa = float(law.sigma_w(wa))
        for _ in range(80):
            wm = 0.5 * (wa + wb)
            fm = float(law.sigma_w(wm))
            if fa * fm <= 0.0:
                wb = wm
            else:
                wa, fa = wm, fm
            if wb - wa < 1e-10:
                break
        return 0.5 * (wa + wb)

    intervals = []
    i = 0
    n = len(ws)
    while i < n:
        if not pos[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and pos[j + 1]:
            j += 1
        left = ws[i] if i == 0 else refine(ws[i - 1], ws[i])
        right = ws[j] if j == n - 1 else refine(ws[j], ws[j + 1])
        intervals.append((left, right))
        i = j + 1
    return intervals


@dataclass(frozen=True)
class GrowthReport:
    satisfied: bool
    worst_ratio: float
    c1: float
    eta: float


def growth_check(law: StressLaw, w_max: float, samples: int = 2000) -> GrowthReport:
    """Sample |sigma_w(w)| / |w|^(2-eta) over 1 < |w| <= w_max.

    Satisfied iff the worst ratio stays at or below the law's declared c1.
    Laws without a growth marker report unsatisfied with the ratio measured
    against (c1, eta) = (1, 0).
    """
    if w_max <= 1.0:
        raise ConfigError("growth_check needs w_max > 1")
    c1, eta = law.growth if law.growth is not None else (1.0, 0.0)
    mags = np.geomspace(1.0 + 1e-9, w_max, samples)
    ws = np.concatenate([-mags[::-1], mags])
    ratio = np.abs(law.sigma_w(ws)) / np.abs(ws) ** (2.0 - eta)
    worst = float(ratio.max())
    ok = law.growth is not None and worst <= c1 * (1.0 + 1e-12)
    return GrowthReport(satisfied=bool(ok), worst_ratio=worst, c1=c1, eta=eta)
