"""Time-stepping kernels for the brute-force evolution oracle.

The hot loop is written once, in vectorized numpy, and compiled with numba
when available. Setting WAVEFAN_NO_NUMBA=1 in the environment before import
selects the plain numpy path; KERNEL_BACKEND records which one is active.

The evolved system is the regularized wave system in diffusive orientation,

    v_t = sigma(w)_x + (eps*t) v_xx - (delta*t^2) w_xxx,
    w_t = v_x,

whose x/t reduction is exactly the self-similar two-point problem the main
solver discretizes: the time-weighted coefficients are what make the
self-similar profile an exact solution rather than only a large-time
attractor. Spatial derivatives are second-order central differences, time
stepping is Heun (explicit trapezoid), the outermost two nodes on each side
are clamped to the Riemann states.

Conservation audit: the central differences are exact flux differences of
midpoint fluxes, so the interior sums of w and v change, step by step, by
the time-integrated fluxes through the two audit interfaces (between nodes
1-2 and n-3 .. n-2). Both residuals are returned; they are pure roundoff.
"""

from __future__ import annotations

import os

import numpy as np

STATUS_OK = 0
STATUS_BLOWUP = 1
STATUS_NAN = 2
STATUS_STEP_BUDGET = 3


def _sigma_py(w, code, p0, p1, tw, ts):
    if code == 0:
        return p0 * w
    if code == 1:
        return p0 * w + p1 * w**3
    if code == 2:
        return w**3 - w
    return np.interp(w, tw, ts)


def _sigma_w_peak_py(w, code, p0, p1, tw, tds):
    """max of sigma_w over the nodal states, for the convective dt bound."""
    if code == 0:
        return p0
    if code == 1:
        return p0 + 3.0 * p1 * (w**2).max()
    if code == 2:
        return 3.0 * (w**2).max() - 1.0
    return np.interp(w, tw, tds).max()


def _rhs_py(v, w, ehat, dhat, h, code, p0, p1, tw, ts, dv, dw, d2):
    """Fill dv, dw with the semi-discrete rates; return audit-interface fluxes.

    Returns (FL, FR, GL, GR): v-equation flux at the left/right audit
    interface, then w-equation flux at the same interfaces.
    """
    n = v.shape[0]
    sig = _sigma(w, code, p0, p1, tw, ts)
    d2[0] = 0.0
    d2[n - 1] = 0.0
    d2[1:-1] = (w[2:] - 2.0 * w[1:-1] + w[:-2]) / (h * h)
    dv[:2] = 0.0
    dv[n - 2 :] = 0.0
    dw[:2] = 0.0
    dw[n - 2 :] = 0.0
    dv[2 : n - 2] = (
        (sig[3 : n - 1] - sig[1 : n - 3]) / (2.0 * h)
        + ehat * (v[3 : n - 1] - 2.0 * v[2 : n - 2] + v[1 : n - 3]) / (h * h)
        - dhat * (d2[3 : n - 1] - d2[1 : n - 3]) / (2.0 * h)
    )
    dw[2 : n - 2] = (v[3 : n - 1] - v[1 : n - 3]) / (2.0 * h)
    FL = 0.5 * (sig[1] + sig[2]) + ehat * (v[2] - v[1]) / h - dhat * 0.5 * (d2[1] + d2[2])
    FR = (
        0.5 * (sig[n - 3] + sig[n - 2])
        + ehat * (v[n - 2] - v[n - 3]) / h
        - dhat * 0.5 * (d2[n - 3] + d2[n - 2])
    )
    GL = 0.5 * (v[1] + v[2])
    GR = 0.5 * (v[n - 3] + v[n - 2])
    return FL, FR, GL, GR


def _evolve_py(v, w, h, eps, delta, t_final, cfl, code, p0, p1, tw, ts, tds, blow_lim, max_steps):
    """Advance (v, w) in place from t = 0 to t_final.

    dt each step is cfl * min(h/lam_max, h^2/(2 eps t), h^4/(8 delta t^2), h)
    with the instantaneous coefficients; the diffusive and dispersive bounds
    only engage once t > 0. Returns (status, steps, resid_v, resid_w) where
    the residuals are the conservation-audit defects of the interior sums.
    """
    n = v.shape[0]
    dv1 = np.zeros(n)
    dw1 = np.zeros(n)
    dv2 = np.zeros(n)
    dw2 = np.zeros(n)
    d2 = np.zeros(n)
    v1 = np.zeros(n)
    w1 = np.zeros(n)

    mass_v0 = h * v[2 : n - 2].sum()
    mass_w0 = h * w[2 : n - 2].sum()
    audit_v = 0.0
    audit_w = 0.0

    t = 0.0
    steps = 0
    status = STATUS_OK
    while t < t_final - 1e-14:
        sw = _sigma_w_peak(w, code, p0, p1, tw, tds)
        lam = np.sqrt(max(sw, 1e-12))
        dt = min(h / lam, h)
        ehat = eps * t
        dhat = delta * t * t
        if ehat > 0.0:
            dt = min(dt, h * h / (2.0 * ehat))
        if dhat > 0.0:
            dt = min(dt, h**4 / (8.0 * dhat))
        dt *= cfl
        if t + dt > t_final:
            dt = t_final - t

        fl1, fr1, gl1, gr1 = _rhs(v, w, ehat, dhat, h, code, p0, p1, tw, ts, dv1, dw1, d2)
        v1[:] = v + dt * dv1
        w1[:] = w + dt * dw1
        e2 = eps * (t + dt)
        d2hat = delta * (t + dt) * (t + dt)
        fl2, fr2, gl2, gr2 = _rhs(v1, w1, e2, d2hat, h, code, p0, p1, tw, ts, dv2, dw2, d2)
        v += 0.5 * dt * (dv1 + dv2)
        w += 0.5 * dt * (dw1 + dw2)
        audit_v += 0.5 * dt * ((fr1 - fl1) + (fr2 - fl2))
        audit_w += 0.5 * dt * ((gr1 - gl1) + (gr2 - gl2))
        t += dt
        steps += 1

        m = np.abs(w).max()
        if m != m or np.abs(v).max() != np.abs(v).max():
            status = STATUS_NAN
            break
        if m > blow_lim:
            status = STATUS_BLOWUP
            break
        if steps >= max_steps:
            status = STATUS_STEP_BUDGET
            break

    resid_v = (h * v[2 : n - 2].sum() - mass_v0) - audit_v
    resid_w = (h * w[2 : n - 2].sum() - mass_w0) - audit_w
    return status, steps, resid_v, resid_w


_want_numba = os.environ.get("WAVEFAN_NO_NUMBA", "") != "1"
if _want_numba:
    try:
        from numba import njit

        _sigma = njit(cache=True)(_sigma_py)
        _sigma_w_peak = njit(cache=True)(_sigma_w_peak_py)
        _rhs = njit(cache=True)(_rhs_py)
        evolve_kernel = njit(cache=True)(_evolve_py)
        KERNEL_BACKEND = "numba"
    except ImportError:
        _sigma = _sigma_py
        _sigma_w_peak = _sigma_w_peak_py
        _rhs = _rhs_py
        evolve_kernel = _evolve_py
        KERNEL_BACKEND = "numpy"
else:
    _sigma = _sigma_py
    _sigma_w_peak = _sigma_w_peak_py
    _rhs = _rhs_py
    evolve_kernel = _evolve_py
    KERNEL_BACKEND = "numpy"
