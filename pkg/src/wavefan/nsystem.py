"""Family decomposition and coupled iteration for N-component systems.

For v_t - F(w)_x = 0, w_t - v_x = 0 with A(w) = DF(w) having distinct
positive eigenvalues lambda_j(w)^2, the profile derivative decomposes as
w' = sum_j a_j r_j(w). Each family coefficient solves

    eps y a_j' + (y^2 + eps - lambda_j^2(w)) a_j = R_j,

whose homogeneous solution is the family wave measure (the scalar theory
with sigma_w replaced by lambda_j^2). The inversion uses variation of
constants integrated outward from the exponent minimizer, where the kernel
exp((P(x) - P(y))/eps) stays <= 1, so the quadrature is stable at any eps.
The quadratic and cubic interaction sources D1/D2/D3 are assembled from
frame derivatives taken by sign-aligned centered differences in state
space.

Scope note: the full nonlinear N-family fixed point is exercised only as
repeated small-amplitude sweeps of coupled_iteration with frozen frames,
reporting a measured contraction factor; nothing is claimed outside that
regime.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, WavefanError
from .measures import ProfileGrid, WaveMeasure, build_phi_capillary, build_phi_viscous

_STATE_H = 1e-5


class _SpeedLaw:
    """Adapter: a 'stress law' whose sigma_w(x) = x^2, so a grid carrying a
    nodal speed field lambda_j(y) feeds the scalar measure machinery the
    squared-speed field it expects."""

    c0_sq = 1.0

    @staticmethod
    def sigma(x):
        return np.asarray(x, dtype=float) ** 3 / 3.0

    @staticmethod
    def sigma_w(x):
        return np.asarray(x, dtype=float) ** 2


@dataclass
class FamilyDecomposition:
    """Nodal frames and family coefficients along a profile.

    y: nodes; w: states, shape (n_nodes, N); a: coefficients (n_nodes, N);
    lam: speeds lambda_j(w(y)) > 0 ascending per node (n_nodes, N);
    R, L: right/left frames, R[i] columns are r_j, L[i] rows are l_j.
    """

    y: np.ndarray
    w: np.ndarray
    a: np.ndarray
    lam: np.ndarray
    R: np.ndarray
    L: np.ndarray

    @property
    def n_families(self) -> int:
        return self.w.shape[1]

    def reconstruct_wprime(self) -> np.ndarray:
        out = np.empty_like(self.w)
        for i in range(len(self.y)):
            out[i] = self.R[i] @ self.a[i]
        return out

    def amplitude(self) -> float:
        return float(sum(np.trapezoid(np.abs(self.a[:, j]), self.y) for j in range(self.n_families)))


def _frames_at(A_of_w, w, ref_R=None):
    """Eigen-frames of A(w); columns sign-aligned to ref_R when given."""
    A = np.asarray(A_of_w(w), dtype=float)
    ev, R = np.linalg.eig(A)
    if np.max(np.abs(ev.imag)) > 1e-9 * max(1.0, np.max(np.abs(ev.real))):
        raise WavefanError("complex_pencil", "A(w) has complex eigenvalues")
    ev = ev.real
    R = R.real
    order = np.argsort(ev)
    ev = ev[order]
    R = R[:, order]
    for j in range(R.shape[1]):
        R[:, j] /= np.linalg.norm(R[:, j])
        if ref_R is not None:
            if float(ref_R[:, j] @ R[:, j]) < 0.0:
                R[:, j] = -R[:, j]
        else:
            k = int(np.argmax(np.abs(R[:, j])))
            if R[k, j] < 0:
                R[:, j] = -R[:, j]
    return ev, R, np.linalg.inv(R)


def decompose(A_of_w, y, w) -> FamilyDecomposition:
    """Nodal eigen-decomposition and projection of the profile derivative.

    w has shape (n_nodes, N); derivatives are centered (one-sided at the
    segment ends). Raises eigen_gap_collapse when two squared speeds come
    within 1e-8 anywhere on the profile.
    """
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != len(y):
        raise ConfigError("w must have shape (n_nodes, N)")
    n, N = w.shape
    lam = np.empty((n, N))
    R = np.empty((n, N, N))
    L = np.empty((n, N, N))
    ref = None
    for i in range(n):
        ev, Ri, Li = _frames_at(A_of_w, w[i], ref_R=ref)
        if N > 1 and float(np.min(np.diff(ev))) < 1e-8:
            raise WavefanError(
                "eigen_gap_collapse",
                f"squared-speed gap {np.min(np.diff(ev)):.3e} at node {i}",
            )
        if np.any(ev <= 0):
            raise WavefanError(
                "eigen_gap_collapse",
                f"non-positive squared speed {ev.min():.3e} at node {i}",
            )
        lam[i] = np.sqrt(ev)
        R[i] = Ri
        L[i] = Li
        ref = Ri
    wp = np.gradient(w, y, axis=0)
    a = np.einsum("ijk,ik->ij", L, wp)
    return FamilyDecomposition(y=y, w=w, a=a, lam=lam, R=R, L=L)


# --------------------------------------------------------------------------
# interaction sources


def _dr_direction(A_of_w, w, direction, ref_R):
    """Centered state-space derivative of all frame columns along direction."""
    h = _STATE_H
    _, Rp, _ = _frames_at(A_of_w, w + h * direction, ref_R=ref_R)
    _, Rm, _ = _frames_at(A_of_w, w - h * direction, ref_R=ref_R)
    return (Rp - Rm) / (2.0 * h)


@dataclass
class SourceFields:
    """Per-family projected interaction sources; arrays (n_nodes, N)."""

    D1: np.ndarray
    D2: np.ndarray | None = None
    D3: np.ndarray | None = None


def assemble_sources(decomp: FamilyDecomposition, A_of_w, eps: float, gamma: float = 0.0):
    """D1 = -eps y sum_ik a_i a_k (D_u r_i . r_k), projected on each family;
    for gamma > 0 also the capillary sources

        D2 = -gamma eps^2 [ sum a_i a_k' (D_u r_i . r_k)
                            + sum (a_i a_k)' (D_u r_i . r_k) ],
        D3 = -gamma eps^2 sum a_i a_k a_l D_u(D_u r_i . r_k) . r_l.

    The D2 grouping follows the two-term reading; only its quadratic
    smallness is relied upon downstream, not its coefficients.
    """
    y, w, a = decomp.y, decomp.w, decomp.a
    n, N = w.shape
    ap = np.gradient(a, y, axis=0)

    D1_vec = np.zeros((n, N))
    D2_vec = np.zeros((n, N)) if gamma > 0 else None
    D3_vec = np.zeros((n, N)) if gamma > 0 else None
    h = _STATE_H
    for i_node in range(n):
        Ri = decomp.R[i_node]
        wi = w[i_node]
        # dcols[k][:, i] = D_u r_i . r_k at this node
        dcols = [_dr_direction(A_of_w, wi, Ri[:, k], Ri) for k in range(N)]
        if gamma > 0:
            # second[el][k][:, i] = D_u(D_u r_i . r_k) . r_el
            second = []
            for el in range(N):
                _, Rp, _ = _frames_at(A_of_w, wi + h * Ri[:, el], ref_R=Ri)
                _, Rm, _ = _frames_at(A_of_w, wi - h * Ri[:, el], ref_R=Ri)
                per_k = []
                for k in range(N):
                    gp = _dr_direction(A_of_w, wi + h * Ri[:, el], Rp[:, k], Rp)
                    gm = _dr_direction(A_of_w, wi - h * Ri[:, el], Rm[:, k], Rm)
                    per_k.append((gp - gm) / (2.0 * h))
                second.append(per_k)
        for i in range(N):
            for k in range(N):
                vik = dcols[k][:, i]
                D1_vec[i_node] += a[i_node, i] * a[i_node, k] * vik
                if gamma > 0:
                    D2_vec[i_node] += (
                        a[i_node, i] * ap[i_node, k]
                        + (ap[i_node, i] * a[i_node, k] + a[i_node, i] * ap[i_node, k])
                    ) * vik
                    for el in range(N):
                        D3_vec[i_node] += (
                            a[i_node, i]
                            * a[i_node, k]
                            * a[i_node, el]
                            * second[el][k][:, i]
                        )
    D1_vec *= -eps * y[:, None]
    proj = lambda vec: np.einsum("ijk,ik->ij", decomp.L, vec)
    D1 = proj(D1_vec)
    if gamma > 0:
        D2 = proj(-gamma * eps**2 * D2_vec)
        D3 = proj(-gamma * eps**2 * D3_vec)
        return SourceFields(D1=D1, D2=D2, D3=D3)
    return SourceFields(D1=D1)


# --------------------------------------------------------------------------
# family measures and the linear inversion


def family_wave_measure(lam_field, y, eps: float, gamma: float = 0.0, side: str = "plus"):
    """Wave measure of one family: the scalar construction with the squared
    nodal speed field in place of sigma_w. The nodes must already be the
    half-axis of interest (ascending y, 0 <= y for the plus side)."""
    y = np.asarray(y, dtype=float)
    lam_field = np.asarray(lam_field, dtype=float)
    if np.any(lam_field <= 0):
        raise ConfigError("family speeds must be positive")
    if side == "plus":
        if y[0] < 0:
            raise ConfigError("plus-side nodes must satisfy y >= 0")
        grid = ProfileGrid(L=float(y[-1]), excision=0.0, nodes=y,
                           w=lam_field, _i_plus0=0)
    elif side == "minus":
        if y[-1] > 0:
            raise ConfigError("minus-side nodes must satisfy y <= 0")
        grid = ProfileGrid(L=float(-y[0]), excision=0.0, nodes=y,
                           w=lam_field, _i_plus0=len(y) - 1)
    else:
        raise ConfigError(f"unknown side {side!r}")
    if gamma > 0.0:
        return build_phi_capillary(_SpeedLaw(), grid, eps, gamma, side)
    return build_phi_viscous(_SpeedLaw(), grid, eps, side)


def invert_family(measure: WaveMeasure, y, rhs, eps: float, total: float):
    """Solve eps y a' + (y^2 + eps - lam^2) a = rhs on the measure's axis.

    Variation of constants from the exponent maximizer outward (stable
    kernel <= 1), then the homogeneous multiple is fixed by the prescribed
    integral: a = a_part + c phi with c = total - int a_part.
    """
    y = np.asarray(y, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    phi = measure.density
    expo = measure.exponent
    n = len(y)
    k0 = int(np.argmax(expo))
    # rhs carries a factor y at the axis (D1 does by construction), so the
    # integrand rhs/(eps y) stays bounded; a node exactly at 0 gets 0
    g = np.divide(rhs, eps * y, out=np.zeros_like(rhs), where=(y != 0.0))
    a_part = np.zeros(n)
    h = np.diff(y)
    # upward sweep: kernel d = exp(expo[k] - expo[k-1]) <= 1 beyond the peak
    for k in range(k0 + 1, n):
        d = np.exp(min(expo[k] - expo[k - 1], 0.0))
        a_part[k] = d * (a_part[k - 1] + 0.5 * h[k - 1] * g[k - 1]) + 0.5 * h[k - 1] * g[k]
    for k in range(k0 - 1, -1, -1):
        d = np.exp(min(expo[k] - expo[k + 1], 0.0))
        a_part[k] = d * (a_part[k + 1] - 0.5 * h[k] * g[k + 1]) - 0.5 * h[k] * g[k]
    c = total - np.trapezoid(a_part, y)
    return a_part + c * phi


@dataclass
class CoupledResult:
    a: np.ndarray
    contraction: float
    amplitudes: np.ndarray


def family_jumps(A_of_w, w_b, w_r) -> np.ndarray:
    """A_j = <l_j(w_mean), w_r - w_b>: the per-family share of the jump."""
    w_b = np.asarray(w_b, dtype=float)
    w_r = np.asarray(w_r, dtype=float)
    _, _, L = _frames_at(A_of_w, 0.5 * (w_b + w_r))
    return L @ (w_r - w_b)


def coupled_iteration(
    decomp: FamilyDecomposition,
    measures: list[WaveMeasure],
    sources: SourceFields,
    boundary_coeffs,
    eps: float,
    amplitude_cap: float = 0.1,
) -> CoupledResult:
    """One sweep of the coupled system: invert the linear part per family
    with the interaction sources as right-hand side.

    boundary_coeffs[j] prescribes int a_j dy (the family's share of the
    jump). Raises amplitude_cap_exceeded when the incoming a-fields are
    outside the small-amplitude regime where the sweep is meaningful.
    """
    amp = decomp.amplitude()
    if amp > amplitude_cap:
        raise WavefanError(
            "amplitude_cap_exceeded",
            f"sum_j |a_j|_L1 = {amp:.4g} exceeds the cap {amplitude_cap:.4g}",
            amplitude=amp,
        )
    y = decomp.y
    N = decomp.n_families
    rhs_all = sources.D1.copy()
    if sources.D2 is not None:
        rhs_all += sources.D2
    if sources.D3 is not None:
        rhs_all += sources.D3
    a_new = np.empty_like(decomp.a)
    for j in range(N):
        a_new[:, j] = invert_family(
            measures[j], y, rhs_all[:, j], eps, float(boundary_coeffs[j])
        )
    num = sum(np.trapezoid(np.abs(a_new[:, j] - decomp.a[:, j]), y) for j in range(N))
    den = max(sum(np.trapezoid(np.abs(decomp.a[:, j]), y) for j in range(N)), 1e-300)
    amps = np.array([np.trapezoid(np.abs(a_new[:, j]), y) for j in range(N)])
    return CoupledResult(a=a_new, contraction=float(num / den), amplitudes=amps)


def cross_mass(measure: WaveMeasure, lo: float, hi: float) -> float:
    """Mass of the measure inside [lo, hi] (another family's speed window)."""
    s = np.abs(measure.support_nodes)
    d = measure.density
    order = np.argsort(s)
    s, d = s[order], d[order]
    mask = (s >= lo) & (s <= hi)
    if mask.sum() < 2:
        return 0.0
    return float(np.trapezoid(d[mask], s[mask]))
