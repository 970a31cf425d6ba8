"""Generalized eigenstructure for profiles with a general diffusion matrix.

The self-similar linearization couples the flux Jacobian A(u) and the
diffusion matrix B(u) through the pencil

    (A(u) - y I) r_hat = mu B(u) r_hat,
    l_hat (A(u) - y I) = mu l_hat B(u),

normalized by l_hat_i B r_hat_j = delta_ij with unit-norm, sign-fixed
r_hat. For B = I this reduces to mu_j = -y + lambda_j with the standard
frames. The 2x2 closed form, the admissibility inequalities on the
transformed entries b_ij = [L B R]_ij, the O(eta) perturbation measurements,
and the generalized-vs-standard Lax comparison all live here.

Eigenvectors are always extracted numerically (SVD null spaces): the printed
closed-form eigenvector display is internally sign-inconsistent and is used
only as a cross-check in the tests, not as the implementation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, WavefanError


@dataclass(frozen=True)
class DiffusionSystem:
    """System size n, flux Jacobian map A(u), diffusion map B(u).

    eta records the nominal size of |B - I| for reporting; it does not
    affect any computation.
    """

    n: int
    A: object
    B: object
    eta: float = 0.0

    def a_at(self, u):
        m = np.asarray(self.A(np.asarray(u, dtype=float)), dtype=float)
        if m.shape != (self.n, self.n):
            raise ConfigError(f"A(u) must be {self.n}x{self.n}, got {m.shape}")
        return m

    def b_at(self, u):
        m = np.asarray(self.B(np.asarray(u, dtype=float)), dtype=float)
        if m.shape != (self.n, self.n):
            raise ConfigError(f"B(u) must be {self.n}x{self.n}, got {m.shape}")
        return m


@dataclass(frozen=True)
class EigenPair:
    mu: float
    l_hat: np.ndarray
    r_hat: np.ndarray


def standard_frames(A: np.ndarray):
    """(lambdas ascending, L rows, R columns) with l_i . r_j = delta_ij,
    unit-norm sign-fixed right eigenvectors."""
    lam, R = np.linalg.eig(A)
    if np.max(np.abs(lam.imag)) > 1e-9 * max(1.0, np.max(np.abs(lam.real))):
        raise WavefanError("complex_pencil", "flux Jacobian has complex eigenvalues")
    lam = lam.real
    R = R.real
    order = np.argsort(lam)
    lam = lam[order]
    R = R[:, order]
    for j in range(R.shape[1]):
        k = int(np.argmax(np.abs(R[:, j])))
        if R[k, j] < 0:
            R[:, j] = -R[:, j]
        R[:, j] /= np.linalg.norm(R[:, j])
    L = np.linalg.inv(R)
    return lam, L, R


def _pencil_charpoly_roots(M: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Roots of det(M - mu B) via exact coefficient extraction for n <= 3,
    eigenvalues of solve(B, M) otherwise."""
    n = M.shape[0]
    if n == 1:
        return np.array([M[0, 0] / B[0, 0]], dtype=complex)
    if n == 2:
        c2 = np.linalg.det(B)
        c1 = M[0, 0] * B[1, 1] + M[1, 1] * B[0, 0] - M[0, 1] * B[1, 0] - M[1, 0] * B[0, 1]
        c0 = np.linalg.det(M)
        return np.roots([c2, -c1, c0])
    if n == 3:
        # a cubic is pinned by its values at 4 points
        pts = np.array([0.0, 1.0, -1.0, 2.0])
        vals = [np.linalg.det(M - t * B) for t in pts]
        coeffs = np.linalg.solve(np.vander(pts, 4), vals)
        return np.roots(coeffs)
    return np.linalg.eigvals(np.linalg.solve(B, M)).astype(complex)


def _null_vector(S: np.ndarray) -> np.ndarray:
    _, _, vh = np.linalg.svd(S)
    return vh[-1].real if np.isrealobj(S) else vh[-1]


def generalized_eigen(sys: DiffusionSystem, u, y: float) -> list[EigenPair]:
    """All n pencil eigenpairs at state u and similarity point y.

    Raises pencil_degenerate when det B vanishes and complex_pencil when the
    characteristic roots are not all real (admissibility violated).
    """
    A = sys.a_at(u)
    B = sys.b_at(u)
    scaleB = max(1.0, float(np.max(np.abs(B))))
    if abs(np.linalg.det(B)) < 1e-12 * scaleB**sys.n:
        raise WavefanError("pencil_degenerate", f"det B = {np.linalg.det(B):.3e}")
    M = A - y * np.eye(sys.n)
    roots = _pencil_charpoly_roots(M, B)
    scale = max(1.0, float(np.max(np.abs(roots))))
    if np.max(np.abs(roots.imag)) > 1e-9 * scale:
        raise WavefanError(
            "complex_pencil",
            f"pencil roots not all real (max imaginary part "
            f"{np.max(np.abs(roots.imag)):.3e})",
            roots=roots,
        )
    mus = np.sort(roots.real)
    pairs = []
    for mu in mus:
        S = M - mu * B
        r = _null_vector(S)
        k = int(np.argmax(np.abs(r)))
        if r[k] < 0:
            r = -r
        r = r / np.linalg.norm(r)
        left = _null_vector(S.T)
        denom = float(left @ B @ r)
        if abs(denom) < 1e-13:
            raise WavefanError(
                "pencil_degenerate",
                f"left/right vectors B-orthogonal at mu={mu:.6g} "
                "(defective or near-multiple eigenvalue)",
            )
        pairs.append(EigenPair(mu=float(mu), l_hat=left / denom, r_hat=r))
    return pairs


def two_by_two_closed_form(b_tilde: np.ndarray, lambda1: float, lambda2: float, y: float):
    """Both pencil eigenvalues from the transformed entries b_ij = [L B R]_ij.

    With a_i = (lambda_i - y) / b_ii and beta = b12 b21 / (b11 b22),

        mu = [(a1 + a2) -+ sqrt((a2 - a1)^2 + 4 beta a1 a2)] / (2 (1 - beta)),

    real and separated exactly on the admissibility set beta in (0, 1).
    The printed discriminant has (a2 + a1)^2 under the root; expanding the
    defining quadratic gives (a2 - a1)^2, which is what the characteristic
    polynomial oracle confirms.
    """
    b = np.asarray(b_tilde, dtype=float)
    if b.shape != (2, 2):
        raise ConfigError("b_tilde must be a 2x2 matrix")
    b11, b12, b21, b22 = b[0, 0], b[0, 1], b[1, 0], b[1, 1]
    if b11 <= 0 or b22 <= 0 or b12 * b21 <= 0:
        raise WavefanError(
            "beta_out_of_range",
            f"need b11, b22 > 0 and b12 b21 > 0; got {b11:.4g}, {b22:.4g}, "
            f"{b12 * b21:.4g}",
        )
    beta = (b12 * b21) / (b11 * b22)
    if not 0.0 < beta < 1.0:
        raise WavefanError("beta_out_of_range", f"beta = {beta:.6g} not in (0, 1)")
    a1 = (lambda1 - y) / b11
    a2 = (lambda2 - y) / b22
    disc = np.sqrt((a2 - a1) ** 2 + 4.0 * beta * a1 * a2)
    mu1 = ((a1 + a2) - disc) / (2.0 * (1.0 - beta))
    mu2 = ((a1 + a2) + disc) / (2.0 * (1.0 - beta))
    return (mu1, mu2) if mu1 <= mu2 else (mu2, mu1)


@dataclass(frozen=True)
class AdmissibilityRecord:
    u: tuple
    b11_pos: bool
    b22_pos: bool
    cross_pos: bool
    beta: float
    beta_in_range: bool

    @property
    def passed(self) -> bool:
        return self.b11_pos and self.b22_pos and self.cross_pos and self.beta_in_range


def admissibility_check(sys: DiffusionSystem, u_samples) -> list[AdmissibilityRecord]:
    """Per-sample evaluation of the 2x2 admissibility inequalities on the
    transformed diffusion entries. Report-only: boundary cases (such as
    B = I, where b12 b21 = 0) are flagged, never raised."""
    if sys.n != 2:
        raise ConfigError("admissibility_check is defined for 2x2 systems")
    out = []
    for u in u_samples:
        A = sys.a_at(u)
        B = sys.b_at(u)
        _, L, R = standard_frames(A)
        b = L @ B @ R
        b11, b12, b21, b22 = b[0, 0], b[0, 1], b[1, 0], b[1, 1]
        cross = b12 * b21
        beta = cross / (b11 * b22) if b11 * b22 != 0 else np.inf
        out.append(
            AdmissibilityRecord(
                u=tuple(np.asarray(u, dtype=float)),
                b11_pos=bool(b11 > 0),
                b22_pos=bool(b22 > 0),
                cross_pos=bool(cross > 0),
                beta=float(beta),
                beta_in_range=bool(0.0 < beta < 1.0),
            )
        )
    return out


@dataclass(frozen=True)
class PerturbationReport:
    etas: np.ndarray
    dev_mu: np.ndarray
    dev_r: np.ndarray
    dev_l: np.ndarray
    dev_cross: np.ndarray
    slope_mu: float
    slope_r: float
    slope_l: float
    slope_cross: float


def _slope(etas, devs):
    devs = np.maximum(devs, 1e-300)
    return float(np.polyfit(np.log(etas), np.log(devs), 1)[0])


def perturbation_scaling(A_map, T_map, u, y: float, eta_list) -> PerturbationReport:
    """Measured deviation orders for B = I + eta T against the B = I frames.

    Reports max-over-families deviations |mu_j - (-y + lambda_j)|,
    ||r_hat_j - r_j||, ||l_hat_j - l_j||, and max_ij |l_hat_i B d_y r_hat_j|
    (centered y-difference, h = 1e-4), plus log-log slopes over eta_list.
    The two frames share the unit-norm sign-fixed normalization so the
    vector deviations are meaningful.

    Note the mu slope measures 1 only when T has nonzero diagonal entries in
    the eigenframe of A(u); a T that is purely off-diagonal there makes the
    first-order term vanish and the measured slope is 2.
    """
    etas = np.asarray(sorted(eta_list, reverse=True), dtype=float)
    if etas.size < 2 or np.any(etas <= 0):
        raise ConfigError("eta_list needs at least 2 positive values")
    u = np.asarray(u, dtype=float)
    n = len(u)
    A0 = np.asarray(A_map(u), dtype=float)
    lam, L0, R0 = standard_frames(A0)
    h = 1e-4

    dev_mu, dev_r, dev_l, dev_cross = [], [], [], []
    for eta in etas:
        sys_eta = DiffusionSystem(
            n=n,
            A=A_map,
            B=lambda uu, e=eta: np.eye(n) + e * np.asarray(T_map(uu), dtype=float),
            eta=float(eta),
        )
        pairs = generalized_eigen(sys_eta, u, y)
        B = sys_eta.b_at(u)
        dmu = max(abs(p.mu - (-y + lam[j])) for j, p in enumerate(pairs))
        dr = max(np.linalg.norm(p.r_hat - R0[:, j]) for j, p in enumerate(pairs))
        dl = max(np.linalg.norm(p.l_hat - L0[j]) for j, p in enumerate(pairs))
        plus = generalized_eigen(sys_eta, u, y + h)
        minus = generalized_eigen(sys_eta, u, y - h)
        dc = 0.0
        for i in range(n):
            for j in range(n):
                dyr = (plus[j].r_hat - minus[j].r_hat) / (2.0 * h)
                dc = max(dc, abs(float(pairs[i].l_hat @ B @ dyr)))
        dev_mu.append(dmu)
        dev_r.append(dr)
        dev_l.append(dl)
        dev_cross.append(dc)

    dev_mu = np.asarray(dev_mu)
    dev_r = np.asarray(dev_r)
    dev_l = np.asarray(dev_l)
    dev_cross = np.asarray(dev_cross)
    return PerturbationReport(
        etas=etas,
        dev_mu=dev_mu,
        dev_r=dev_r,
        dev_l=dev_l,
        dev_cross=dev_cross,
        slope_mu=_slope(etas, dev_mu),
        slope_r=_slope(etas, dev_r),
        slope_l=_slope(etas, dev_l),
        slope_cross=_slope(etas, dev_cross),
    )


# --------------------------------------------------------------------------
# Lax comparisons


@dataclass(frozen=True)
class LaxVerdict:
    family: int
    standard_lax: bool
    generalized_lax: bool
    marginal: bool
    lambda_minus: float
    lambda_plus: float
    lambda_hat_minus: float
    lambda_hat_plus: float


def generalized_speed(sys: DiffusionSystem, u, y: float) -> np.ndarray:
    """lambda_hat_j(u, y) = <r_hat_j, A r_hat_j> for all families."""
    A = sys.a_at(u)
    pairs = generalized_eigen(sys, u, y)
    return np.array([float(p.r_hat @ A @ p.r_hat) for p in pairs])


def lax_equivalence(sys: DiffusionSystem, shock, marginal_tol: float = 1e-8) -> LaxVerdict:
    """Standard vs generalized Lax verdicts for one shock triple.

    shock = (u_minus, u_plus, s). The family is the one whose standard
    speeds at the two end states bracket s most closely. The genuine
    nonlinearity of that family is checked by the sign of grad(lambda_j).r_j
    sampled at 101 points of the connecting segment; an actual sign change
    raises gnl_violated, while a field that is flat to 1e-12 (linearly
    degenerate) is reported as marginal instead.
    """
    u_minus, u_plus, s = shock
    u_minus = np.asarray(u_minus, dtype=float)
    u_plus = np.asarray(u_plus, dtype=float)
    lam_m, _, _ = standard_frames(sys.a_at(u_minus))
    lam_p, _, _ = standard_frames(sys.a_at(u_plus))
    mid = 0.5 * (lam_m + lam_p)
    family = int(np.argmin(np.abs(mid - s)))

    # genuine nonlinearity along the segment
    ts = np.linspace(0.0, 1.0, 101)
    gnl_vals = np.empty(len(ts))
    hs = 1e-6
    for k, t in enumerate(ts):
        uu = (1 - t) * u_minus + t * u_plus
        lam, _, R = standard_frames(sys.a_at(uu))
        r = R[:, family]
        grad = np.empty(len(uu))
        for c in range(len(uu)):
            up = uu.copy()
            um = uu.copy()
            up[c] += hs
            um[c] -= hs
            grad[c] = (
                standard_frames(sys.a_at(up))[0][family]
                - standard_frames(sys.a_at(um))[0][family]
            ) / (2 * hs)
        gnl_vals[k] = float(grad @ r)
    degenerate = bool(np.max(np.abs(gnl_vals)) < 1e-12)
    sign_change = gnl_vals.min() < -1e-12 and gnl_vals.max() > 1e-12
    if not degenerate and sign_change:
        raise WavefanError(
            "gnl_violated",
            f"grad(lambda).r changes sign on the segment for family {family}",
        )

    lam_minus = float(lam_m[family])
    lam_plus = float(lam_p[family])
    hat_minus = float(generalized_speed(sys, u_minus, s)[family])
    hat_plus = float(generalized_speed(sys, u_plus, s)[family])
    tol = marginal_tol * max(1.0, abs(s))
    standard = bool(lam_plus <= s + tol and s - tol <= lam_minus)
    generalized = bool(hat_plus <= s + tol and s - tol <= hat_minus)
    marginal = bool(
        degenerate
        or min(abs(lam_plus - s), abs(lam_minus - s)) <= tol
        or min(abs(hat_plus - s), abs(hat_minus - s)) <= tol
    )
    return LaxVerdict(
        family=family,
        standard_lax=standard,
        generalized_lax=generalized,
        marginal=marginal,
        lambda_minus=lam_minus,
        lambda_plus=lam_plus,
        lambda_hat_minus=hat_minus,
        lambda_hat_plus=hat_plus,
    )
