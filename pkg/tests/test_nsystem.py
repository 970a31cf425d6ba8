"""Family decomposition, interaction sources, and the coupled inversion."""

import numpy as np
import pytest

from wavefan import (
    ConfigError,
    WavefanError,
    assemble_sources,
    coupled_iteration,
    cross_mass,
    decompose,
    family_jumps,
    family_wave_measure,
    invert_family,
)


def A_VAR(u):
    # mildly state-dependent, non-symmetric, eigenvalues near 1 and 3
    return np.array([[1.0 + 0.1 * u[1], 0.3 + 0.2 * u[0]],
                     [0.2 - 0.1 * u[0], 3.0 + 0.1 * u[0]]])


def A_DIAG(u):
    return np.diag([4.0, 9.0])


def _ramp_profile(y):
    return np.column_stack([0.4 * np.tanh((y + 1.0) / 0.3),
                            0.5 * np.tanh((y - 3.0) / 0.3)])


def test_decompose_reconstructs_wprime():
    # a = L w' and R L = I, so the reconstruction is exact to rounding
    y = np.linspace(-5.0, 5.0, 801)
    W = _ramp_profile(y)
    dec = decompose(A_VAR, y, W)
    resid = np.max(np.abs(dec.reconstruct_wprime() - np.gradient(W, y, axis=0)))
    assert resid <= 1e-10


def test_decompose_shape_validation():
    y = np.linspace(0.0, 1.0, 50)
    with pytest.raises(ConfigError):
        decompose(A_DIAG, y, np.zeros(50))
    with pytest.raises(ConfigError):
        decompose(A_DIAG, y, np.zeros((49, 2)))


def test_eigen_gap_collapse():
    y = np.linspace(0.0, 1.0, 50)
    W = np.zeros((50, 2))
    with pytest.raises(WavefanError) as exc:
        decompose(lambda u: np.diag([4.0, 4.0 + 1e-10]), y, W)
    assert exc.value.name == "eigen_gap_collapse"
    with pytest.raises(WavefanError) as exc:
        decompose(lambda u: np.diag([-1.0, 4.0]), y, W)
    assert exc.value.name == "eigen_gap_collapse"


def test_family_measure_frozen_rho():
    y = np.linspace(0.0, 5.0, 801)
    m = family_wave_measure(np.full_like(y, 3.0), y, 0.01)
    assert m.rho == pytest.approx(2.9983328701129897, abs=1e-14)
    assert m.mass() == pytest.approx(1.0, abs=1e-12)


def test_family_measure_minus_side():
    y = np.linspace(-5.0, 0.0, 301)
    m = family_wave_measure(np.full_like(y, 2.0), y, 0.05, side="minus")
    assert m.rho == pytest.approx(-np.sqrt(4.0 - 0.05), abs=1e-12)
    assert m.mass() == pytest.approx(1.0, abs=1e-12)


def test_family_measure_validation():
    y = np.linspace(0.0, 5.0, 101)
    with pytest.raises(ConfigError):
        family_wave_measure(np.full_like(y, 2.0), y, 0.05, side="left")
    with pytest.raises(ConfigError):
        family_wave_measure(np.full_like(y, 2.0), -y[::-1] - 1.0, 0.05, side="plus")
    with pytest.raises(ConfigError):
        family_wave_measure(np.zeros_like(y), y, 0.05)


def test_sources_vanish_for_constant_frames():
    y = np.linspace(0.0, 5.0, 201)
    W = np.column_stack([0.02 * np.tanh(y - 2.0), 0.01 * np.tanh(y - 3.0)])
    dec = decompose(A_DIAG, y, W)
    src = assemble_sources(dec, A_DIAG, 0.01)
    assert np.max(np.abs(src.D1)) == 0.0
    assert src.D2 is None and src.D3 is None


def test_d1_is_quadratic_in_amplitude():
    y = np.linspace(-5.0, 5.0, 801)
    W = _ramp_profile(y)
    scales = [1.0, 0.5, 0.25, 0.125]
    peaks = []
    for m in scales:
        dec = decompose(A_VAR, y, m * W)
        peaks.append(np.max(np.abs(assemble_sources(dec, A_VAR, 0.05).D1)))
    slope = np.polyfit(np.log(scales), np.log(peaks), 1)[0]
    assert 1.8 <= slope <= 2.2


def test_capillary_sources_present():
    y = np.linspace(0.0, 5.0, 201)
    W = 0.05 * _ramp_profile(y)
    dec = decompose(A_VAR, y, W)
    src = assemble_sources(dec, A_VAR, 0.05, gamma=0.1)
    assert src.D2 is not None and src.D3 is not None
    assert src.D2.shape == dec.a.shape
    # cubic source is much smaller than the quadratic ones at this amplitude
    assert np.max(np.abs(src.D3)) < np.max(np.abs(src.D1))


def test_cross_masses_negligible():
    # each family concentrates at its own speed; the mass it leaves in the
    # other family's window is beyond underflow for this separation
    y = np.linspace(0.0, 5.0, 2001)
    m1 = family_wave_measure(1.0 + 0.05 * np.tanh(y - 1.0), y, 0.01)
    m2 = family_wave_measure(3.0 + 0.05 * np.tanh(y - 3.0), y, 0.01)
    assert cross_mass(m1, 2.9, 3.1) <= 1e-12
    assert cross_mass(m2, 0.9, 1.1) <= 1e-12
    # own window: the peak has width O(sqrt(eps)), so +-0.2 captures it
    assert cross_mass(m1, 0.8, 1.2) >= 0.99


def test_invert_family_homogeneous():
    y = np.linspace(0.0, 5.0, 801)
    m = family_wave_measure(np.full_like(y, 3.0), y, 0.01)
    a = invert_family(m, y, np.zeros_like(y), 0.01, total=0.7)
    assert np.array_equal(a, 0.7 * m.density)


def test_invert_family_ode_residual():
    y = np.linspace(0.0, 4.0, 801)
    m = family_wave_measure(np.full_like(y, 2.0), y, 0.02)
    rhs = 0.01 * y * np.exp(-((y - 1.0) ** 2) / 0.5)
    a = invert_family(m, y, rhs, 0.02, total=0.3)
    assert np.trapezoid(a, y) == pytest.approx(0.3, abs=1e-12)
    ap = np.gradient(a, y)
    resid = 0.02 * y * ap + (y**2 + 0.02 - 4.0) * a - rhs
    assert np.max(np.abs(resid[5:-5])) <= 5e-3


def test_family_jumps_diagonal():
    j = family_jumps(A_DIAG, [0.1, 0.2], [0.3, -0.1])
    np.testing.assert_allclose(j, [0.2, -0.3], atol=1e-14)


def test_coupled_iteration_contracts():
    w_b = np.array([0.0, 0.0])
    w_r = np.array([0.02, -0.015])
    L = 4.0
    y = np.linspace(0.0, L, 801)
    W = w_b[None, :] + (y / L)[:, None] * (w_r - w_b)[None, :]
    dec = decompose(A_VAR, y, W)
    meas = [family_wave_measure(dec.lam[:, j], y, 0.05, 0.0, "plus") for j in range(2)]
    coeffs = family_jumps(A_VAR, w_b, w_r)
    contractions = []
    res = None
    for _ in range(4):
        src = assemble_sources(dec, A_VAR, 0.05)
        res = coupled_iteration(dec, meas, src, coeffs, 0.05)
        dec.a = res.a
        contractions.append(res.contraction)
    # the first sweep replaces the ramp ansatz; after that the map contracts
    assert all(c < 1e-3 for c in contractions[1:])
    assert contractions[2] < contractions[1]
    # each family integral matches its prescribed share of the jump
    for j in range(2):
        assert np.trapezoid(res.a[:, j], y) == pytest.approx(coeffs[j], abs=1e-12)


def test_amplitude_cap():
    y = np.linspace(0.0, 4.0, 801)
    W = (y / 4.0)[:, None] * np.array([[1.5, -1.0]])
    dec = decompose(A_VAR, y, W)
    meas = [family_wave_measure(dec.lam[:, j], y, 0.05, 0.0, "plus") for j in range(2)]
    src = assemble_sources(dec, A_VAR, 0.05)
    with pytest.raises(WavefanError) as exc:
        coupled_iteration(dec, meas, src, [0.0, 0.0], 0.05)
    assert exc.value.name == "amplitude_cap_exceeded"
