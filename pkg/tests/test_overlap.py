import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from actionscale.grid import make_grid
from actionscale.overlap import (CouplingSpec, Displacement, TwoLevelAmplitudes,
                                 apply_displacement, coupling_to_displacement,
                                 gaussian_delta_s, gaussian_overlap_closed_form, overlap_c,
                                 overlap_scan, reduced_density, threshold_search)
from actionscale.states import GaussianSpec, coherent_state, delta_s, gaussian_state, moments

from conftest import random_state

HBAR = 0.16
GRID = make_grid(2048, -40, 40, HBAR)


def small_ds_coefficient(psi, rng, n_dirs=3):
    """Fitted coefficient k in 1 - |C|^2 = k x + c x^2, x = (Delta S/hbar)^2 <= 0.0025."""
    mom = moments(psi)
    xs, ys = [], []
    for _ in range(n_dirs):
        ang = rng.uniform(0, 2 * math.pi)
        u_q, u_p = math.cos(ang), math.sin(ang)
        unit = float(delta_s(mom, u_q, u_p))
        for frac in np.linspace(0.01, 0.05, 5):
            s = frac * HBAR / unit
            c = overlap_c(psi, Displacement(u_q * s, u_p * s))
            xs.append(frac ** 2)
            ys.append(1 - abs(c) ** 2)
    xs, ys = np.array(xs), np.array(ys)
    coef, *_ = np.linalg.lstsq(np.column_stack([xs, xs ** 2]), ys, rcond=None)
    return coef[0]


def mp_overlap(spec, d):
    """Independent oracle: adaptive quadrature of the phased autocorrelation integral."""
    mp.mp.dps = 30
    z = complex(spec.z)
    zr = z.real
    norm = (2 * zr / (math.pi * abs(z) ** 2)) ** 0.25

    def amp(q):
        return norm * mp.exp(1j * spec.p0 * q / HBAR) * mp.exp(-(q - spec.q0) ** 2 / z)

    def f(q):
        return mp.exp(1j * q * d.dp / HBAR) * mp.conj(amp(q)) * amp(q + d.dq)

    w = 12 * spec.sigma_q
    val = mp.quad(f, [spec.q0 - w, spec.q0, spec.q0 + w])
    return complex(mp.exp(1j * d.dq * d.dp / (2 * HBAR)) * val)


@pytest.mark.parametrize("case", range(6))
def test_closed_form_against_quadrature(case):
    rng = np.random.default_rng(100 + case)
    sq = rng.uniform(0.3, 1.2)
    spec = GaussianSpec(rng.uniform(-1, 1), rng.uniform(-0.5, 0.5), sq,
                        HBAR / (2 * sq) * rng.uniform(1, 3), HBAR)
    d = Displacement(rng.uniform(-1, 1), rng.uniform(-0.3, 0.3))
    assert abs(mp_overlap(spec, d)) ** 2 == pytest.approx(gaussian_overlap_closed_form(spec, d)[0],
                                                          rel=1e-10)


def test_identity_displacement(small_grid, coherent0):
    assert overlap_c(coherent0, Displacement(0, 0)) == 1 + 0j
    assert apply_displacement(coherent0, Displacement(0, 0)) is coherent0


def test_position_shift_moves_state():
    psi = gaussian_state(GRID, GaussianSpec(0, 0, 0.6, HBAR / 1.2, HBAR))
    moved = moments(apply_displacement(psi, Displacement(1.5, 0)))
    assert moved.mean_q == pytest.approx(-1.5, abs=1e-10)
    assert moved.sigma_q == pytest.approx(0.6, rel=1e-8)
    moved = moments(apply_displacement(psi, Displacement(0, 0.3)))
    assert moved.mean_p == pytest.approx(0.3, abs=1e-10)


@given(st.integers(0, 2**31), st.floats(-2, 2), st.floats(-0.5, 0.5))
def test_displacement_inverse_and_adjoint(seed, dq, dp):
    psi = random_state(GRID, np.random.default_rng(seed))
    d = Displacement(dq, dp)
    back = apply_displacement(apply_displacement(psi, d), -d)
    assert abs(psi.inner(back)) == pytest.approx(1, abs=1e-12)
    c = overlap_c(psi, d)
    assert overlap_c(psi, -d) == pytest.approx(np.conj(c), abs=1e-10)
    assert abs(c) <= 1 + 1e-12
    if math.hypot(dq / GRID.dq, dp / GRID.dp) > 1:
        assert abs(c) < 1 - 1e-12
    half_m = apply_displacement(psi, d.scaled(-0.5))
    half_p = apply_displacement(psi, d.scaled(0.5))
    assert abs(half_m.inner(half_p)) == pytest.approx(abs(c), abs=1e-10)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-0.4, 0.4), st.floats(0.3, 1.5), st.floats(1, 4),
       st.floats(-1.5, 1.5), st.floats(-0.3, 0.3))
def test_overlap_matches_closed_form(q0, p0, _, sq, excess, dq, dp):
    spec = GaussianSpec(q0, p0, sq, HBAR / (2 * sq) * excess, HBAR)
    d = Displacement(dq, dp)
    closed, _ = gaussian_overlap_closed_form(spec, d)
    direct = abs(overlap_c(gaussian_state(GRID, spec), d)) ** 2
    if closed >= 1e-6:
        assert direct == pytest.approx(closed, rel=1e-8)
    else:  # relative accuracy of a cancelling quadrature is not resolvable this deep
        assert direct == pytest.approx(closed, abs=1e-14)


def test_min_uncertainty_radicand_vanishes():
    spec = GaussianSpec(0, 0, 0.3, HBAR / 0.6, HBAR)
    d = Displacement(0.4, -0.2)
    assert gaussian_delta_s(spec, d) == pytest.approx(math.hypot(spec.sigma_p * 0.4, 0.3 * 0.2))


@given(st.floats(0.3, 1.5), st.floats(1.0, 4.0), st.floats(-2, 2), st.floats(-0.5, 0.5))
def test_signed_cross_term_form(sq, excess, dq, dp):
    spec = GaussianSpec(0, 0, sq, HBAR / (2 * sq) * excess, HBAR)
    prod = dq * dp
    rad = max((2 * prod * spec.sigma_p * sq / HBAR) ** 2 - prod ** 2, 0.0)
    literal = (spec.sigma_p * dq) ** 2 + (sq * dp) ** 2 + math.copysign(HBAR * math.sqrt(rad), prod)
    assert gaussian_delta_s(spec, Displacement(dq, dp)) ** 2 == pytest.approx(literal, rel=1e-7, abs=1e-12)


def test_worked_example_overlap():
    sq, sp = math.sqrt(HBAR) / 10, 10 * math.sqrt(HBAR)
    spec = GaussianSpec(0, 0, sq, sp, HBAR)
    d = Displacement(math.sqrt(HBAR) / 2, math.sqrt(HBAR) / 2)
    c2, ds = gaussian_overlap_closed_form(spec, d)
    assert ds / HBAR == pytest.approx(5.0433632331899533, rel=1e-12)
    assert c2 == pytest.approx(8.9845677761966521e-12, rel=1e-9)
    g = make_grid(8192, -12, 12, HBAR)
    assert abs(overlap_c(gaussian_state(g, spec), d)) ** 2 < 1e-10


def test_closed_form_zero_displacement():
    spec = GaussianSpec(0, 0, 0.5, 0.3, HBAR)
    assert gaussian_overlap_closed_form(spec, Displacement(0, 0)) == (1.0, 0.0)


def test_coupling_map():
    assert coupling_to_displacement(CouplingSpec(1, 0, 0.1)) == Displacement(-0.0, -0.2)
    assert coupling_to_displacement(CouplingSpec(0, 0, 3.0)) == Displacement(0, 0)
    d = coupling_to_displacement(CouplingSpec(0.05, 0.34, 1.0))
    assert (d.dq, d.dp) == pytest.approx((-0.68, -0.1))
    assert d.dq / d.dp == pytest.approx(6.8)


def test_reduced_density_examples():
    h = TwoLevelAmplitudes(1 / math.sqrt(2), 1 / math.sqrt(2))
    assert np.allclose(reduced_density(h, 1.0), 0.5)
    assert np.allclose(reduced_density(h, 0.0), np.diag([0.5, 0.5]))
    assert np.allclose(reduced_density(TwoLevelAmplitudes(1, 0), 0.3 + 0.4j), np.diag([1, 0]))
    with pytest.raises(ValueError):
        reduced_density(h, 1.1)


@given(st.floats(0, 2 * math.pi), st.floats(0, 1), st.floats(0, 1), st.floats(0, 2 * math.pi))
def test_reduced_density_is_a_state(a, b_mod, c_mod, phase):
    chi = TwoLevelAmplitudes(math.cos(a), math.sin(a) * np.exp(1j * b_mod))
    rho = reduced_density(chi, c_mod * np.exp(1j * phase))
    ev = np.linalg.eigvalsh(rho)
    assert np.trace(rho).real == pytest.approx(1, abs=1e-12)
    assert ev.min() >= -1e-12 and ev.max() <= 1 + 1e-12


def test_scan_of_coherent_state(coherent0):
    curve = overlap_scan(coherent0, 6.8, 40, 0.8)
    assert len(curve) == 41
    assert curve.ds[0] == 0 and curve.overlap_sq[0] == 1
    assert np.allclose(curve.overlap_sq, np.exp(-(curve.ds / HBAR) ** 2), rtol=1e-8, atol=1e-300)


def test_scan_truncates_at_grid_edge():
    g = make_grid(512, -16, 16, HBAR)
    psi = coherent_state(g, 0, 1.0, 0.1)
    with pytest.warns(RuntimeWarning):
        curve = overlap_scan(psi, 6.8, 20, 2.0)
    assert 1 < len(curve) < 21


def test_threshold_of_coherent_state(coherent0):
    ds0, dz0 = threshold_search(coherent0, 6.8, 0.5)
    assert ds0 == pytest.approx(0.13320873778523164, abs=1e-9)
    assert dz0 == pytest.approx(0.10313787369382118, abs=1e-9)
    ds_hi, _ = threshold_search(coherent0, 6.8, 1 - 1e-6)
    assert ds_hi < 1e-2 * HBAR
    with pytest.raises(ValueError):
        threshold_search(coherent0, 6.8, 1.0)


def test_small_displacement_law_random_states():
    rng = np.random.default_rng(8)
    for _ in range(5):
        psi = random_state(GRID, rng)
        assert small_ds_coefficient(psi, rng) == pytest.approx(1.0, abs=0.05)
