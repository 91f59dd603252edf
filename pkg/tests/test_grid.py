import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from actionscale.grid import EdgeWarning, Grid, GridFitError, check_fit, make_grid, quadrature
from actionscale.states import GaussianSpec, WaveFunction, gaussian_state

HBAR = 0.16


def test_make_grid_spacings():
    g = make_grid(2048, -40, 40, HBAR)
    assert g.dq == 0.0390625
    assert g.dp == pytest.approx(0.012566370614359173, rel=1e-15)


def test_smallest_grid():
    g = make_grid(2, 0, 1, 1)
    assert g.dq == 0.5
    # dp = 2 pi hbar / (N dq) = 2 pi; the lattice is {-2 pi, 0}
    assert g.dp == pytest.approx(2 * math.pi)
    assert np.allclose(g.p, [-2 * math.pi, 0.0])


@pytest.mark.parametrize("args", [(100, -1, 1, HBAR), (1, 0, 1, 1), (8, 1, 1, 1), (8, 0, 1, 0.0)])
def test_invalid_grids(args):
    with pytest.raises(ValueError):
        make_grid(*args)


def test_lattices():
    g = make_grid(64, -3, 5, HBAR)
    assert np.allclose(g.q, -3 + g.dq * np.arange(64))
    assert np.all(np.diff(g.p) > 0)
    assert g.p[0] == pytest.approx(-math.pi * HBAR / g.dq)
    assert g.p[-1] < math.pi * HBAR / g.dq
    assert g.dq * g.dp * g.n_points == pytest.approx(2 * math.pi * HBAR, rel=1e-15)


def _rand_psi(g, seed):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=g.n_points) + 1j * rng.normal(size=g.n_points)
    return WaveFunction.normalized(g, z)


@given(st.integers(1, 11), st.integers(0, 2**31))
def test_round_trip_and_parseval(log_n, seed):
    g = make_grid(2 ** log_n, -7.0, 9.0, HBAR)
    psi = _rand_psi(g, seed)
    phi = g.to_momentum(psi.amplitudes)
    assert np.max(np.abs(g.to_position(phi) - psi.amplitudes)) < 1e-12
    assert quadrature(np.abs(phi) ** 2, g.dp) == pytest.approx(1.0, abs=1e-12)


def test_centered_gaussian_momentum(small_grid):
    psi = gaussian_state(small_grid, GaussianSpec(0, 0, 0.8, 0.1, HBAR))
    phi = psi.momentum()
    assert np.sum(small_grid.p * np.abs(phi) ** 2) * small_grid.dp == pytest.approx(0, abs=1e-12)
    assert np.argmax(np.abs(phi)) == small_grid.n_points // 2


def test_plane_wave_shift(small_grid):
    p0 = 0.7
    psi = gaussian_state(small_grid, GaussianSpec(0, p0, 3.0, HBAR / 6.0, HBAR))
    phi = psi.momentum()
    mean_p = np.sum(small_grid.p * np.abs(phi) ** 2) * small_grid.dp
    assert mean_p == pytest.approx(p0, abs=1e-10)


def test_single_bin_spike_is_plane_wave(small_grid):
    phi = np.zeros(small_grid.n_points, dtype=complex)
    phi[small_grid.n_points // 2 + 17] = 1.0
    mod = np.abs(small_grid.to_position(phi))
    assert np.ptp(mod) < 1e-14 * mod.max()
    assert np.all(small_grid.to_position(np.zeros_like(phi)) == 0)


def test_quadrature_examples():
    n = 256
    assert quadrature(np.ones(n), 1.0 / n) == pytest.approx(1.0, abs=1e-15)
    g = make_grid(2048, -40, 40, HBAR)
    sq = 0.9
    psi = gaussian_state(g, GaussianSpec(0, 0, sq, HBAR / (2 * sq), HBAR))
    assert quadrature(np.abs(psi.amplitudes) ** 2, g.dq) == pytest.approx(1, abs=1e-12)
    assert quadrature(g.q ** 2 * np.abs(psi.amplitudes) ** 2, g.dq) == pytest.approx(sq ** 2, abs=1e-10)


def test_translate_is_spectral_shift(small_grid):
    psi = gaussian_state(small_grid, GaussianSpec(0.3, 0.2, 0.9, 0.11, HBAR))
    shifted = small_grid.translate(psi.amplitudes, 1.234)
    direct = gaussian_state(small_grid, GaussianSpec(0.3 - 1.234, 0.2, 0.9, 0.11, HBAR)).amplitudes
    phase = shifted[512] / direct[512]
    assert np.max(np.abs(shifted - phase * direct)) < 1e-12


def test_check_fit_guard():
    g = make_grid(256, -5, 5, HBAR)
    wide = np.exp(-g.q ** 2 / 20).astype(complex)
    with pytest.raises(GridFitError):
        check_fit(g, wide)
    with pytest.warns(EdgeWarning):
        check_fit(g, wide, strict=False)
    narrow = np.exp(-2 * g.q ** 2).astype(complex)
    check_fit(g, narrow)


def test_grid_is_immutable():
    g = Grid(8, 0, 1, 1)
    with pytest.raises(AttributeError):
        g.n_points = 16
