import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from actionscale.grid import GridFitError, make_grid
from actionscale.propagator import (DriveParams, drive_potential, hamiltonian_expectation,
                                    observables_vs_T, prepare, split_step)
from actionscale.states import WaveFunction, coherent_state, moments

from conftest import random_state

HBAR = 0.16
FREE = DriveParams(kappa=0.0)
GRID = make_grid(512, -20.0, 20.0, HBAR)


def test_potential_values():
    p = DriveParams()
    assert drive_potential(0.0, 0.0, p) == pytest.approx(-0.36)
    # at t = pi/2 the cosine is centred on q = l
    assert drive_potential(3.8, math.pi / 2, p) == pytest.approx(-0.36 + 0.005 * 3.8 ** 2)
    assert p.omega == pytest.approx(0.1)


def test_drive_validation():
    with pytest.raises(ValueError):
        DriveParams(m=0.0)
    with pytest.raises(ValueError):
        DriveParams(a_harm=-1.0)
    with pytest.raises(ValueError):
        prepare(coherent_state(GRID, 1.0, 1.0, 0.1), -1.0, 0.01, DriveParams())
    with pytest.raises(ValueError):
        split_step(coherent_state(make_grid(512, -20, 20, 0.2), 1.0, 1.0, 0.1), 0.0, 0.01,
                   DriveParams())


def test_zero_time_is_identity():
    psi = coherent_state(GRID, 5j, 1.0, 0.1)
    assert prepare(psi, 0.0, 0.005, DriveParams()) is psi


def test_harmonic_revival_and_constant_widths():
    psi0 = coherent_state(GRID, 5j, 1.0, 0.1)
    period = 2 * math.pi / FREE.omega
    rec = observables_vs_T(psi0, [0.0, period / 4, period / 2, period], 0.01, FREE,
                           checkpoint_at=[period])
    assert abs(psi0.inner(rec.checkpoints[period])) ** 2 >= 1 - 1e-6
    sq0, sp0 = rec.sigma_q[0], rec.sigma_p[0]
    assert sq0 == pytest.approx(math.sqrt(HBAR / 0.2))
    for sq, sp in zip(rec.sigma_q, rec.sigma_p):
        assert sq == pytest.approx(sq0, rel=1e-6)
        assert sp == pytest.approx(sp0, rel=1e-6)


def test_quarter_period_moves_the_centre():
    psi0 = coherent_state(GRID, 5j, 1.0, 0.1)
    psi = prepare(psi0, 0.5 * math.pi / 0.1, 0.01, FREE)
    # alpha = 5i starts at q = 0 with positive momentum; a quarter period later q is maximal
    q_mean = float(np.sum(GRID.q * np.abs(psi.amplitudes) ** 2) * GRID.dq)
    assert q_mean == pytest.approx(5 * math.sqrt(2 * HBAR / 0.1), rel=1e-6)


@given(st.integers(0, 2 ** 31), st.floats(0.0, 6.0))
def test_reversibility(seed, t0):
    psi = random_state(GRID, np.random.default_rng(seed))
    p = DriveParams()
    dt = 0.01
    fwd = psi
    for i in range(20):
        fwd = split_step(fwd, t0 + i * dt, dt, p)
    back = fwd
    for i in reversed(range(20)):
        back = split_step(back, t0 + (i + 1) * dt, -dt, p)
    assert np.max(np.abs(back.amplitudes - psi.amplitudes)) < 1e-10


def test_unitarity_of_single_step():
    psi = random_state(GRID, np.random.default_rng(1))
    out = split_step(psi, 0.3, 0.05, DriveParams())
    assert out.norm() == pytest.approx(1.0, abs=1e-13)


@pytest.mark.slow
def test_energy_conservation_without_kick():
    psi0 = coherent_state(GRID, 5j, 1.0, 0.1)
    e0 = hamiltonian_expectation(psi0, 0.0, FREE)
    psi = prepare(psi0, 500.0, 0.001, FREE)
    assert abs(hamiltonian_expectation(psi, 500.0, FREE) - e0) / e0 < 1e-8


def test_non_divisible_step_covers_the_interval():
    psi0 = coherent_state(GRID, 5j, 1.0, 0.1)
    a = prepare(psi0, 1.0, 0.3, FREE)      # four steps of 0.25
    b = prepare(psi0, 1.0, 0.25, FREE)
    assert np.max(np.abs(a.amplitudes - b.amplitudes)) < 1e-14


def test_sweep_matches_independent_preparations():
    psi0 = coherent_state(GRID, 5j, 1.0, 0.1)
    p = DriveParams()
    rec = observables_vs_T(psi0, [0.0, 1.0, 3.0], 0.01, p, checkpoint_at=[3.0])
    direct = prepare(psi0, 3.0, 0.01, p)
    assert np.max(np.abs(rec.checkpoints[3.0].amplitudes - direct.amplitudes)) < 1e-12
    assert rec.sigma_q[-1] == pytest.approx(moments(direct).sigma_q, rel=1e-12)
    with pytest.raises(ValueError):
        observables_vs_T(psi0, [3.0, 1.0], 0.01, p)


def test_edge_guard_aborts_on_small_box():
    grid = make_grid(256, -12.0, 12.0, HBAR)
    psi0 = coherent_state(grid, 5j, 1.0, 0.1)
    with pytest.raises(GridFitError, match="edge"):
        prepare(psi0, 20.0, 0.01, FREE)


def test_canonical_sweep_norm_and_spreading(canonical_sweep):
    rec = canonical_sweep
    psi = rec.checkpoints[500.0]
    assert abs(psi.norm() - 1.0) < 1e-9
    i0, i20 = rec.times.index(0.0), rec.times.index(20.0)
    assert rec.patch_action[i20] / rec.patch_action[i0] < 0.1
    assert isinstance(psi, WaveFunction)
