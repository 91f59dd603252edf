import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from actionscale.experiments import fig1_times
from actionscale.config import ExperimentConfig
from actionscale.grid import make_grid
from actionscale.propagator import DriveParams, observables_vs_T
from actionscale.states import GaussianSpec, WaveFunction, coherent_state, gaussian_state

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

HBAR = 0.16


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(1024, -40.0, 40.0, HBAR)


@pytest.fixture(scope="session")
def coherent0(small_grid):
    return coherent_state(small_grid, 5j, 1.0, 0.1)


def random_state(grid, rng, n_modes=4):
    """Random superposition of a few Gaussians that fits comfortably on ``grid``."""
    amp = np.zeros(grid.n_points, dtype=complex)
    for _ in range(n_modes):
        sq = rng.uniform(0.4, 1.5)
        spec = GaussianSpec(rng.uniform(-3, 3), rng.uniform(-1, 1), sq,
                            HBAR / (2 * sq) * rng.uniform(1.0, 2.0), HBAR)
        amp += complex(rng.normal(), rng.normal()) * gaussian_state(grid, spec).amplitudes
    return WaveFunction.normalized(grid, amp)


@pytest.fixture(scope="session")
def canonical_cfg():
    return ExperimentConfig()


@pytest.fixture(scope="session")
def canonical_sweep(canonical_cfg):
    """One default-parameter sweep with checkpoints at every fig1 sample time."""
    cfg = canonical_cfg
    grid = make_grid(cfg.n_points, cfg.q_min, cfg.q_max, cfg.hbar)
    p = DriveParams(cfg.m, cfg.kappa, cfg.a_harm, cfg.l, cfg.hbar)
    psi0 = coherent_state(grid, cfg.alpha, cfg.m, p.omega)
    times = fig1_times(cfg)
    return observables_vs_T(psi0, times, cfg.dt, p, checkpoint_at=times)


@pytest.fixture(scope="session")
def state_T500(canonical_sweep):
    return canonical_sweep.checkpoints[500.0]


#: Acceptance verdicts, filled by test_acceptance.py and echoed in the terminal summary.
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
