"""Strang split-operator propagation under the driven oscillator

    H(t) = p^2/2m - kappa cos(q - l sin t) + a_harm q^2 / 2
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .grid import EDGE_TOL, Grid, GridFitError, edge_amplitude
from .states import WaveFunction, moments, patch_action

log = logging.getLogger(__name__)

#: Steps between two edge-guard inspections during a propagation.
EDGE_CHECK_EVERY = 200


@dataclass(frozen=True)
class DriveParams:
    m: float = 1.0
    kappa: float = 0.36
    a_harm: float = 0.01
    l: float = 3.8
    hbar: float = 0.16

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError("mass must be positive")
        if self.a_harm < 0:
            raise ValueError("a_harm must be non-negative")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")

    @property
    def omega(self) -> float:
        """Frequency of the unperturbed oscillator, sqrt(a_harm/m)."""
        return math.sqrt(self.a_harm / self.m)


@dataclass
class PreparationRecord:
    times: list[float] = field(default_factory=list)
    sigma_q: list[float] = field(default_factory=list)
    sigma_p: list[float] = field(default_factory=list)
    patch_action: list[float] = field(default_factory=list)
    checkpoints: dict[float, WaveFunction] = field(default_factory=dict)

    def append(self, t: float, psi: WaveFunction):
        mom = moments(psi)
        self.times.append(t)
        self.sigma_q.append(mom.sigma_q)
        self.sigma_p.append(mom.sigma_p)
        self.patch_action.append(patch_action(mom, psi.grid.hbar))


def drive_potential(q, t: float, p: DriveParams):
    return -p.kappa * np.cos(np.asarray(q) - p.l * math.sin(t)) + 0.5 * p.a_harm * np.asarray(q) ** 2


def hamiltonian_expectation(psi: WaveFunction, t: float, p: DriveParams) -> float:
    grid = psi.grid
    phi = psi.momentum()
    kin = np.sum(grid.p ** 2 / (2.0 * p.m) * np.abs(phi) ** 2) * grid.dp
    pot = np.sum(drive_potential(grid.q, t, p) * np.abs(psi.amplitudes) ** 2) * grid.dq
    return float(kin + pot)


class _Stepper:
    """Reusable kinetic phase for one grid/step size; amplitudes as plain arrays."""

    def __init__(self, grid: Grid, dt: float, p: DriveParams):
        if grid.hbar != p.hbar:
            raise ValueError(f"grid hbar {grid.hbar} differs from drive hbar {p.hbar}")
        self.grid, self.dt, self.p = grid, dt, p
        self.kinetic = np.exp(-1j * grid.p_fft ** 2 / (2.0 * p.m) * dt / p.hbar)
        self.harmonic = 0.5 * p.a_harm * np.asarray(grid.q) ** 2

    def __call__(self, psi: np.ndarray, t: float) -> np.ndarray:
        p = self.p
        v = -p.kappa * np.cos(self.grid.q - p.l * math.sin(t + 0.5 * self.dt)) + self.harmonic
        half = np.exp((-0.5j * self.dt / p.hbar) * v)
        return half * sfft.ifft(self.kinetic * sfft.fft(half * psi))


def split_step(psi: WaveFunction, t: float, dt: float, p: DriveParams) -> WaveFunction:
    """One Strang step from ``t`` to ``t + dt``; the potential is frozen at ``t + dt/2``.

    A negative ``dt`` with ``t`` replaced by ``t + dt`` undoes a forward step.
    """
    if dt == 0:
        return psi
    amp = _Stepper(psi.grid, dt, p)(psi.amplitudes, t)
    return WaveFunction(psi.grid, amp)


def _n_steps(span: float, dt: float) -> tuple[int, float]:
    """Whole number of steps covering ``span`` with a step no larger than ``dt``."""
    if span <= 0:
        return 0, dt
    n = max(1, math.ceil(span / dt - 1e-9))
    return n, span / n


def _guard(grid: Grid, amp: np.ndarray, t: float):
    eq = edge_amplitude(amp)
    ep = edge_amplitude(grid.to_momentum(amp))
    if eq > EDGE_TOL or ep > EDGE_TOL:
        raise GridFitError(
            f"wave packet reached the grid edge at t = {t:.6g} "
            f"(edge amplitude {eq:.3e} position, {ep:.3e} momentum)")


def _evolve(grid: Grid, amp: np.ndarray, t0: float, t1: float, dt: float, p: DriveParams,
            step_cache: dict) -> np.ndarray:
    n, h = _n_steps(t1 - t0, dt)
    if n == 0:
        return amp
    key = round(h, 15)
    stepper = step_cache.get(key)
    if stepper is None:
        stepper = step_cache[key] = _Stepper(grid, h, p)
    for i in range(n):
        amp = stepper(amp, t0 + i * h)
        if (i + 1) % EDGE_CHECK_EVERY == 0:
            _guard(grid, amp, t0 + (i + 1) * h)
    _guard(grid, amp, t1)
    return amp


def prepare(psi0: WaveFunction, T: float, dt: float, p: DriveParams) -> WaveFunction:
    """Evolve ``psi0`` from t = 0 to ``T``. ``dt`` is reduced so it divides ``T``."""
    if T < 0:
        raise ValueError("preparation time must be non-negative")
    if not dt > 0:
        raise ValueError("time step must be positive")
    if T == 0:
        return psi0
    amp = _evolve(psi0.grid, psi0.amplitudes, 0.0, T, dt, p, {})
    return WaveFunction(psi0.grid, amp)


def observables_vs_T(psi0: WaveFunction, T_list, dt: float, p: DriveParams,
                     checkpoint_at=()) -> PreparationRecord:
    """Single forward sweep recording widths and patch action at each ``T`` in ``T_list``.

    Each interval between consecutive recording times is covered by a whole
    number of steps of size at most ``dt``.
    """
    times = sorted(set(float(t) for t in T_list) | set(float(t) for t in checkpoint_at))
    if list(T_list) != sorted(T_list):
        raise ValueError("T_list must be ascending")
    if times and times[0] < 0:
        raise ValueError("preparation times must be non-negative")
    record_at = set(float(t) for t in T_list)
    keep = set(float(t) for t in checkpoint_at)
    rec = PreparationRecord()
    grid = psi0.grid
    amp, t = psi0.amplitudes, 0.0
    cache: dict = {}
    for target in times:
        amp = _evolve(grid, amp, t, target, dt, p, cache)
        t = target
        psi = WaveFunction(grid, amp)
        if target in record_at:
            rec.append(target, psi)
        if target in keep:
            rec.checkpoints[target] = psi
        log.debug("reached T=%g", target)
    return rec
