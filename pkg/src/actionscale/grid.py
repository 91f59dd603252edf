"""Uniform periodic phase-space lattice and the hbar-scaled Fourier pair.

Convention used everywhere in the package::

    phi(p) = (2 pi hbar)^(-1/2) * integral dq exp(-i q p / hbar) psi(q)

Position samples are ``q_k = q_min + k*dq`` (k = 0..N-1). Momentum samples are
exposed in increasing order, ``p_j = (j - N/2)*dp`` with ``dp = 2 pi hbar/(N dq)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

#: Number of lattice points at each end of an axis inspected by the edge guard.
EDGE_WIDTH = 5
#: Largest amplitude tolerated inside the edge band.
EDGE_TOL = 1e-12


class NumericalGuardError(RuntimeError):
    """A runtime numerical guard tripped (state leaving the lattice, etc.)."""


class GridFitError(NumericalGuardError):
    """A wave function has non-negligible amplitude at the lattice boundary."""


class EdgeWarning(UserWarning):
    pass


def _is_power_of_two(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    n_points: int
    q_min: float
    q_max: float
    hbar: float

    def __post_init__(self):
        if isinstance(self.n_points, bool) or int(self.n_points) != self.n_points:
            raise ValueError(f"n_points must be an integer, got {self.n_points!r}")
        object.__setattr__(self, "n_points", int(self.n_points))
        if not _is_power_of_two(self.n_points):
            raise ValueError(f"n_points must be a power of two >= 2, got {self.n_points}")
        if not self.q_max > self.q_min:
            raise ValueError(f"empty interval [{self.q_min}, {self.q_max})")
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")

    @property
    def length(self) -> float:
        return self.q_max - self.q_min

    @property
    def dq(self) -> float:
        return self.length / self.n_points

    @property
    def dp(self) -> float:
        return 2.0 * np.pi * self.hbar / (self.n_points * self.dq)

    @property
    def p_max(self) -> float:
        """Momentum half-range: the lattice spans [-p_max, p_max)."""
        return np.pi * self.hbar / self.dq

    @cached_property
    def q(self) -> np.ndarray:
        q = self.q_min + self.dq * np.arange(self.n_points)
        q.flags.writeable = False
        return q

    @cached_property
    def p(self) -> np.ndarray:
        p = self.dp * (np.arange(self.n_points) - self.n_points // 2)
        p.flags.writeable = False
        return p

    @cached_property
    def p_fft(self) -> np.ndarray:
        """Momenta in FFT natural order (what ``scipy.fft.fft`` of a row yields)."""
        p = 2.0 * np.pi * self.hbar * sfft.fftfreq(self.n_points, self.dq)
        p.flags.writeable = False
        return p

    @cached_property
    def _momentum_phase(self) -> np.ndarray:
        # exp(-i q_min p / hbar) on the increasing momentum lattice
        ph = np.exp(-1j * self.q_min * self.p / self.hbar)
        ph.flags.writeable = False
        return ph

    def to_momentum(self, psi: np.ndarray) -> np.ndarray:
        """Momentum amplitudes on ``self.p`` (increasing order)."""
        psi = np.asarray(psi)
        scale = self.dq / np.sqrt(2.0 * np.pi * self.hbar)
        return scale * self._momentum_phase * sfft.fftshift(sfft.fft(psi))

    def to_position(self, phi: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`to_momentum`."""
        phi = np.asarray(phi)
        scale = np.sqrt(2.0 * np.pi * self.hbar) / self.dq
        return scale * sfft.ifft(sfft.ifftshift(np.conj(self._momentum_phase) * phi))

    def translate(self, psi: np.ndarray, shift: float) -> np.ndarray:
        """Return samples of ``psi(q + shift)`` (exact for band-limited psi)."""
        if shift == 0:
            return np.array(psi, dtype=complex)
        phase = np.exp(1j * self.p_fft * shift / self.hbar)
        return sfft.ifft(sfft.fft(psi) * phase)


def make_grid(n_points: int, q_min: float, q_max: float, hbar: float) -> Grid:
    return Grid(n_points, q_min, q_max, hbar)


def quadrature(values, weight: float):
    """Rectangle rule on a periodic lattice: ``weight * sum(values)``."""
    return weight * np.sum(values)


def edge_amplitude(values: np.ndarray, width: int = EDGE_WIDTH) -> float:
    """Largest modulus among the ``width`` samples at either end of ``values``."""
    values = np.asarray(values)
    return float(max(np.abs(values[:width]).max(), np.abs(values[-width:]).max()))


def check_fit(grid: Grid, psi: np.ndarray, *, what: str = "state", strict: bool = True,
              tol: float = EDGE_TOL) -> tuple[float, float]:
    """Check that ``psi`` stays clear of both lattice boundaries.

    Both the position samples and the momentum amplitudes are inspected. With
    ``strict`` a :class:`GridFitError` is raised, otherwise an
    :class:`EdgeWarning` is emitted. Returns the two edge amplitudes.
    """
    eq = edge_amplitude(psi)
    ep = edge_amplitude(grid.to_momentum(psi))
    if eq > tol or ep > tol:
        msg = (f"{what} does not fit the grid: edge amplitude {eq:.3e} (position), "
               f"{ep:.3e} (momentum) exceeds {tol:.0e}")
        if strict:
            raise GridFitError(msg)
        warnings.warn(msg, EdgeWarning, stacklevel=2)
    return eq, ep
