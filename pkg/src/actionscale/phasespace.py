"""Wigner and Husimi distributions and the overlap identities they satisfy.

Arrays are indexed ``values[k, j]`` with ``k`` running over ``grid.q`` and
``j`` over the increasing momentum lattice ``grid.p``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .grid import Grid
from .overlap import Displacement
from .states import WaveFunction

#: Rows of the Wigner array built per FFT batch (bounds the working memory).
ROW_CHUNK = 256
#: Smallest |chi| accepted when dividing a phase-space average by the kernel.
CHI_MIN = 1e-8


@dataclass(frozen=True)
class Wigner:
    name = "wigner"
    unit_modulus = True

    def chi(self, theta, tau, hbar: float):
        return np.ones(np.broadcast(np.asarray(theta), np.asarray(tau)).shape)


@dataclass(frozen=True)
class Husimi:
    """Gaussian kernel ``exp(-hbar/4 [(tau lam)^2 + (theta/lam)^2])``."""

    lam: float = 1.0
    name = "husimi"
    unit_modulus = False

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("squeezing parameter lambda must be positive")

    def chi(self, theta, tau, hbar: float):
        theta, tau = np.asarray(theta), np.asarray(tau)
        return np.exp(-0.25 * hbar * ((tau * self.lam) ** 2 + (theta / self.lam) ** 2))

    def smoothing_variances(self, hbar: float) -> tuple[float, float]:
        """Position and momentum variances of the Gaussian that smooths W into this Husimi."""
        return hbar / (2.0 * self.lam ** 2), hbar * self.lam ** 2 / 2.0


@dataclass(frozen=True, eq=False)
class PhaseSpaceDistribution:
    grid: Grid
    values: np.ndarray
    kernel: Wigner | Husimi
    source: WaveFunction | None = None

    def __post_init__(self):
        n = self.grid.n_points
        if self.values.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} array, got {self.values.shape}")

    @cached_property
    def power_spectrum(self) -> np.ndarray:
        """``|rfft2(values)|^2``, kept for repeated shifted-product integrals."""
        return np.abs(sfft.rfft2(self.values)) ** 2

    def total(self) -> float:
        return float(self.values.sum() * self.grid.dq * self.grid.dp)

    def marginal_q(self) -> np.ndarray:
        return self.values.sum(axis=1) * self.grid.dp

    def marginal_p(self) -> np.ndarray:
        return self.values.sum(axis=0) * self.grid.dq

    def to_csv(self, path, stride: int = 1):
        """Write the matrix as CSV: header row holds p, first column holds q."""
        g = self.grid
        q = g.q[::stride]
        p = g.p[::stride]
        vals = self.values[::stride, ::stride]
        with open(path, "w") as fh:
            fh.write("q\\p," + ",".join(repr(float(x)) for x in p) + "\n")
            for qk, row in zip(q, vals):
                fh.write(repr(float(qk)) + "," + ",".join(repr(float(x)) for x in row) + "\n")


def _fine_lattice(grid: Grid, amp: np.ndarray, shift: float = 0.0) -> np.ndarray:
    """Band-limited interpolation of ``psi(q + shift)`` onto spacing dq/2 (2N points)."""
    n = grid.n_points
    spec = sfft.fft(amp)
    if shift:
        spec = spec * np.exp(1j * grid.p_fft * shift / grid.hbar)
    padded = np.zeros(2 * n, dtype=complex)
    half = n // 2
    padded[:half] = spec[:half]
    padded[-half + 1:] = spec[half + 1:]
    padded[half] = 0.5 * spec[half]
    padded[-half] = 0.5 * spec[half]
    return 2.0 * sfft.ifft(padded)


def _wigner_rows(grid: Grid, fine: np.ndarray, rows: np.ndarray, dp_shift: float = 0.0) -> np.ndarray:
    """W(q_k, p_j + dp_shift) for ``k`` in ``rows``, from the fine lattice of psi.

    The correlation psi(q - s dq/2) psi*(q + s dq/2) is sampled on s = -N/2..N/2-1
    (q' = s dq), so the p lattice coincides with ``grid.p``.
    """
    n = grid.n_points
    s = np.fft.fftfreq(n, 1.0 / n).astype(np.int64)  # natural order, signed
    idx = 2 * rows[:, None]
    corr = fine[(idx - s[None, :]) % (2 * n)] * np.conj(fine[(idx + s[None, :]) % (2 * n)])
    if dp_shift:
        corr *= np.exp(1j * s * grid.dq * dp_shift / grid.hbar)[None, :]
    out = sfft.ifft(corr, axis=1)
    out = sfft.fftshift(out.real, axes=1)
    return out * (grid.dq * n / (2.0 * np.pi * grid.hbar))


def _row_chunks(n: int):
    for start in range(0, n, ROW_CHUNK):
        yield np.arange(start, min(start + ROW_CHUNK, n))


def wigner(psi: WaveFunction) -> PhaseSpaceDistribution:
    grid = psi.grid
    fine = _fine_lattice(grid, psi.amplitudes)
    values = np.empty((grid.n_points, grid.n_points))
    for rows in _row_chunks(grid.n_points):
        values[rows] = _wigner_rows(grid, fine, rows)
    return PhaseSpaceDistribution(grid, values, Wigner(), psi)


def _gaussian_smooth(grid: Grid, values: np.ndarray, var_q: float, var_p: float) -> np.ndarray:
    n = grid.n_points
    kq = 2.0 * np.pi * sfft.fftfreq(n, grid.dq)
    kp = 2.0 * np.pi * sfft.rfftfreq(n, grid.dp)
    spec = sfft.rfft2(values)
    spec *= np.exp(-0.5 * var_q * kq ** 2)[:, None]
    spec *= np.exp(-0.5 * var_p * kp ** 2)[None, :]
    return sfft.irfft2(spec, s=values.shape)


def husimi(psi: WaveFunction, lam: float = 1.0, *, w: PhaseSpaceDistribution | None = None
           ) -> PhaseSpaceDistribution:
    """Husimi distribution as the Wigner function smoothed by a minimum-uncertainty Gaussian.

    Pass a precomputed Wigner distribution of ``psi`` as ``w`` to skip rebuilding it.
    """
    kernel = Husimi(lam)
    if w is None:
        w = wigner(psi)
    var_q, var_p = kernel.smoothing_variances(psi.grid.hbar)
    values = _gaussian_smooth(psi.grid, w.values, var_q, var_p)
    return PhaseSpaceDistribution(psi.grid, values, kernel, psi)


def _bilinear_shift(grid: Grid, values: np.ndarray, dq: float, dp: float) -> np.ndarray:
    """F(q + dq, p + dp) by periodic bilinear interpolation of the sampled array."""
    a, b = dq / grid.dq, dp / grid.dp
    ia, ib = math.floor(a), math.floor(b)
    fa, fb = a - ia, b - ib
    base = np.roll(values, (-ia, -ib), axis=(0, 1))
    right = np.roll(base, -1, axis=1)
    down = np.roll(base, -1, axis=0)
    diag = np.roll(down, -1, axis=1)
    return ((1 - fa) * (1 - fb) * base + (1 - fa) * fb * right
            + fa * (1 - fb) * down + fa * fb * diag)


def _spectral_product(f: PhaseSpaceDistribution, dq: float, dp: float) -> float:
    """Lattice sum of F(q,p) F(q+dq, p+dp), the shift applied as a Fourier phase (Parseval)."""
    g = f.grid
    n = g.n_points
    kq = 2.0 * np.pi * sfft.fftfreq(n, g.dq)
    kp = 2.0 * np.pi * sfft.rfftfreq(n, g.dp)
    mult = np.full(kp.size, 2.0)  # rfft half-spectrum: interior bins stand for +-k
    mult[0] = 1.0
    mult[-1] = 1.0
    u = np.exp(1j * kq * dq)
    v = np.exp(1j * kp * dp) * mult
    return float(np.real(u @ (f.power_spectrum @ v))) / n ** 2


def moyal_overlap(f: PhaseSpaceDistribution, d: Displacement, method: str = "spectral") -> float:
    """Moyal overlap ``2 pi hbar * integral F(q,p) F_d(q,p) dq dp`` for a unit-modulus kernel.

    ``F_d`` is the distribution of the displaced state ``D(dq, dp) psi``, which
    sits at (q - dq, p + dp); hence ``F_d(q, p) = F(q + dq, p - dp)``.

    ``method="spectral"`` shifts the stored array by a Fourier phase and sums
    through Parseval's relation; the power spectrum is cached, so scans cost one
    matrix-vector product per displacement. ``method="exact"`` re-evaluates the shifted factor on the lattice directly
    from the source state (band-limited translation in q, phase factor in the
    conjugate variable for p). ``method="bilinear"`` interpolates the stored
    array instead and carries an O(dq^2 + dp^2) interpolation error.
    """
    if not f.kernel.unit_modulus:
        raise ValueError(f"Moyal identity requires |chi| = 1; got kernel {f.kernel.name!r}")
    grid = f.grid
    weight = 2.0 * np.pi * grid.hbar * grid.dq * grid.dp
    if method == "bilinear":
        shifted = _bilinear_shift(grid, f.values, d.dq, -d.dp)
        return float(weight * np.sum(f.values * shifted))
    if method == "spectral":
        return weight * _spectral_product(f, d.dq, -d.dp)
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")
    if f.source is None:
        raise ValueError("exact Moyal evaluation needs the source wave function")
    fine = _fine_lattice(grid, f.source.amplitudes, d.dq)
    total = 0.0
    for rows in _row_chunks(grid.n_points):
        total += float(np.sum(f.values[rows] * _wigner_rows(grid, fine, rows, -d.dp)))
    return weight * total


def phase_space_average(f: PhaseSpaceDistribution, d: Displacement) -> complex:
    """``integral F(q,p) exp(i (q dp + p dq)/hbar) dq dp``."""
    g = f.grid
    u = np.exp(1j * g.q * d.dp / g.hbar)
    v = np.exp(1j * g.p * d.dq / g.hbar)
    return complex(u @ (f.values @ v) * g.dq * g.dp)


def overlap_from_distribution(f: PhaseSpaceDistribution, d: Displacement) -> complex:
    """Overlap C as the kernel-corrected phase-space average of exp(iS/hbar)."""
    hbar = f.grid.hbar
    chi = complex(f.kernel.chi(d.dp / hbar, d.dq / hbar, hbar))
    if abs(chi) < CHI_MIN:
        raise ValueError(
            f"kernel value |chi| = {abs(chi):.3e} below {CHI_MIN:.0e} at displacement "
            f"({d.dq:.4g}, {d.dp:.4g}); division would amplify round-off")
    return phase_space_average(f, d) / chi
