"""Wave functions on a :class:`~actionscale.grid.Grid`, their moments and actions.

Coherent-state convention (fixed project-wide)::

    <q> = sqrt(2 hbar / (m omega)) * Re(alpha)
    <p> = sqrt(2 hbar m omega) * Im(alpha)

so ``alpha = 5j`` starts at the origin moving with positive momentum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, check_fit, quadrature

NORM_TOL = 1e-10
#: Relative size of cov_qp below which the covariance is treated as diagonal.
ROTATION_TIE_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Normalised complex amplitudes on a grid. Immutable."""

    grid: Grid
    amplitudes: np.ndarray
    norm_tol: float = field(default=NORM_TOL, repr=False)

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex)
        if amp.shape != (self.grid.n_points,):
            raise ValueError(f"expected {self.grid.n_points} amplitudes, got shape {amp.shape}")
        norm = quadrature(np.abs(amp) ** 2, self.grid.dq)
        if abs(norm - 1.0) > self.norm_tol:
            raise ValueError(f"wave function not normalised: norm = {norm!r}")
        amp.flags.writeable = False
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def normalized(cls, grid: Grid, amplitudes) -> "WaveFunction":
        amp = np.asarray(amplitudes, dtype=complex)
        norm = quadrature(np.abs(amp) ** 2, grid.dq)
        if not norm > 0:
            raise ValueError("cannot normalise a zero wave function")
        return cls(grid, amp / np.sqrt(norm))

    def norm(self) -> float:
        return float(quadrature(np.abs(self.amplitudes) ** 2, self.grid.dq))

    def momentum(self) -> np.ndarray:
        return self.grid.to_momentum(self.amplitudes)

    def inner(self, other: "WaveFunction") -> complex:
        """``<self|other>``."""
        return complex(quadrature(np.conj(self.amplitudes) * other.amplitudes, self.grid.dq))


@dataclass(frozen=True)
class Moments:
    mean_q: float
    mean_p: float
    var_q: float
    var_p: float
    cov_qp: float

    @property
    def sigma_q(self) -> float:
        return math.sqrt(self.var_q)

    @property
    def sigma_p(self) -> float:
        return math.sqrt(self.var_p)

    @property
    def determinant(self) -> float:
        return self.var_q * self.var_p - self.cov_qp ** 2

    def covariance(self) -> np.ndarray:
        return np.array([[self.var_q, self.cov_qp], [self.cov_qp, self.var_p]])


@dataclass(frozen=True)
class GaussianSpec:
    q0: float
    p0: float
    sigma_q: float
    sigma_p: float
    hbar: float

    def __post_init__(self):
        if not (self.sigma_q > 0 and self.sigma_p > 0 and self.hbar > 0):
            raise ValueError("widths and hbar must be positive")
        # 2 sigma_q sigma_p >= hbar, with rounding slack for minimum-uncertainty specs
        if 2.0 * self.sigma_q * self.sigma_p < self.hbar * (1.0 - 1e-12):
            raise ValueError(
                f"2*sigma_q*sigma_p = {2 * self.sigma_q * self.sigma_p!r} is below hbar = {self.hbar!r}")

    @property
    def z(self) -> complex:
        z_r = (self.hbar / self.sigma_p) ** 2
        rad = max(4.0 * self.sigma_q ** 2 * self.sigma_p ** 2 - self.hbar ** 2, 0.0)
        return complex(z_r, z_r * math.sqrt(rad) / self.hbar)

    @property
    def cov_qp(self) -> float:
        """Symmetrised covariance of the chirped Gaussian (always >= 0)."""
        return 0.5 * math.sqrt(max(4.0 * self.sigma_q ** 2 * self.sigma_p ** 2 - self.hbar ** 2, 0.0))


def gaussian_amplitudes(q: np.ndarray, spec: GaussianSpec) -> np.ndarray:
    z = spec.z
    pref = (2.0 * z.real / (np.pi * abs(z) ** 2)) ** 0.25
    return pref * np.exp(1j * spec.p0 * q / spec.hbar - (q - spec.q0) ** 2 / z)


def gaussian_state(grid: Grid, spec: GaussianSpec) -> WaveFunction:
    """General one-dimensional Gaussian (chirp chosen so that cov_qp >= 0)."""
    if not math.isclose(spec.hbar, grid.hbar, rel_tol=1e-12):
        raise ValueError(f"spec.hbar={spec.hbar} differs from grid.hbar={grid.hbar}")
    amp = gaussian_amplitudes(grid.q, spec)
    check_fit(grid, amp, what="Gaussian state")
    return WaveFunction.normalized(grid, amp)


def coherent_spec(alpha: complex, m: float, omega: float, hbar: float) -> GaussianSpec:
    if not (m > 0 and omega > 0):
        raise ValueError("mass and frequency must be positive")
    alpha = complex(alpha)
    return GaussianSpec(
        q0=math.sqrt(2.0 * hbar / (m * omega)) * alpha.real,
        p0=math.sqrt(2.0 * hbar * m * omega) * alpha.imag,
        sigma_q=math.sqrt(hbar / (2.0 * m * omega)),
        sigma_p=math.sqrt(m * omega * hbar / 2.0),
        hbar=hbar,
    )


def coherent_state(grid: Grid, alpha: complex, m: float, omega: float) -> WaveFunction:
    """Coherent state |alpha> of ``p^2/2m + m omega^2 q^2/2`` (global phase dropped)."""
    return gaussian_state(grid, coherent_spec(alpha, m, omega, grid.hbar))


def moments(psi: WaveFunction) -> Moments:
    grid = psi.grid
    amp = psi.amplitudes
    q = grid.q
    rho_q = np.abs(amp) ** 2
    mean_q = float(quadrature(q * rho_q, grid.dq))
    var_q = float(quadrature((q - mean_q) ** 2 * rho_q, grid.dq))

    phi = grid.to_momentum(amp)
    rho_p = np.abs(phi) ** 2
    mean_p = float(quadrature(grid.p * rho_p, grid.dp))
    var_p = float(quadrature((grid.p - mean_p) ** 2 * rho_p, grid.dp))

    # Re<psi| q p |psi>, with p applied spectrally and centred q to limit cancellation
    p_psi = grid.to_position((grid.p - mean_p) * phi)
    qp = quadrature(np.conj(amp) * (q - mean_q) * p_psi, grid.dq)
    return Moments(mean_q, mean_p, var_q, var_p, float(qp.real))


def delta_s(mom: Moments, dq, dp):
    """Characteristic action: RMS fluctuation of ``p*dq + q*dp`` in the state."""
    dq = np.asarray(dq, dtype=float)
    dp = np.asarray(dp, dtype=float)
    rad = mom.var_q * dp ** 2 + mom.var_p * dq ** 2 + 2.0 * mom.cov_qp * dq * dp
    if np.any(rad < 0):
        # only a corrupted (non positive-definite) covariance can get here
        if np.any(rad < -1e-12 * (mom.var_q * dp ** 2 + mom.var_p * dq ** 2)):
            raise ValueError("negative (Delta S)^2: covariance matrix is not positive definite")
        rad = np.maximum(rad, 0.0)
    out = np.sqrt(rad)
    return float(out) if out.ndim == 0 else out


def delta_z(dq, dp):
    """Displacement action ``|dq*dp|``."""
    out = np.abs(np.asarray(dq, dtype=float) * np.asarray(dp, dtype=float))
    return float(out) if out.ndim == 0 else out


def principal_rotation(mom: Moments) -> tuple[float, float, float]:
    """Angle and widths of the frame where the covariance matrix is diagonal.

    With ``R = [[cos t, sin t], [-sin t, cos t]]`` the rotated variables are
    ``(q~, p~) = R (q, p)`` and :func:`rotate_displacement` gives the matching
    displacement components, so that
    ``delta_s**2 == (sigma_qt*dp~)**2 + (sigma_pt*dq~)**2``.
    ``sigma_qt*sigma_pt`` is the classical action of the state's support.
    """
    vq, vp, c = mom.var_q, mom.var_p, mom.cov_qp
    if abs(c) < ROTATION_TIE_TOL * math.sqrt(vq * vp):
        return 0.0, math.sqrt(vq), math.sqrt(vp)
    theta = 0.5 * math.atan2(2.0 * c, vq - vp)
    ct, st = math.cos(theta), math.sin(theta)
    var_qt = vq * ct * ct + 2.0 * c * ct * st + vp * st * st
    var_pt = vq * st * st - 2.0 * c * ct * st + vp * ct * ct
    return theta, math.sqrt(max(var_qt, 0.0)), math.sqrt(max(var_pt, 0.0))


def rotate_displacement(theta: float, dq, dp):
    """Displacement components ``(dq~, dp~)`` in the frame of :func:`principal_rotation`."""
    ct, st = math.cos(theta), math.sin(theta)
    dp_t = ct * np.asarray(dp) + st * np.asarray(dq)
    dq_t = -st * np.asarray(dp) + ct * np.asarray(dq)
    return dq_t, dp_t


def patch_action(mom: Moments, hbar: float) -> float:
    """Scale ``hbar^2/(sigma_q sigma_p)`` of the smallest Wigner-function patches."""
    if not (mom.var_q > 0 and mom.var_p > 0):
        raise ValueError("widths must be positive")
    return hbar ** 2 / (mom.sigma_q * mom.sigma_p)
