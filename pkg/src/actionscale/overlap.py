"""Displacement operators and the overlap C = <psi| D(dq, dp) |psi>.

``D(dq, dp) = exp(i (p dq + q dp) / hbar)``. Acting on a wave function it gives
``exp(i dq dp / 2hbar) exp(i q dp / hbar) psi(q + dq)``, i.e. the state moves by
``-dq`` in position and ``+dp`` in momentum.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .grid import EDGE_TOL, GridFitError, check_fit, edge_amplitude, quadrature
from .states import GaussianSpec, Moments, WaveFunction, delta_s, delta_z, moments

#: Ray-parameter step of the first-crossing march, as a fraction of the
#: displacement that gives Delta S = hbar.
THRESHOLD_MARCH_STEP = 1.0 / 64
#: The march gives up beyond this many hbar of Delta S.
THRESHOLD_MAX_DS = 50.0


@dataclass(frozen=True)
class Displacement:
    dq: float
    dp: float

    def __post_init__(self):
        if not (math.isfinite(self.dq) and math.isfinite(self.dp)):
            raise ValueError(f"non-finite displacement ({self.dq}, {self.dp})")

    def __neg__(self) -> "Displacement":
        return Displacement(-self.dq, -self.dp)

    def scaled(self, factor: float) -> "Displacement":
        return Displacement(factor * self.dq, factor * self.dp)


@dataclass(frozen=True)
class CouplingSpec:
    c_q: float
    c_p: float
    dt: float

    def __post_init__(self):
        if self.dt < 0:
            raise ValueError("interaction time must be non-negative")


@dataclass(frozen=True)
class TwoLevelAmplitudes:
    alpha: complex
    beta: complex

    def __post_init__(self):
        n = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(n - 1.0) > 1e-12:
            raise ValueError(f"|alpha|^2 + |beta|^2 = {n!r}, expected 1")


@dataclass(frozen=True)
class OverlapCurve:
    """Overlap sampled along the ray ``dq = ratio * dp``."""

    ratio: float
    dq: np.ndarray
    dp: np.ndarray
    ds: np.ndarray
    dz: np.ndarray
    overlap_sq: np.ndarray
    phase: np.ndarray

    def __len__(self):
        return len(self.dp)

    def columns(self) -> dict[str, np.ndarray]:
        return {"dq": self.dq, "dp": self.dp, "ds": self.ds, "dz": self.dz,
                "overlap_sq": self.overlap_sq, "arg_c": self.phase}


def _shifted(psi: WaveFunction, dq: float) -> np.ndarray:
    """Samples of psi(q + dq); raises if the translated copy wraps around."""
    shifted = psi.grid.translate(psi.amplitudes, dq)
    if dq != 0 and edge_amplitude(shifted) > EDGE_TOL:
        raise GridFitError(f"translation by {dq:+.6g} pushes the state across the grid boundary")
    return shifted


def apply_displacement(psi: WaveFunction, d: Displacement) -> WaveFunction:
    """Return ``D(d)|psi>``."""
    grid = psi.grid
    if d.dq == 0 and d.dp == 0:
        return psi
    amp = _shifted(psi, d.dq)
    amp = np.exp(1j * d.dq * d.dp / (2.0 * grid.hbar)) * np.exp(1j * grid.q * d.dp / grid.hbar) * amp
    check_fit(grid, amp, what="displaced state")
    return WaveFunction(grid, amp)


def overlap_c(psi: WaveFunction, d: Displacement) -> complex:
    """``<psi|D(d)|psi>`` as the phased autocorrelation integral."""
    if d.dq == 0 and d.dp == 0:
        return 1.0 + 0.0j
    grid = psi.grid
    shifted = _shifted(psi, d.dq)
    integrand = np.exp(1j * grid.q * d.dp / grid.hbar) * np.conj(psi.amplitudes) * shifted
    return complex(np.exp(1j * d.dq * d.dp / (2.0 * grid.hbar)) * quadrature(integrand, grid.dq))


def gaussian_delta_s(spec: GaussianSpec, d: Displacement) -> float:
    """Exact Delta S of the Gaussian ``spec`` for displacement ``d``.

    The square-root term ``hbar*sqrt((2 dq dp sq sp/hbar)^2 - (dq dp)^2)`` carries
    the sign of ``dq*dp``: the chirp of :func:`~actionscale.states.gaussian_state`
    makes cov_qp >= 0, so the cross term adds for displacements along the
    first/third quadrant and subtracts otherwise. It is evaluated as the equal
    quantity ``2 dq dp cov_qp``, which avoids cancellation near minimum uncertainty.
    """
    prod = d.dq * d.dp
    ds2 = (spec.sigma_p * d.dq) ** 2 + (spec.sigma_q * d.dp) ** 2 + 2.0 * prod * spec.cov_qp
    return math.sqrt(max(ds2, 0.0))


def gaussian_overlap_closed_form(spec: GaussianSpec, d: Displacement) -> tuple[float, float]:
    """``(|C|^2, Delta S)`` for a Gaussian state, with ``|C|^2 = exp(-(Delta S/hbar)^2)``."""
    ds = gaussian_delta_s(spec, d)
    return math.exp(-(ds / spec.hbar) ** 2), ds


def coupling_to_displacement(c: CouplingSpec) -> Displacement:
    return Displacement(-2.0 * c.c_p * c.dt, -2.0 * c.c_q * c.dt)


def reduced_density(chi: TwoLevelAmplitudes, c: complex) -> np.ndarray:
    """Reduced density matrix of the two-level system in the pointer basis.

    ``c`` is the overlap <psi_-|psi_+> supplied by the caller; the (+,-) entry
    is ``alpha * conj(beta) * c``.
    """
    if abs(c) > 1.0 + 1e-12:
        raise ValueError(f"|c| = {abs(c)!r} exceeds 1")
    a, b = complex(chi.alpha), complex(chi.beta)
    off = a * np.conj(b) * c
    return np.array([[abs(a) ** 2, off], [np.conj(off), abs(b) ** 2]], dtype=complex)


def overlap_scan(psi: WaveFunction, ratio: float, n_samples: int, dp_max: float, *,
                 mom: Moments | None = None, workers: int = 1) -> OverlapCurve:
    """Sample ``|C|^2`` at ``dp_j = j*dp_max/n_samples``, ``dq_j = ratio*dp_j`` (j = 0..n_samples).

    If the ray leaves the grid the scan is truncated at the last admissible
    sample and a warning is emitted.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    mom = moments(psi) if mom is None else mom
    dp = dp_max * np.arange(n_samples + 1) / n_samples
    dq = ratio * dp

    def one(j):
        try:
            return overlap_c(psi, Displacement(float(dq[j]), float(dp[j])))
        except GridFitError:
            return None

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            values = list(pool.map(one, range(len(dp))))
    else:
        values = [one(j) for j in range(len(dp))]
    n_ok = next((j for j, v in enumerate(values) if v is None), len(values))
    if n_ok < len(values):
        warnings.warn(f"overlap scan truncated at sample {n_ok}: displacement leaves the grid",
                      RuntimeWarning, stacklevel=2)
    c = np.array(values[:n_ok], dtype=complex)
    dq, dp = dq[:n_ok], dp[:n_ok]
    return OverlapCurve(
        ratio=ratio, dq=dq, dp=dp,
        ds=np.atleast_1d(delta_s(mom, dq, dp)), dz=np.atleast_1d(delta_z(dq, dp)),
        overlap_sq=np.abs(c) ** 2, phase=np.angle(c),
    )


def threshold_search(psi: WaveFunction, ratio: float, target: float = 0.5, *,
                     mom: Moments | None = None, rtol: float = 1e-10) -> tuple[float, float]:
    """First crossing of ``|C|^2 = target`` along the ray ``dq = ratio*dp``.

    Marches outward from zero in steps of ``THRESHOLD_MARCH_STEP`` of the unit
    Delta S displacement, then refines the bracketing interval with Brent's
    method. Returns ``(Delta S_0, Delta Z_0)``.
    """
    if not 0.0 < target < 1.0:
        raise ValueError("target must lie in (0, 1)")
    mom = moments(psi) if mom is None else mom
    hbar = psi.grid.hbar
    unit = delta_s(mom, ratio, 1.0)  # Delta S per unit dp along the ray
    if not unit > 0:
        raise ValueError("degenerate ray: Delta S vanishes identically")
    s_hbar = hbar / unit
    step = THRESHOLD_MARCH_STEP * s_hbar
    s_max = THRESHOLD_MAX_DS * s_hbar

    def f(s):
        return abs(overlap_c(psi, Displacement(ratio * s, s))) ** 2 - target

    lo = 0.0
    while True:
        hi = lo + step
        if hi > s_max:
            raise GridFitError(f"no crossing of |C|^2 = {target} up to Delta S = {THRESHOLD_MAX_DS} hbar")
        try:
            f_hi = f(hi)
        except GridFitError as exc:
            raise GridFitError(
                f"no crossing of |C|^2 = {target} before the ray leaves the grid "
                f"(scan limit dp = {lo:.6g}, Delta S = {lo * unit:.6g})") from exc
        if f_hi <= 0:
            break
        lo = hi
    s0 = hi if f_hi == 0 else brentq(f, lo, hi, xtol=1e-300, rtol=rtol)
    return s0 * unit, delta_z(ratio * s0, s0)
