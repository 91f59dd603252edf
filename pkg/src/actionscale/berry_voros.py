"""Microcanonical (Berry-Voros) overlap of the f-dimensional harmonic oscillator.

Everything here works in rescaled coordinates in which the oscillator is
isotropic with mass ``M`` and frequency ``omega``; :func:`rescale_displacement`
maps a physical displacement into them. Eigenfunctions are never built: a
state enters only through its level weights ``|c_n|^2``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .bessel import bessel_j_over_power

#: Largest admissible probability mass left outside the retained levels.
TAIL_TOL = 1e-10
#: Smallest sample budget accepted by the Monte-Carlo shell oracle.
MIN_ORACLE_SAMPLES = 10_000


def default_n_max(alpha: complex) -> int:
    n_mean = abs(alpha) ** 2
    return math.ceil(n_mean + 12.0 * math.sqrt(n_mean))


def poisson_weights(alpha: complex, n_max: int | None = None) -> np.ndarray:
    """Level populations ``exp(-|a|^2) |a|^(2n) / n!`` of a coherent state, n = 0..n_max."""
    if n_max is None:
        n_max = default_n_max(alpha)
    mean = abs(alpha) ** 2
    if mean == 0.0:
        w = np.zeros(n_max + 1)
        w[0] = 1.0
        return w
    tail = float(poisson.sf(n_max, mean))
    if tail > TAIL_TOL:
        raise ValueError(
            f"n_max = {n_max} leaves Poisson tail {tail:.3e} > {TAIL_TOL:.0e}; "
            f"use at least {default_n_max(alpha)}")
    return poisson.pmf(np.arange(n_max + 1), mean)


@dataclass(frozen=True)
class FDisplacement:
    """Displacement in f degrees of freedom, one (dq_i, dp_i) per coordinate."""

    dq: tuple[float, ...]
    dp: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "dq", tuple(float(x) for x in np.atleast_1d(self.dq)))
        object.__setattr__(self, "dp", tuple(float(x) for x in np.atleast_1d(self.dp)))
        if len(self.dq) != len(self.dp):
            raise ValueError("dq and dp must have the same length")

    @property
    def f(self) -> int:
        return len(self.dq)

    @classmethod
    def zero(cls, f: int) -> "FDisplacement":
        return cls((0.0,) * f, (0.0,) * f)

    def norms(self) -> tuple[float, float]:
        return float(np.linalg.norm(self.dq)), float(np.linalg.norm(self.dp))


def _as_fdisp(d) -> FDisplacement:
    if isinstance(d, FDisplacement):
        return d
    return FDisplacement((d.dq,), (d.dp,))


@dataclass(frozen=True)
class BVModel:
    f: int
    M: float
    omega: float
    hbar: float
    energies: np.ndarray
    weights: np.ndarray
    omegas: tuple[float, ...] = ()
    masses: tuple[float, ...] = ()

    def __post_init__(self):
        if self.f < 1 or int(self.f) != self.f:
            raise ValueError("f must be a positive integer")
        if not (self.M > 0 and self.omega > 0 and self.hbar > 0):
            raise ValueError("M, omega and hbar must be positive")
        object.__setattr__(self, "energies", np.asarray(self.energies, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if self.energies.shape != self.weights.shape:
            raise ValueError("energies and weights must have equal length")
        if np.any(self.weights < 0):
            raise ValueError("weights must be non-negative")
        total = float(self.weights.sum())
        if not (1.0 - TAIL_TOL <= total <= 1.0 + 1e-12):
            raise ValueError(f"weights sum to {total!r}, outside [1 - {TAIL_TOL:.0e}, 1]")
        if np.any(self.energies <= 0):
            raise ValueError("level energies must be positive")
        omegas = self.omegas or (self.omega,) * self.f
        masses = self.masses or (self.M,) * self.f
        if len(omegas) != self.f or len(masses) != self.f:
            raise ValueError("omegas and masses need one entry per degree of freedom")
        object.__setattr__(self, "omegas", tuple(float(w) for w in omegas))
        object.__setattr__(self, "masses", tuple(float(m) for m in masses))

    @classmethod
    def coherent(cls, alpha: complex = 5j, f: int = 1, M: float = 1.0, omega: float = 0.1,
                 hbar: float = 0.16, n_max: int | None = None, omegas=(), masses=()) -> "BVModel":
        """Isotropic levels ``hbar omega (n + f/2)`` populated with Poisson weights of ``alpha``."""
        w = poisson_weights(alpha, n_max)
        e = hbar * omega * (np.arange(w.size) + 0.5 * f)
        return cls(f, M, omega, hbar, e, w, tuple(omegas), tuple(masses))


@dataclass(frozen=True)
class BVActionSet:
    sigma_qn: np.ndarray
    sigma_pn: np.ndarray
    ds_n: np.ndarray
    ds_bar: float


def density_of_states(E: float, model: BVModel) -> float:
    if not E > 0:
        raise ValueError("density of states needs E > 0")
    f = model.f
    return math.exp((f - 1) * math.log(E) - gammaln(f) - f * math.log(model.hbar * model.omega))


def bv_sigma(E_n, model: BVModel):
    """Shell widths ``(sqrt(E/(M omega^2)), sqrt(M E))`` at energy ``E_n``."""
    E_n = np.asarray(E_n, dtype=float)
    return np.sqrt(E_n / (model.M * model.omega ** 2)), np.sqrt(model.M * E_n)


def bv_action_n(d, sigma_qn, sigma_pn):
    dq, dp = _as_fdisp(d).norms()
    return np.hypot(dp * np.asarray(sigma_qn), dq * np.asarray(sigma_pn))


def rescale_displacement(d_tilde, model: BVModel) -> FDisplacement:
    """Physical displacement to the isotropic rescaled frame of ``model``."""
    d_tilde = _as_fdisp(d_tilde)
    if d_tilde.f != model.f:
        raise ValueError(f"displacement has {d_tilde.f} components, model has f = {model.f}")
    m = np.asarray(model.masses)
    w = np.asarray(model.omegas)
    dq = np.sqrt(m / model.M) * np.asarray(d_tilde.dq)
    dp = np.sqrt(model.M * model.omega ** 2 / (m * w ** 2)) * np.asarray(d_tilde.dp)
    return FDisplacement(tuple(dq), tuple(dp))


def bv_eigen_char(f: int, ds_n, hbar: float):
    """Shell average of exp(iS/hbar) for one level; equals J_0(sqrt(2) ds/hbar) when f = 1."""
    s = np.asarray(ds_n, dtype=float) / hbar
    if np.any(s < 0):
        raise ValueError("ds_n must be non-negative")
    nu = f - 1
    # J_nu(x)/x^nu with x = sqrt(2) s, so J_nu(x)/s^nu = 2^(nu/2) J_nu(x)/x^nu
    val = math.exp(nu * math.log(2.0) + gammaln(f)) * bessel_j_over_power(nu, math.sqrt(2.0) * s)
    return float(val) if np.ndim(val) == 0 else val


def bv_actions(model: BVModel, d) -> BVActionSet:
    sq, sp = bv_sigma(model.energies, model)
    ds_n = bv_action_n(d, sq, sp)
    ds_bar = math.sqrt(float(np.sum(model.weights * ds_n ** 2)) / float(np.sum(model.weights)))
    return BVActionSet(sq, sp, ds_n, ds_bar)


def bv_overlap(model: BVModel, d) -> tuple[float, float]:
    """``(c_bar, ds_bar)`` for a displacement given in the rescaled frame.

    Both averages are taken over the retained levels, i.e. the truncated weights
    are renormalised, so ``c_bar`` is exactly 1 at zero displacement.
    """
    acts = bv_actions(model, d)
    c_bar = float(np.sum(model.weights * bv_eigen_char(model.f, acts.ds_n, model.hbar))
                  / np.sum(model.weights))
    return c_bar, acts.ds_bar


def bv_scan(model: BVModel, ratio: float, dp_values) -> tuple[np.ndarray, np.ndarray]:
    """``c_bar`` and ``ds_bar`` along the one-dimensional ray dq = ratio * dp (f = 1)."""
    if model.f != 1:
        raise ValueError("the ray scan is defined for f = 1")
    out = [bv_overlap(model, FDisplacement((ratio * dp,), (dp,))) for dp in np.asarray(dp_values)]
    c, s = zip(*out) if out else ((), ())
    return np.array(c), np.array(s)


@dataclass(frozen=True)
class OracleEstimate:
    value: complex
    stderr_re: float
    stderr_im: float
    n_samples: int
    per_stream: tuple = field(default=(), repr=False)

    def consistent_with(self, target: complex, n_sigma: float = 3.0) -> bool:
        ok_re = abs(self.value.real - target.real) <= n_sigma * self.stderr_re
        # an exactly cancelling imaginary part has zero spread
        ok_im = abs(self.value.imag - target.imag) <= max(n_sigma * self.stderr_im, 1e-15)
        return ok_re and ok_im


def _shell_stream(model: BVModel, E: float, d: FDisplacement, n: int, seq: np.random.SeedSequence,
                  antithetic: bool, physical: bool, batch: int = 200_000):
    """Sums of Re, Im and their squares over ``n`` shell samples from one seeded stream."""
    rng = np.random.default_rng(seq)
    f = model.f
    rq = math.sqrt(2.0 * E / (model.M * model.omega ** 2))
    rp = math.sqrt(2.0 * model.M * E)
    dq = np.asarray(d.dq)
    dp = np.asarray(d.dp)
    if physical:
        # rescaled (isotropic) coordinates back to the physical ones
        m = np.asarray(model.masses)
        w = np.asarray(model.omegas)
        cq = (model.omega / w) * np.sqrt(model.M / m)
        cp = np.sqrt(m / model.M)
    else:
        cq = cp = np.ones(f)
    sums = np.zeros(4)
    done = 0
    while done < n:
        k = min(batch, n - done)
        x = rng.standard_normal((k, 2 * f))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        q = rq * x[:, :f] * cq
        p = rp * x[:, f:] * cp
        phase = (p @ dq + q @ dp) / model.hbar
        if antithetic:
            # (q, p) and (-q, -p) lie on the same shell; their mean is real
            re, im = np.cos(phase), np.zeros(k)
        else:
            re, im = np.cos(phase), np.sin(phase)
        sums += (re.sum(), im.sum(), (re * re).sum(), (im * im).sum())
        done += k
    return n, sums


def mc_microcanonical_oracle(model: BVModel, E: float, d, n_samples: int, seed: int, *,
                             n_streams: int = 4, antithetic: bool = True, physical: bool = False,
                             workers: int = 1) -> OracleEstimate:
    """Brute-force shell average of exp(i(p.dq + q.dp)/hbar) at energy ``E``.

    Points are uniform on the shell H = E, drawn as normalised 2f-dimensional
    Gaussian directions scaled onto the ellipsoid. The budget is split over
    ``n_streams`` independent streams spawned from ``SeedSequence(seed)``; stream
    ``i`` always receives child ``i`` and the same share of samples, so the
    result does not depend on ``workers``. With ``antithetic`` each draw is
    paired with its mirror image (one antithetic pair counts as one sample).
    With ``physical`` the displacement is read in the original anisotropic
    coordinates given by ``model.masses`` and ``model.omegas``.
    """
    if n_samples < MIN_ORACLE_SAMPLES:
        raise ValueError(f"oracle needs at least {MIN_ORACLE_SAMPLES} samples")
    d = _as_fdisp(d)
    if d.f != model.f:
        raise ValueError("displacement dimension does not match the model")
    children = np.random.SeedSequence(seed).spawn(n_streams)
    shares = [n_samples // n_streams + (1 if i < n_samples % n_streams else 0) for i in range(n_streams)]

    def run(i):
        return _shell_stream(model, E, d, shares[i], children[i], antithetic, physical)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, range(n_streams)))
    else:
        parts = [run(i) for i in range(n_streams)]
    n = sum(k for k, _ in parts)
    tot = sum(s for _, s in parts)
    mean_re, mean_im = tot[0] / n, tot[1] / n
    var_re = max(tot[2] / n - mean_re ** 2, 0.0) * n / (n - 1)
    var_im = max(tot[3] / n - mean_im ** 2, 0.0) * n / (n - 1)
    per_stream = tuple(complex(s[0] / k, s[1] / k) for k, s in parts)
    return OracleEstimate(complex(mean_re, mean_im), math.sqrt(var_re / n), math.sqrt(var_im / n),
                          n, per_stream)
