"""Bessel functions of the first kind J_nu(z) for real nu >= 0 and z >= 0.

Three regimes, all vectorised over ``z``:

* ascending power series for ``z <= SERIES_MAX``;
* Miller backward recurrence, normalised with the Neumann sum
  ``(z/2)^nu0 = sum_k (nu0 + 2k) Gamma(nu0 + k)/k! J_{nu0+2k}(z)`` (nu0 = frac(nu)),
  for intermediate ``z``;
* Hankel asymptotic expansion for ``z > ASYMPTOTIC_MIN``.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

SERIES_MAX = 4.0
ASYMPTOTIC_MIN = 60.0
_SERIES_TERMS = 40
_RESCALE = 1e200


def _series(nu: float, z: np.ndarray) -> np.ndarray:
    x = -(0.25 * z * z)
    term = np.ones_like(z)
    total = np.ones_like(z)
    for k in range(1, _SERIES_TERMS):
        term = term * x / (k * (k + nu))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    if nu == 0:
        return total
    return total * np.power(0.5 * z, nu) * math.exp(-gammaln(nu + 1.0))


def _recurrence(nu: float, z: np.ndarray) -> np.ndarray:
    nu0 = nu - math.floor(nu)
    n = int(math.floor(nu))
    zmax = float(z.max())
    top = max(n, int(zmax)) + 20 + int(math.sqrt(40.0 * max(zmax, 1.0)))
    top += top % 2  # start on an even offset from nu0
    f_next = np.zeros_like(z)
    f_cur = np.full_like(z, 1e-30)
    result = np.zeros_like(z)
    norm = np.zeros_like(z)
    for j in range(top, -1, -1):
        mu = nu0 + j
        if j % 2 == 0:
            k = j // 2
            if j == 0:
                w = math.exp(gammaln(nu0 + 1.0))
            else:
                w = (nu0 + 2 * k) * math.exp(gammaln(nu0 + k) - gammaln(k + 1.0))
            norm = norm + w * f_cur
        if j == n:
            result = f_cur.copy()
        if j == 0:
            break
        f_prev = (2.0 * mu / z) * f_cur - f_next
        f_next, f_cur = f_cur, f_prev
        big = np.abs(f_cur) > _RESCALE
        if np.any(big):
            s = np.where(big, 1.0 / _RESCALE, 1.0)
            f_cur, f_next, result, norm = f_cur * s, f_next * s, result * s, norm * s
    return result * np.power(0.5 * z, nu0) / norm


def _asymptotic(nu: float, z: np.ndarray) -> np.ndarray:
    mu = 4.0 * nu * nu
    p = np.ones_like(z)
    q = np.zeros_like(z)
    a = 1.0
    last = np.inf
    for k in range(1, 60):
        a = a * (mu - (2 * k - 1) ** 2) / (k * 8.0)
        term = a / z ** k
        size = float(np.max(np.abs(term)))
        if size > last:  # asymptotic series started to diverge
            break
        if k % 2:
            q = q + (-1) ** ((k - 1) // 2) * term
        else:
            p = p + (-1) ** (k // 2) * term
        last = size
        if size < 1e-17:
            break
    chi = z - (0.5 * nu + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * z)) * (p * np.cos(chi) - q * np.sin(chi))


def bessel_j(nu: float, z):
    """J_nu(z) for ``nu >= 0`` and ``z >= 0``."""
    nu = float(nu)
    if nu < 0:
        raise ValueError("only non-negative orders are supported")
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr < 0) or np.any(~np.isfinite(z_arr)):
        raise ValueError("bessel_j requires finite z >= 0")
    flat = np.atleast_1d(z_arr).ravel()
    out = np.empty_like(flat)
    lo = flat <= max(SERIES_MAX, 0.0)
    hi = flat > max(ASYMPTOTIC_MIN, nu * nu)
    mid = ~(lo | hi)
    if lo.any():
        out[lo] = _series(nu, flat[lo])
    if mid.any():
        out[mid] = _recurrence(nu, flat[mid])
    if hi.any():
        out[hi] = _asymptotic(nu, flat[hi])
    out = out.reshape(z_arr.shape)
    return float(out) if out.ndim == 0 else out


def bessel_j_over_power(nu: float, z):
    """``J_nu(z) / z^nu``, continuous at ``z = 0`` where it equals ``2^-nu / Gamma(nu+1)``."""
    z_arr = np.asarray(z, dtype=float)
    flat = np.atleast_1d(z_arr).ravel()
    out = np.empty_like(flat)
    small = flat <= SERIES_MAX
    if small.any():
        # series without the z^nu prefactor
        zz = flat[small]
        x = -(0.25 * zz * zz)
        term = np.ones_like(zz)
        total = np.ones_like(zz)
        for k in range(1, _SERIES_TERMS):
            term = term * x / (k * (k + nu))
            total = total + term
        out[small] = total * math.exp(-nu * math.log(2.0) - gammaln(nu + 1.0))
    if (~small).any():
        zz = flat[~small]
        out[~small] = bessel_j(nu, zz) / zz ** nu
    out = out.reshape(z_arr.shape)
    return float(out) if out.ndim == 0 else out


def first_zero(nu: float, lo: float = 0.0, hi: float | None = None, step: float = 0.1) -> float:
    """Smallest positive zero of J_nu, by bracketing on a coarse march then bisection."""
    x = max(lo, 1e-3)
    f = bessel_j(nu, x)
    while True:
        nx = x + step
        if hi is not None and nx > hi:
            raise ValueError("no zero found in the search interval")
        fn = bessel_j(nu, nx)
        if f == 0:
            return x
        if f * fn < 0:
            break
        x, f = nx, fn
    a, b, fa = x, nx, f
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = bessel_j(nu, m)
        if fm == 0 or b - a < 4e-16 * m:
            return m
        if fa * fm < 0:
            b = m
        else:
            a, fa = m, fm
    return 0.5 * (a + b)
