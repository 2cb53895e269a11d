"""Semicircle law: density, Stieltjes transform, quantiles, log potential.

The Stieltjes transform uses the branch with m(z) -> 0 as z -> +infinity,
written as m(z) = (-z + z*sqrt(1 - 4/z^2))/2 so the principal square root
lands on the correct sheet everywhere off the support [-2, 2].  The log
potential  L(z) = ∫ log(z - x) ρ(x) dx  is evaluated by adaptive quadrature
(after x = 2 cos φ the integrand is smooth); its value L(2) = 1/2 pins the
implementation in the tests.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .quadrature import adaptive_simpson

EDGE = 2.0


def rho(x):
    """Semicircle density (2π)^{-1} sqrt((4 - x^2)_+)."""
    x = np.asarray(x, dtype=float)
    return np.sqrt(np.clip(4.0 - x * x, 0.0, None)) / (2.0 * np.pi)


def cdf(x):
    """∫_{-2}^{x} ρ, clamped outside the support."""
    x = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
    return 0.5 + x * np.sqrt(4.0 - x * x) / (4.0 * np.pi) + np.arcsin(x / 2.0) / np.pi


def _check_off_cut(z) -> None:
    z = np.asarray(z)
    on_cut = (np.imag(z) == 0) & (np.real(z) >= -2.0) & (np.real(z) <= 2.0)
    if np.any(on_cut):
        raise ValueError("argument lies on the spectral cut [-2, 2]")


def stieltjes(z):
    """m(z) = (-z + sqrt(z^2 - 4))/2 on the branch vanishing at infinity."""
    _check_off_cut(z)
    z = np.asarray(z, dtype=complex)
    m = 0.5 * (-z + z * np.sqrt(1.0 - 4.0 / (z * z)))
    return np.real(m) if np.all(np.imag(np.asarray(z)) == 0) else m


def stieltjes_d1(z):
    """m'(z); satisfies m' = m^2 / (1 - m^2)."""
    m = np.asarray(stieltjes(z))
    return m * m / (1.0 - m * m)


def stieltjes_d2(z):
    """m''(z) = -2 (z^2 - 4)^{-3/2} on the physical branch."""
    _check_off_cut(z)
    z = np.asarray(z, dtype=complex)
    s = z * np.sqrt(1.0 - 4.0 / (z * z))
    out = -2.0 / s**3
    return np.real(out) if np.all(np.imag(np.asarray(z)) == 0) else out


def stieltjes_d3(z):
    _check_off_cut(z)
    z = np.asarray(z, dtype=complex)
    s = z * np.sqrt(1.0 - 4.0 / (z * z))
    out = 6.0 * z / s**5
    return np.real(out) if np.all(np.imag(np.asarray(z)) == 0) else out


@lru_cache(maxsize=4096)
def _log_potential_scalar(z: complex) -> complex:
    def integrand(phi):
        return np.log(z - 2.0 * np.cos(phi)) * (2.0 / np.pi) * np.sin(phi) ** 2

    val, _, _ = adaptive_simpson(integrand, 0.0, np.pi, abs_tol=1e-12, init_panels=16)
    return val


def log_potential(z):
    """L(z) = ∫ log(z - x) ρ(x) dx by adaptive quadrature (abs tol 1e-10)."""
    _check_off_cut(z)
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    vals = np.array([_log_potential_scalar(complex(w)) for w in zs])
    if np.all(np.imag(zs) == 0) and np.all(np.real(zs) > -2.0):
        vals = np.real(vals)
    return vals[0] if np.ndim(z) == 0 else vals.reshape(np.shape(z))


def quantile(i: int, n: int) -> float:
    """γ_i with ∫_{γ_i}^{2} ρ = i/N, found by bisection."""
    if not 1 <= i <= n:
        raise ValueError("quantile index out of range")
    target = 1.0 - i / n  # cdf(γ_i) = 1 - i/N
    lo, hi = -2.0, 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if cdf(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    return 0.5 * (lo + hi)


@lru_cache(maxsize=64)
def _quantiles_cached(n: int) -> tuple:
    return tuple(quantile(i, n) for i in range(1, n + 1))


def quantiles(n: int) -> np.ndarray:
    """All classical locations γ_1 >= ... >= γ_N (descending, like eigenvalues)."""
    return np.array(_quantiles_cached(n))


def semicircle(z, what: str, index: int | None = None, n: int | None = None):
    """Single entry point mirroring the operation table.

    what: rho | m | m_prime | m_dprime | logpot | quantile
    """
    if what == "rho":
        return rho(z)
    if what == "m":
        return stieltjes(z)
    if what == "m_prime":
        return stieltjes_d1(z)
    if what == "m_dprime":
        return stieltjes_d2(z)
    if what == "logpot":
        return log_potential(z)
    if what == "quantile":
        if index is None or n is None:
            raise ValueError("quantile requires index and n")
        return quantile(index, n)
    raise ValueError(f"unknown selector {what!r}")
