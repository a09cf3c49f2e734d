"""Overflow-safe special functions: scaled Bessel I, Laguerre functions, log-gamma.

Everything that multiplies exponentials, powers and gamma factors is
assembled as a sum of logarithms and exponentiated once, so the heat and
Poisson kernels can be evaluated far into the gaussian tails.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

__all__ = [
    "DomainError",
    "RangeError",
    "SemigroupParams",
    "AngleBracket",
    "angle",
    "log_gamma",
    "log_bessel_series",
    "log_bessel_i_scaled",
    "bessel_i_scaled",
    "bI",
    "log_bI",
    "laguerre_normalized",
    "log_laguerre_normalized",
    "eigenfunctions",
    "eigenfunction_phi",
    "BESSEL_SERIES_CROSSOVER",
]

EXTREME_TOL = 1e-12

#: series / asymptotic seam for I_alpha is at max(BESSEL_SERIES_CROSSOVER, 2 alpha^2)
BESSEL_SERIES_CROSSOVER = 30.0


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class RangeError(ArithmeticError):
    """The requested value is not finite (e.g. a divergent limit)."""


@dataclass(frozen=True)
class SemigroupParams:
    """Parameters (alpha, mu, nu) of the operator L and its Poisson integral."""

    alpha: float
    mu: float = 0.0
    nu: float = 0.5

    def __post_init__(self):
        if not self.alpha > -1:
            raise DomainError(f"alpha must be > -1, got {self.alpha}")
        if self.mu < -(self.alpha + 1) - EXTREME_TOL:
            raise DomainError(f"mu must be >= -(alpha+1), got {self.mu}")
        if not self.nu > 0:
            raise DomainError(f"nu must be > 0, got {self.nu}")

    @classmethod
    def extreme(cls, alpha, nu=0.5):
        return cls(alpha, -(alpha + 1.0), nu)

    @property
    def extreme_case(self) -> bool:
        return abs(self.mu + self.alpha + 1) <= EXTREME_TOL

    @property
    def m(self) -> float:
        """Shift of the classical Laguerre operator, m = (alpha+1+mu)/2."""
        return (self.alpha + 1 + self.mu) / 2

    @property
    def lambda0(self) -> float:
        # exactly zero in the extreme case, so the large-time tail is a pure power
        return 0.0 if self.extreme_case else 2 * (self.alpha + 1 + self.mu)

    def eigenvalue(self, n):
        """lambda_n = 4n + 2(alpha+1+mu)."""
        return 4 * np.asarray(n, dtype=float) + self.lambda0


def angle(z):
    """<z> = min(z, 1)."""
    return np.minimum(z, 1.0)


@dataclass(frozen=True)
class AngleBracket:
    """<z> = min(z, 1) for a scalar z > 0."""

    value: float

    @classmethod
    def of(cls, z):
        if not z > 0:
            raise DomainError("z must be > 0")
        return cls(float(min(z, 1.0)))


def log_gamma(x):
    """ln Gamma(x) for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("log_gamma needs x > 0")
    out = gammaln(x)
    return float(out) if out.ndim == 0 else out


def _series_terms(alpha, q, out_log):
    # sum_k q^k Gamma(alpha+1) / (k! Gamma(k+alpha+1)), all terms positive
    total = np.ones_like(q)
    term = np.ones_like(q)
    k = 0
    while True:
        term = term * q / ((k + 1) * (k + alpha + 1))
        total += term
        k += 1
        if not np.any(term > 1e-17 * total) or k > 2000:
            break
    return np.log(total) if out_log else total


def log_bessel_series(alpha, z):
    """ln S(z) with S(z) = Gamma(alpha+1) (z/2)^(-alpha) I_alpha(z).

    S is an entire function with S(0) = 1 and positive Taylor coefficients,
    so the power series is free of cancellation.
    """
    z = np.asarray(z, dtype=float)
    return _series_terms(alpha, 0.25 * z * z, True)


def _log_ive_asymptotic(alpha, z):
    # e^{-z} I_a(z) ~ (2 pi z)^{-1/2} sum_k (-1)^k a_k(alpha) / z^k, stopped at the
    # smallest term
    four_a2 = 4.0 * alpha * alpha
    total = np.ones_like(z)
    term = np.ones_like(z)
    active = np.ones(z.shape, dtype=bool)
    for k in range(1, 80):
        new = -term * (four_a2 - (2 * k - 1) ** 2) / (8.0 * k * z)
        growing = np.abs(new) >= np.abs(term)
        active &= ~growing
        if not active.any():
            break
        term = np.where(active, new, term)
        total = np.where(active, total + new, total)
        active &= np.abs(new) > 1e-18 * np.abs(total)
    return -0.5 * np.log(2 * np.pi * z) + np.log(total)


def log_bessel_i_scaled(alpha, z):
    """ln(e^{-z} I_alpha(z)) for z > 0 (vectorized).

    Power series for z <= max(30, 2 alpha^2), Hankel asymptotic expansion
    beyond.
    """
    z0 = np.asarray(z, dtype=float)
    z = np.atleast_1d(z0)
    if np.any(z < 0):
        raise DomainError("z must be >= 0")
    zc = max(BESSEL_SERIES_CROSSOVER, 2 * alpha * alpha)
    out = np.empty_like(z)
    small = z <= zc
    with np.errstate(divide="ignore", invalid="ignore"):
        if small.any():
            zs = z[small]
            out[small] = (alpha * np.log(0.5 * zs) - zs - gammaln(alpha + 1)
                          + log_bessel_series(alpha, zs))
        if (~small).any():
            out[~small] = _log_ive_asymptotic(alpha, z[~small])
    return out.reshape(z0.shape)


def bessel_i_scaled(alpha, z):
    """e^{-z} I_alpha(z); alpha > -1, z >= 0."""
    if not alpha > -1:
        raise DomainError("alpha must be > -1")
    z0 = np.asarray(z, dtype=float)
    z = np.atleast_1d(z0)
    with np.errstate(divide="ignore", over="ignore"):
        out = np.exp(log_bessel_i_scaled(alpha, z))
    at0 = z == 0
    if at0.any():
        out[at0] = 1.0 if alpha == 0 else (0.0 if alpha > 0 else np.inf)
    return float(out[0]) if z0.ndim == 0 else out


def log_bI(alpha, z):
    """ln of bI_alpha(z) = sqrt(z) e^{-z} I_alpha(z), z > 0."""
    z = np.asarray(z, dtype=float)
    with np.errstate(divide="ignore"):
        return 0.5 * np.log(z) + log_bessel_i_scaled(alpha, z)


def bI(alpha, z):
    """sqrt(z) e^{-z} I_alpha(z), comparable to <z>^(alpha+1/2).

    At z = 0 the finite limit is returned for alpha >= -1/2; for
    alpha < -1/2 the function blows up and a RangeError is raised.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError("z must be >= 0")
    at0 = z == 0
    if at0.any() and alpha < -0.5:
        raise RangeError("bI_alpha(0) is infinite for alpha < -1/2")
    with np.errstate(divide="ignore"):
        out = np.exp(log_bI(alpha, np.where(at0, 1.0, z)))
    if at0.any():
        out = np.where(at0, math.sqrt(2 / math.pi) if alpha == -0.5 else 0.0, out)
    return float(out) if out.ndim == 0 else out


def log_laguerre_normalized(alpha, n_max, x):
    """Signed log-magnitudes of the orthonormal Laguerre polynomials.

    Returns ``(log_abs, sign)``, each of shape ``(n_max+1,) + x.shape``, for
    L_n(x) / sqrt(Gamma(n+alpha+1)/n!), n = 0..n_max. The classical three-term
    recurrence is run with a per-point running scale so that large degrees
    and arguments cannot overflow.
    """
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("x must be >= 0")
    vals = np.empty((n_max + 1,) + x.shape)
    scale = np.zeros((n_max + 1,) + x.shape)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    log_s = np.zeros_like(x)
    vals[0], scale[0] = cur, log_s
    for n in range(n_max):
        nxt = ((2 * n + 1 + alpha - x) * cur - (n + alpha) * prev) / (n + 1)
        prev, cur = cur, nxt
        big = np.abs(cur) > 1e150
        if big.any():
            f = np.where(big, 1e-150, 1.0)
            cur, prev = cur * f, prev * f
            log_s = log_s - np.log(f)
        vals[n + 1], scale[n + 1] = cur, log_s
    n = np.arange(n_max + 1).reshape((-1,) + (1,) * x.ndim)
    log_norm = 0.5 * (gammaln(n + alpha + 1) - gammaln(n + 1.0))
    with np.errstate(divide="ignore"):
        log_abs = np.log(np.abs(vals)) + scale - log_norm
    return log_abs, np.sign(vals)


def laguerre_normalized(alpha, n_max, x):
    """L_0..L_{n_max} normalized to unit norm in L^2(x^alpha e^{-x} dx)."""
    log_abs, sign = log_laguerre_normalized(alpha, n_max, x)
    with np.errstate(over="ignore"):
        return sign * np.exp(log_abs)


def eigenfunctions(alpha, n_max, y, log=False):
    """phi_n(y) = sqrt(2) y^(alpha+1/2) e^{-y^2/2} L_n(y^2), n = 0..n_max.

    With ``log=True`` returns ``(log_abs, sign)`` instead of values.
    """
    y = np.asarray(y, dtype=float)
    if np.any(~(y > 0)):
        raise DomainError("eigenfunctions are evaluated for y > 0 only")
    log_abs, sign = log_laguerre_normalized(alpha, n_max, y * y)
    log_abs = log_abs + (0.5 * math.log(2) + (alpha + 0.5) * np.log(y) - 0.5 * y * y)
    if log:
        return log_abs, sign
    return sign * np.exp(log_abs)


def eigenfunction_phi(params, n, y):
    """The n-th Laguerre function phi_n of the operator L at y > 0."""
    if n < 0:
        raise DomainError("n must be >= 0")
    out = eigenfunctions(params.alpha, n, y)[n]
    return float(out) if np.ndim(out) == 0 else out
