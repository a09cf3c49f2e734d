"""The five Laguerre systems and the maps relating each one to the base system."""
from __future__ import annotations

import math
from enum import Enum

import numpy as np

from .special import DomainError, SemigroupParams, eigenfunctions, log_laguerre_normalized

__all__ = ["SystemKind", "log_phi", "log_phi_table", "system_eigenfunctions"]


class SystemKind(Enum):
    """Which eigenfunction system is in play.

    BASE_PHI: phi_n of L. PSI: psi_n = y^(-alpha-1/2) phi_n. FRAK_L: the square-map
    image (4y)^(-1/4) phi_n(sqrt y). SMALL_ELL: y^(-alpha/2) times FRAK_L.
    LAGUERRE_POLY: y^(-alpha/2) e^(y/2) times FRAK_L (the orthonormal L_n^alpha).
    """

    BASE_PHI = "base_phi"
    PSI = "psi"
    FRAK_L = "frak_l"
    SMALL_ELL = "small_ell"
    LAGUERRE_POLY = "laguerre_poly"

    @classmethod
    def parse(cls, text):
        key = str(text).strip().lower()
        for s in cls:
            if key in (s.value, s.name.lower()):
                return s
        raise ValueError(f"unknown system {text!r}")

    @property
    def uses_square_map(self) -> bool:
        return self in (SystemKind.FRAK_L, SystemKind.SMALL_ELL, SystemKind.LAGUERRE_POLY)

    @property
    def parent(self):
        """System whose functions are multiplied by ``a`` (None for the base and FRAK_L)."""
        if self is SystemKind.PSI:
            return SystemKind.BASE_PHI
        if self in (SystemKind.SMALL_ELL, SystemKind.LAGUERRE_POLY):
            return SystemKind.FRAK_L
        return None

    def log_multiplier(self, params: SemigroupParams, y):
        """ln a(y) relative to the parent system (0 when there is none)."""
        y = np.asarray(y, dtype=float)
        a = params.alpha
        if self is SystemKind.PSI:
            return -(a + 0.5) * np.log(y)
        if self is SystemKind.SMALL_ELL:
            return -0.5 * a * np.log(y)
        if self is SystemKind.LAGUERRE_POLY:
            return -0.5 * a * np.log(y) + 0.5 * y
        return np.zeros_like(y)

    def multiplier_a(self, params, y):
        return np.exp(self.log_multiplier(params, y))

    def log_reference_density(self, params, y):
        """ln of the density of the orthogonality measure, a(y)^-2 dy."""
        return -2 * self.log_multiplier(params, y)

    def eigenvalue(self, params: SemigroupParams, n):
        lam = params.eigenvalue(n)
        return lam / 4 if self.uses_square_map else lam


def _log_log_power(params, y):
    kappa = params.nu if params.extreme_case else 1 + params.nu
    return kappa * np.log(np.log(math.e + y))


def log_phi_table(system: SystemKind, params: SemigroupParams, y):
    """ln of the tabulated decay function of each system (all five table rows)."""
    y = np.asarray(y, dtype=float)
    if np.any(~(y > 0)):
        raise DomainError("y must be > 0")
    a, mu = params.alpha, params.mu
    ll = _log_log_power(params, y)
    ly, l1 = np.log(y), np.log1p(y)
    if system is SystemKind.BASE_PHI:
        return (a + 0.5) * ly - 0.5 * y * y - (1 + a + mu) * l1 - ll
    if system is SystemKind.PSI:
        return (2 * a + 1) * ly - 0.5 * y * y - (1 + a + mu) * l1 - ll
    if system is SystemKind.FRAK_L:
        return 0.5 * a * ly - 0.5 * y - 0.5 * (1 + a + mu) * l1 - ll
    if system is SystemKind.SMALL_ELL:
        return a * ly - 0.5 * y - 0.5 * (1 + a + mu) * l1 - ll
    if system is SystemKind.LAGUERRE_POLY:
        return a * ly - y - params.m * l1 - ll
    raise DomainError(f"unknown system {system}")


def log_phi(system: SystemKind, params: SemigroupParams, y):
    """ln Phi(y) for the system.

    The base system uses the decay profile
    <y>^(alpha+1/2) e^(-y^2/2) / [(1+y)^(mu+1/2) log(y+e)^(1+nu)];
    the other systems use their table rows. In the extreme case
    mu = -(alpha+1) the log power is nu instead of 1+nu.
    """
    if system is not SystemKind.BASE_PHI:
        return log_phi_table(system, params, y)
    y = np.asarray(y, dtype=float)
    if np.any(~(y > 0)):
        raise DomainError("y must be > 0")
    return ((params.alpha + 0.5) * np.log(np.minimum(y, 1.0)) - 0.5 * y * y
            - (params.mu + 0.5) * np.log1p(y) - _log_log_power(params, y))


def system_eigenfunctions(system: SystemKind, params: SemigroupParams, n_max, y):
    """Eigenfunctions e_0..e_{n_max} of the system at y, shape (n_max+1,) + y.shape.

    Direct formulas in the normalized Laguerre polynomials Lt_n:
    psi_n = sqrt2 e^{-y^2/2} Lt_n(y^2), frak_l_n = y^{alpha/2} e^{-y/2} Lt_n(y),
    ell_n = e^{-y/2} Lt_n(y), and Lt_n itself for LAGUERRE_POLY.
    """
    y = np.asarray(y, dtype=float)
    a = params.alpha
    if system is SystemKind.BASE_PHI:
        return eigenfunctions(a, n_max, y)
    if system is SystemKind.PSI:
        la, sg = log_laguerre_normalized(a, n_max, y * y)
        return sg * np.exp(la + 0.5 * math.log(2) - 0.5 * y * y)
    la, sg = log_laguerre_normalized(a, n_max, y)
    if system is SystemKind.FRAK_L:
        la = la + 0.5 * a * np.log(y) - 0.5 * y
    elif system is SystemKind.SMALL_ELL:
        la = la - 0.5 * y
    return sg * np.exp(la)
