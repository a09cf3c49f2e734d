"""Poisson kernel of L by subordination, its decay profile, split and bounds.

P_t(x, y) = t^(2 nu) / (4^nu Gamma(nu)) * int_0^inf e^(-t^2/4u) e^(-uL)(x, y) u^(-1-nu) du.

The u-integral is taken in sigma = ln u. Past u = U only the ground state of
the heat kernel is visible in double precision (the next term is e^(-4U)
smaller), so that piece is integrated in closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaln, kve

from .functions import ExactFunction, TabulatedFunction
from .heat import S_FORM_MAX, geometric_t_grid, log_heat_kernel
from .quadrature import (
    AdmissibilityError,
    KernelTable,
    QuadratureConfig,
    gauss_legendre_panels,
    integrate_many,
    log_integral,
)
from .special import DomainError, SemigroupParams, eigenfunctions
from .systems import SystemKind, log_phi

__all__ = [
    "phi",
    "PhiWeight",
    "SplitPoint",
    "split_point",
    "split_u",
    "subordination_multiplier",
    "subordination_multiplier_bessel",
    "log_poisson_kernel",
    "poisson_kernel",
    "poisson_split",
    "PoissonEnvelope",
    "log_poisson_envelope",
    "poisson_envelope",
    "PoissonOperator",
    "poisson_transform",
    "poisson_sup",
]


def phi(system: SystemKind, params: SemigroupParams, y):
    """Decay function Phi of the system at y > 0."""
    out = np.exp(log_phi(system, params, y))
    return out if np.ndim(out) else float(out)


def split_point(xy):
    """r0(xy): 1/(2xy) when xy >= 1, 1 - xy/2 when xy <= 1."""
    xy = np.asarray(xy, dtype=float)
    if np.any(~(xy > 0)):
        raise DomainError("xy must be > 0")
    with np.errstate(divide="ignore"):
        out = np.where(xy >= 1, 0.5 / xy, 1 - 0.5 * xy)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SplitPoint:
    """xy together with its split point r0 in (0, 1)."""

    xy: float
    r0: float

    @classmethod
    def of(cls, xy):
        return cls(float(xy), split_point(float(xy)))


@dataclass(frozen=True)
class PhiWeight:
    """Phi of one system as a callable; ``log_value_at`` gives ln Phi."""

    system: SystemKind
    params: SemigroupParams

    def log_value_at(self, y):
        return log_phi(self.system, self.params, y)

    def __call__(self, y):
        return phi(self.system, self.params, y)


def split_u(xy):
    """u0 = -ln(r0)/2, the heat time matching r0 = e^(-2u)."""
    xy = np.asarray(xy, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(xy >= 1, 0.5 * np.log(2 * xy), -0.5 * np.log1p(-0.5 * np.minimum(xy, 1.0)))
    return out if out.ndim else float(out)


def subordination_multiplier(nu, t, lam, quad=None):
    """F_t(lambda) = Gamma(nu)^-1 int_0^inf e^(-v - t^2 lambda/(4v)) v^(nu-1) dv."""
    if not lam > 0:
        raise DomainError("lambda must be > 0")
    if not nu > 0:
        raise DomainError("nu must be > 0")
    if t < 0:
        raise DomainError("t must be >= 0")
    if t == 0:
        return 1.0
    cfg = quad or QuadratureConfig(rel_tol=1e-12)
    a = 0.25 * t * t * lam

    def lg(s):
        with np.errstate(over="ignore"):
            return -np.exp(s) - a * np.exp(-s) + nu * s

    lo = min(math.log(a) - 8.0, -60.0 / nu)
    hi = math.log(800.0 + a)
    val, _ = log_integral(lg, lo, hi, cfg)
    return math.exp(val - math.lgamma(nu))


def subordination_multiplier_bessel(nu, t, lam):
    """Closed form 2 (z/2)^nu K_nu(z) / Gamma(nu), z = t sqrt(lambda) (vectorized)."""
    t, lam = np.broadcast_arrays(np.asarray(t, float), np.asarray(lam, float))
    z = t * np.sqrt(lam)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.exp(math.log(2) + nu * np.log(z / 2) - z + np.log(kve(nu, z)) - gammaln(nu))
    out = np.where(z == 0, 1.0, out)
    return out if out.ndim else float(out)


def _log_norm(nu, t):
    return 2 * nu * np.log(t) - nu * math.log(4) - math.lgamma(nu)


def _log_tail(params, t, big_u):
    """ln of int_U^inf e^(-t^2/4u - lambda0 u) u^(-1-nu) du."""
    nu, a = params.nu, 0.25 * t * t
    if params.lambda0 == 0:
        # int_U^inf e^{-a/u} u^{-1-nu} du = a^-nu Gamma(nu) P(nu, a/U)
        p = gammainc(nu, a / big_u)
        if p > 1e-280:
            return -nu * math.log(a) + math.lgamma(nu) + math.log(p)
    lam = params.lambda0

    def lg(s):
        with np.errstate(over="ignore"):
            return -a * np.exp(-s) - lam * np.exp(s) - nu * s

    hi = math.log(big_u + 800.0 / lam) if lam > 0 else math.log(big_u) + 800.0 / nu
    return log_integral(lg, math.log(big_u), hi)[0]


def _pair_setup(params, t, x, y, cfg):
    """Breakpoints (in sigma) and per-pair constants for the u-integral."""
    nu = params.nu
    a = t * t + (x - y) ** 2
    big_u = np.maximum(cfg.u_tail, split_u(x * y) + 1.0)
    s_lo = np.log(a / 3000.0)
    s_hi = np.log(big_u)
    s0 = np.clip(np.log(split_u(x * y)), s_lo, s_hi)
    peak = np.log(a / (4 * (nu + 0.5)))
    marks = [np.full_like(a, math.log(t * t / 4)), peak, np.full_like(a, math.log(S_FORM_MAX))]
    return a, big_u, s_lo, s_hi, s0, marks


def _edges(lo, hi, marks, width=1.0):
    if hi <= lo:
        return np.array([lo, lo])
    n = max(1, int(math.ceil((hi - lo) / width)))
    pts = np.concatenate([np.linspace(lo, hi, n + 1), [m for m in marks if lo < m < hi]])
    return np.unique(pts)


def _log_parts(params, t, x, y, cfg):
    """ln of (A part, B part) of P_t(x, y) for arrays of pairs; A is u < u0."""
    x, y = np.broadcast_arrays(np.atleast_1d(np.asarray(x, float)), np.atleast_1d(np.asarray(y, float)))
    x, y = x.ravel(), y.ravel()
    if not t > 0 or np.any(~(x > 0)) or np.any(~(y > 0)):
        raise DomainError("t, x, y must be > 0")
    n = len(x)
    nu = params.nu
    a, big_u, s_lo, s_hi, s0, marks = _pair_setup(params, t, x, y, cfg)

    # shift per pair: scanned maximum of the log-integrand
    scan = np.linspace(0.0, 1.0, 161)
    sg = s_lo[:, None] + (s_hi - s_lo)[:, None] * scan
    lg = _log_integrand(params, t, np.broadcast_to(x[:, None], sg.shape),
                        np.broadcast_to(y[:, None], sg.shape), sg)
    shift = np.max(lg, axis=1)

    edges = []
    for i in range(n):
        mk = [m[i] for m in marks]
        edges.append(_edges(s_lo[i], s0[i], mk))       # A part: u < u0
    for i in range(n):
        mk = [m[i] for m in marks]
        edges.append(_edges(s0[i], s_hi[i], mk))       # B part: u0 < u < U
    xx, yy, ss = np.tile(x, 2), np.tile(y, 2), np.tile(shift, 2)

    def fn(ids, nodes):
        with np.errstate(under="ignore"):
            return np.exp(_log_integrand(params, t, xx[ids], yy[ids], nodes) - ss[ids])

    vals, errs = integrate_many(fn, edges, cfg.rel_tol, cfg.abs_tol, cfg.max_panels, cfg.max_rounds)
    with np.errstate(divide="ignore"):
        log_a = np.log(vals[:n]) + shift
        log_b = np.log(vals[n:]) + shift
    rel_err = (errs[:n] + errs[n:]) / np.maximum(vals[:n] + vals[n:], 1e-300)

    # ground-state piece for u > U belongs to B
    l0x = eigenfunctions(params.alpha, 0, x, log=True)[0][0]
    l0y = eigenfunctions(params.alpha, 0, y, log=True)[0][0]
    tails = np.array([_log_tail(params, t, U) for U in np.unique(big_u)])
    lt = tails[np.searchsorted(np.unique(big_u), big_u)] + l0x + l0y
    log_b = np.logaddexp(log_b, lt)
    norm = _log_norm(nu, t)
    return log_a + norm, log_b + norm, rel_err


def _log_integrand(params, t, x, y, s):
    u = np.exp(s)
    return -t * t / (4 * u) - params.nu * s + log_heat_kernel(params, u, x, y)


def _shape_like(v, x, y):
    shape = np.broadcast(np.asarray(x), np.asarray(y)).shape
    v = v.reshape(shape)
    return v if v.ndim else float(v)


def log_poisson_kernel(params: SemigroupParams, t, x, y, quad=None, return_error=False):
    """ln P_t(x, y), vectorized over x and y (broadcast)."""
    cfg = quad or QuadratureConfig()
    la, lb, err = _log_parts(params, t, x, y, cfg)
    out = _shape_like(np.logaddexp(la, lb), x, y)
    if return_error:
        return out, _shape_like(err, x, y)
    return out


def poisson_kernel(params: SemigroupParams, t, x, y, quad=None, return_error=False):
    """P_t(x, y) by subordination quadrature (strictly positive, symmetric)."""
    res = log_poisson_kernel(params, t, x, y, quad, return_error)
    if return_error:
        lv, err = res
        v = np.exp(lv)
        return (v if np.ndim(v) else float(v)), err
    v = np.exp(res)
    return v if np.ndim(v) else float(v)


def poisson_split(params: SemigroupParams, t, x, y, quad=None):
    """(B, A): the parts of P_t(x, y) with r = e^(-2u) below and above r0(xy)."""
    cfg = quad or QuadratureConfig()
    la, lb, _ = _log_parts(params, t, x, y, cfg)
    return _shape_like(np.exp(lb), x, y), _shape_like(np.exp(la), x, y)


@dataclass(frozen=True)
class PoissonEnvelope:
    """Local-plus-global upper envelope of P_t; M is the local window x/2 < y < Mx."""

    big_m: float = 4.0
    sharpened: bool = False

    def __post_init__(self):
        if not self.big_m > 1:
            raise DomainError("M must be > 1")

    @staticmethod
    def log_c1(params, x):
        """ln C1(x), C1 = (1+x)^(2nu) e^(x^2/2)."""
        x = np.asarray(x, float)
        return 2 * params.nu * np.log1p(x) + 0.5 * x * x

    @staticmethod
    def log_c2(params, x, sharpened=False):
        """ln C2(x) = ln [log(e+x)^(1+nu) (1+x)^|mu+1/2| e^(x^2/2) / <x>^(alpha+3/2)].

        The sharpened variant uses <x>^(alpha+3/2+2nu) in the denominator.
        """
        x = np.asarray(x, float)
        power = params.alpha + 1.5 + (2 * params.nu if sharpened else 0.0)
        return ((1 + params.nu) * np.log(np.log(math.e + x)) + abs(params.mu + 0.5) * np.log1p(x)
                + 0.5 * x * x - power * np.log(np.minimum(x, 1.0)))

    def c1_of_x(self, params, x):
        return np.exp(self.log_c1(params, x))

    def c2_of_x(self, params, x):
        return np.exp(self.log_c2(params, x, self.sharpened))


def log_poisson_envelope(params: SemigroupParams, env: PoissonEnvelope, t, x, y):
    """ln of C1 t^2nu e^(-y^2/2)/(t+|x-y|)^(1+2nu) 1{x/2<y<Mx} + C2 (t v 1)^2nu Phi(y).

    With ``env.sharpened`` the global term is c' t^2nu Phi(y) instead.
    """
    t, x, y = np.broadcast_arrays(*(np.asarray(a, float) for a in (t, x, y)))
    if np.any(~(t > 0)) or np.any(~(x > 0)) or np.any(~(y > 0)):
        raise DomainError("t, x, y must be > 0")
    nu = params.nu
    local = (y > x / 2) & (y < env.big_m * x)
    loc = (env.log_c1(params, x) + 2 * nu * np.log(t) - 0.5 * y * y
           - (1 + 2 * nu) * np.log(t + np.abs(x - y)))
    tt = t if env.sharpened else np.maximum(t, 1.0)
    glo = env.log_c2(params, x, env.sharpened) + 2 * nu * np.log(tt) + log_phi(SystemKind.BASE_PHI, params, y)
    out = np.where(local, np.logaddexp(loc, glo), glo)
    return out if out.ndim else float(out)


def poisson_envelope(params, env: PoissonEnvelope, t, x, y):
    out = np.exp(log_poisson_envelope(params, env, t, x, y))
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# batched transform: P_t f(x) for many t and many f from one heat-kernel table


class PoissonOperator(KernelTable):
    """P_t(x, .) on a fixed y quadrature grid for a list of times t.

    One table of heat-kernel values on a Gauss-Legendre grid in sigma = ln u
    serves every t; ``kernel[i, j]`` is P_{t_i}(x, y_j) and ``apply`` returns
    P_t f(x) for all t at once.
    """

    def __init__(self, params: SemigroupParams, x, t_values, quad=None, y_lo=1e-8, y_hi=None,
                 panel=0.5, breakpoints=None):
        cfg = quad or QuadratureConfig()
        self.params, self.x = params, float(x)
        self.t = np.atleast_1d(np.asarray(t_values, float))
        if np.any(self.t <= 0):
            raise DomainError("t must be > 0")
        y_hi = cfg.y_max if y_hi is None else y_hi
        self._set_grid(y_lo, y_hi, min(1e-4, self.t.min() / 50), breakpoints)
        big_u = cfg.u_tail
        s_lo = math.log(self.t.min() ** 2 / 400)
        s, ws = gauss_legendre_panels(s_lo, math.log(big_u), panel)
        u = np.exp(s)
        lk = log_heat_kernel(params, u[:, None], self.x, self.y[None, :])
        nu = params.nu
        # exponent table e(t, u) = -t^2/4u - nu sigma + ln(weight), shifted per t
        le = -self.t[:, None] ** 2 / (4 * u[None, :]) - nu * s[None, :] + np.log(ws)[None, :]
        lk_max = lk.max(axis=0)
        with np.errstate(under="ignore"):
            body = np.exp(le) @ np.exp(lk - lk_max[None, :])
        norm = np.exp(_log_norm(nu, self.t))
        l0x = eigenfunctions(params.alpha, 0, self.x, log=True)[0][0]
        l0y = eigenfunctions(params.alpha, 0, self.y, log=True)[0][0]
        tails = np.array([_log_tail(params, t, big_u) for t in self.t])
        with np.errstate(under="ignore", divide="ignore"):
            log_body = np.log(body) + lk_max[None, :]
            log_k = np.logaddexp(log_body, tails[:, None] + l0x + l0y[None, :])
        self.log_kernel = log_k + np.log(norm)[:, None]


def poisson_transform(params: SemigroupParams, t, f, x, quad=None, check=True):
    """P_t f(x) = int P_t(x, y) f(y) dy; rejects f outside L^1(Phi) unless ``check`` is off."""
    if check:
        from .weights import admissible
        if not admissible(f, params, SystemKind.BASE_PHI, quad):
            raise AdmissibilityError("f is not in L^1(Phi)")
    return float(PoissonOperator(params, x, [t], quad, breakpoints=f.nodes).apply(f)[0])


def poisson_sup(params: SemigroupParams, t0, f, x, t_grid=None, quad=None, check=True):
    """max over the t grid of |P_t f(x)|: a lower approximation of the sup over (0, t0].

    With ``check`` the admissibility integral of |f| Phi is tested first and a
    divergent one raises AdmissibilityError.
    """
    t_grid = geometric_t_grid(t0) if t_grid is None else np.asarray(t_grid, float)
    if t_grid.size == 0:
        raise DomainError("empty t grid")
    if np.any(t_grid <= 0) or np.any(t_grid > t0 * (1 + 1e-12)):
        raise DomainError("t grid must lie in (0, t0]")
    if check:
        from .weights import admissible
        if not admissible(f, params, SystemKind.BASE_PHI, quad):
            raise AdmissibilityError("f is not in L^1(Phi)")
    op = PoissonOperator(params, x, t_grid, quad, breakpoints=f.nodes)
    return float(np.max(np.abs(op.apply(f))))
