"""Heat kernel of L in closed form, its eigenfunction series, transform and bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.special import gammaln

from .functions import TabulatedFunction
from .quadrature import (
    AdmissibilityError,
    KernelTable,
    QuadratureConfig,
    improper_log_integral,
    integrate,
    log_integral,
)
from .special import (
    DomainError,
    SemigroupParams,
    eigenfunctions,
    log_bessel_i_scaled,
    log_bessel_series,
    log_bI,
)

__all__ = [
    "HeatParametrization",
    "Region",
    "HeatBoundEnvelope",
    "S_FORM_MAX",
    "log_heat_kernel",
    "heat_kernel",
    "heat_kernel_series",
    "series_terms",
    "heat_transform",
    "heat_bound_envelope",
    "log_heat_bound_envelope",
    "heat_maximal",
    "geometric_t_grid",
    "HeatOperator",
    "log_heat_phi",
    "log_heat_phi_integral",
]

#: the s-form is used for s = tanh t <= 1/2, i.e. t <= atanh(1/2)
S_FORM_MAX = math.atanh(0.5)


@dataclass(frozen=True)
class HeatParametrization:
    """The two time variables r = e^{-2t} and s = tanh t of one heat time t."""

    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise DomainError("t must be > 0")

    @property
    def r(self):
        return math.exp(-2 * self.t)

    @property
    def s(self):
        return math.tanh(self.t)

    @property
    def kind(self):
        return "S_FORM" if self.t <= S_FORM_MAX else "R_FORM"


def _check_positive(**kw):
    for name, v in kw.items():
        if np.any(~(np.asarray(v) > 0)):
            raise DomainError(f"{name} must be > 0")


def _log_series_T(alpha, z):
    # ln T(z), T(z) = Gamma(alpha+1) (z/2)^-alpha I_alpha(z); T(0) = 1
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z <= 30.0
    out[small] = log_bessel_series(alpha, z[small])
    zb = z[~small]
    out[~small] = gammaln(alpha + 1) - alpha * np.log(0.5 * zb) + zb + log_bessel_i_scaled(alpha, zb)
    return out


def _log_kernel_s(p, t, x, y):
    s = np.tanh(t)
    z = (1 - s * s) * x * y / (2 * s)
    return (-2 * p.mu * t + 0.5 * np.log((1 - s * s) / (2 * s)) + log_bI(p.alpha, z)
            - (x - y) ** 2 / (4 * s) - s * (x + y) ** 2 / 4)


def _log_kernel_r(p, t, x, y):
    # r-form with e^{-z} I_alpha(z) e^{-(x-ry)^2/(1-r^2)} e^{(x^2-y^2)/2} multiplied out:
    # no large cancelling exponents, and 1 - r^2 stays accurate for large t
    one_m_r2 = -np.expm1(-4 * t)
    r = np.exp(-2 * t)
    z = 2 * r * x * y / one_m_r2
    return (math.log(2) - gammaln(p.alpha + 1) + (p.alpha + 0.5) * np.log(x * y)
            - p.lambda0 * t - (p.alpha + 1) * np.log(one_m_r2)
            - (1 + r * r) * (x * x + y * y) / (2 * one_m_r2) + _log_series_T(p.alpha, z))


def log_heat_kernel(params: SemigroupParams, t, x, y, form="auto"):
    """ln e^{-tL}(x, y), broadcasting over t, x, y.

    ``form`` selects the s-form (small t), the r-form (large t) or ``"auto"``
    which switches at s = tanh t = 1/2.
    """
    t, x, y = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (t, x, y)))
    _check_positive(t=t, x=x, y=y)
    if form == "s":
        out = _log_kernel_s(params, t, x, y)
    elif form == "r":
        out = _log_kernel_r(params, t, x, y)
    elif form == "auto":
        out = np.empty(t.shape)
        small = t <= S_FORM_MAX
        if small.any():
            out[small] = _log_kernel_s(params, t[small], x[small], y[small])
        if (~small).any():
            out[~small] = _log_kernel_r(params, t[~small], x[~small], y[~small])
    else:
        raise DomainError(f"unknown form {form!r}")
    return out if out.ndim else float(out)


def heat_kernel(params: SemigroupParams, t, x, y, form="auto"):
    """e^{-tL}(x, y) > 0, symmetric in x and y."""
    out = np.exp(log_heat_kernel(params, t, x, y, form))
    return out if np.ndim(out) else float(out)


def series_terms(t, decay=60.0):
    """n_max with e^{-4 n_max t} = e^{-decay}; the default leaves a tail far below rounding."""
    if not t > 0:
        raise DomainError("t must be > 0")
    return int(math.ceil(decay / (4 * t)))


def heat_kernel_series(params: SemigroupParams, t, x, y, n_max):
    """Truncated eigenfunction expansion of the heat kernel.

    Returns ``(value, tail_bound)`` where the tail bound is
    sup|phi_n(x) phi_n(y)| e^{-lambda_{n_max+1} t} / (1 - e^{-4t}), the sup
    taken empirically over n_max < n <= 2 n_max + 40.
    """
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    if not t > 0:
        raise DomainError("t must be > 0")
    x0 = np.asarray(x, dtype=float)
    x, y = np.broadcast_arrays(x0, np.asarray(y, dtype=float))
    n_hi = 2 * n_max + 40
    px = eigenfunctions(params.alpha, n_hi, x)
    py = eigenfunctions(params.alpha, n_hi, y)
    n = np.arange(n_hi + 1).reshape((-1,) + (1,) * x.ndim)
    decay = np.exp(-params.eigenvalue(n) * t)
    value = np.sum((decay * px * py)[: n_max + 1], axis=0)
    sup = np.max(np.abs(px[n_max + 1:] * py[n_max + 1:]), axis=0)
    tail = sup * math.exp(-params.eigenvalue(n_max + 1) * t) / -math.expm1(-4 * t)
    if value.ndim == 0:
        return float(value), float(tail)
    return value, tail


def _transform(log_kernel, f: TabulatedFunction, x, scale, cfg, upper=None):
    """Integral of K(y) f(y) dy over f's support, with K given in log form."""
    lo = f.nodes[0]
    hi = f.nodes[-1] if f.extension.kind == "zero" else max(f.nodes[-1], upper or 2 * cfg.y_max)
    if upper is not None:
        hi = min(hi, upper)
    if not hi > lo:
        return 0.0, 0.0
    steps = x + scale * np.concatenate([-np.geomspace(8, 1e-3, 16), [0.0], np.geomspace(1e-3, 8, 16)])
    breaks = np.concatenate([[lo, hi], f.nodes, steps, np.geomspace(lo, hi, 64)])
    breaks = np.unique(breaks[(breaks >= lo) & (breaks <= hi)])

    def log_integrand(y):
        la, sg = f._eval(y)
        return log_kernel(y) + la, sg

    mids = np.concatenate([breaks, 0.5 * (breaks[:-1] + breaks[1:])])
    lg, _ = log_integrand(mids)
    shift = np.max(lg)
    if not np.isfinite(shift):
        return 0.0, 0.0

    def g(y):
        la, sg = log_integrand(y)
        with np.errstate(under="ignore"):
            return sg * np.exp(la - shift)

    # negligible parts of the range are not refined
    keep = np.concatenate([[True], lg[len(breaks):] > shift - 80, [True]])
    edges = breaks[keep[:-1] | keep[1:]] if len(breaks) > 2 else breaks
    edges = np.unique(np.concatenate([[lo, hi], edges]))
    v, e = integrate(g, edges, cfg)
    scale_f = math.exp(shift) if shift < 700 else np.inf
    return v * scale_f, e * scale_f


def log_heat_phi_integral(f, params: SemigroupParams, big_t, quad=None):
    """ln of the integral of |f| phi_T and whether it converged.

    Formula data is integrated up to the end of its support and declared
    divergent when doubling that end grows the value noticeably.
    """
    cfg = quad or QuadratureConfig()
    nodes = np.asarray(f.nodes, dtype=float)
    lo, hi = math.log(nodes[0]), math.log(nodes[-1])
    formula = not isinstance(f, TabulatedFunction) and hasattr(f, "log_abs_extrapolated")

    def lg(s):
        y = np.exp(s)
        with np.errstate(all="ignore"):
            la = f.log_abs_extrapolated(y) if formula else f._eval(y)[0]
            out = np.asarray(la, float) + log_heat_phi(params, big_t, y) + s
        return np.where(np.isnan(out), -np.inf, out)
    if formula:
        return improper_log_integral(lg, lo, hi, cfg, check_lower=False)
    v, _ = log_integral(lg, lo, hi, cfg)
    return v, bool(v < math.inf)


def heat_transform(params: SemigroupParams, t, f: TabulatedFunction, x, quad=None,
                   return_error=False, check=True):
    """e^{-tL} f(x) = integral of e^{-tL}(x, y) f(y) dy by adaptive quadrature.

    With ``check`` the datum must be integrable against phi_t, the decay of
    the kernel at time t; otherwise AdmissibilityError is raised.
    """
    _check_positive(t=t, x=x)
    cfg = quad or QuadratureConfig()
    if check and not log_heat_phi_integral(f, params, t, cfg)[1]:
        raise AdmissibilityError("f is not integrable against the heat decay profile")
    v, e = _transform(lambda y: log_heat_kernel(params, t, x, y), f, x,
                      math.sqrt(math.tanh(t)), cfg)
    return (v, e) if return_error else v


class HeatOperator(KernelTable):
    """e^{-tL}(x, .) on a graded Gauss-Legendre y grid for a list of times.

    ``apply(f)`` returns e^{-tL} f(x) for every t at once; the kernel is the
    closed form, so only the y integral is approximated.
    """

    def __init__(self, params: SemigroupParams, x, t_values, quad=None, y_lo=1e-8, y_hi=None,
                 breakpoints=None):
        cfg = quad or QuadratureConfig()
        self.params, self.x = params, float(x)
        self.t = np.atleast_1d(np.asarray(t_values, dtype=float))
        _check_positive(t=self.t, x=self.x)
        y_hi = cfg.y_max if y_hi is None else y_hi
        self._set_grid(y_lo, y_hi, min(1e-4, math.sqrt(math.tanh(self.t.min())) / 50), breakpoints)
        self.log_kernel = log_heat_kernel(params, self.t[:, None], self.x, self.y[None, :])


def geometric_t_grid(t0, decades=3.0, per_decade=64):
    """Geometric grid in (0, t0] with ``per_decade`` points per decade, ending at t0."""
    n = int(round(decades * per_decade)) + 1
    return t0 * np.logspace(-decades, 0, n)


def heat_maximal(params: SemigroupParams, t0, f: TabulatedFunction, x, t_grid=None, quad=None):
    """max over the t grid of |e^{-tL} f(x)|, a lower approximation of the sup over (0, t0]."""
    t_grid = geometric_t_grid(t0) if t_grid is None else np.asarray(t_grid, dtype=float)
    if t_grid.size == 0:
        raise DomainError("empty t grid")
    if np.any(t_grid <= 0) or np.any(t_grid > t0 * (1 + 1e-12)):
        raise DomainError("t grid must lie in (0, t0]")
    if not log_heat_phi_integral(f, params, t0, quad)[1]:
        raise AdmissibilityError("f is not integrable against the heat decay profile")
    return max(abs(heat_transform(params, t, f, x, quad, check=False)) for t in t_grid)


class Region(str, Enum):
    LOCAL = "LOCAL"
    GLOBAL = "GLOBAL"


@dataclass(frozen=True)
class HeatBoundEnvelope:
    """Gaussian envelope of the heat kernel: (M/(M-1))^3 = gamma fixes the local window.

    The default gamma = 64/27 gives M = 4.
    """

    gamma: float = 64.0 / 27.0
    big_m: float = field(init=False)

    def __post_init__(self):
        if not self.gamma > 1:
            raise DomainError("gamma must be > 1")
        g = self.gamma ** (1.0 / 3.0)
        object.__setattr__(self, "big_m", g / (g - 1))

    @classmethod
    def from_big_m(cls, big_m):
        if not big_m > 1:
            raise DomainError("M must be > 1")
        return cls((big_m / (big_m - 1)) ** 3)

    @staticmethod
    def log_c_of_x(params, x):
        """ln c(x) with c(x) = 1 / <x>^(alpha + 3/2)."""
        return -(params.alpha + 1.5) * np.log(np.minimum(x, 1.0))

    def c_of_x(self, params, x):
        return np.exp(self.log_c_of_x(params, x))


def log_heat_bound_envelope(params, env: HeatBoundEnvelope, t, x, y):
    """ln of the heat envelope and a boolean "local" mask (broadcasting)."""
    t, x, y = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (t, x, y)))
    _check_positive(t=t, x=x, y=y)
    s = np.tanh(t)
    a = params.alpha + 0.5
    local = (y >= x / 2) & (y <= env.big_m * x)
    loc = -(x - y) ** 2 / (4 * s) - 0.5 * np.log(s) + a * np.log(np.minimum(x * y / s, 1.0))
    glo = (env.log_c_of_x(params, x) + a * np.log(np.minimum(y, 1.0))
           - y * y / (2 * env.gamma * np.tanh(2 * t)))
    return np.where(local, loc, glo), local


def heat_bound_envelope(params: SemigroupParams, env: HeatBoundEnvelope, t, x, y):
    """Right-hand side of the local/global heat bound (without its constant).

    Returns ``(value, Region)``. Intended for mu = 0.
    """
    if abs(params.mu) > 1e-12:
        raise DomainError("the heat envelope is stated for mu = 0")
    lv, local = log_heat_bound_envelope(params, env, t, x, y)
    if np.ndim(lv) == 0:
        return float(np.exp(lv)), Region.LOCAL if bool(local) else Region.GLOBAL
    return np.exp(lv), np.where(local, Region.LOCAL.value, Region.GLOBAL.value)


def log_heat_phi(params: SemigroupParams, big_t, y):
    """ln phi_T(y) = ln <y>^(alpha+1/2) e^(-y^2 / (2 tanh 2T)), the heat admissibility profile."""
    y = np.asarray(y, dtype=float)
    return ((params.alpha + 0.5) * np.log(np.minimum(y, 1.0))
            - y * y / (2 * math.tanh(2 * big_t)))
