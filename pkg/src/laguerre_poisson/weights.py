"""Weights: class membership, the Carleson-Jones construction, the explicit
weights v2, v_{1,eps}, their minimum and the alternative weight built from Phi.

All constructions work with ln of the weights, so gaussian growth and decay
never leave double range.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .functions import Interp, TabulatedFunction, log_power_segment, log_spaced_nodes
from .maximal import log_local_maximal
from .quadrature import AdmissibilityError, QuadratureConfig, improper_log_integral, log_integral
from .special import DomainError, SemigroupParams
from .systems import SystemKind, log_phi

__all__ = [
    "WeightClass",
    "WeightClassSpec",
    "CJWeights",
    "rho_eps",
    "log_rho_eps",
    "class_membership",
    "admissible",
    "log_phi_integral",
    "carleson_jones",
    "default_weight_nodes",
    "v2_threshold",
    "log_weight_v2",
    "weight_v2",
    "weight_v1eps",
    "weight_v_combined",
    "phi_w_defaults",
    "weight_v_phi_w",
    "lp_norm",
    "log_lp_norm",
    "window_for",
]

#: window in sigma = ln y for integrals over (0, inf), doubled to detect divergence;
#: the upper end stays where y^2 is still resolved next to O(1) terms
SIGMA_LO = -150.0
SIGMA_HI = math.log(1e4)


def _conj(p):
    return p / (p - 1)


def _check_p(p):
    if not 1 < p < math.inf:
        raise DomainError("p must lie in (1, inf)")


def _bracket_log(y):
    # ln <y> = ln min(y, 1)
    return np.log(np.minimum(y, 1.0))


def log_rho_eps(eps, log_x):
    """ln rho_eps at x = e^log_x, i.e. -eps |ln x|."""
    return -eps * np.abs(log_x)


def rho_eps(eps, x):
    """min(x^eps, x^-eps), which lies in (0, 1]."""
    if not eps > 0:
        raise DomainError("eps must be > 0")
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("x must be > 0")
    out = np.exp(log_rho_eps(eps, np.log(x)))
    return out if out.ndim else float(out)


class WeightClass(str, Enum):
    DP_PHI = "DP_PHI"
    DP_LOC = "DP_LOC"
    D0 = "D0"
    DEXP = "DEXP"


@dataclass(frozen=True)
class WeightClassSpec:
    """One weight class: D_p(Phi), D_p^loc, D^0_p(beta) or D^exp_p(a).

    For D_p(Phi) the profile is the system's Phi unless ``log_phi`` (a
    callable y -> ln Phi(y)) is given, e.g. the heat profile phi_T.
    """

    kind: WeightClass
    p: float
    system: SystemKind = SystemKind.BASE_PHI
    beta: float | None = None
    a: float | None = None
    log_phi: object = None

    def __post_init__(self):
        object.__setattr__(self, "kind", WeightClass(self.kind))
        _check_p(self.p)
        if self.kind is WeightClass.D0 and not (self.beta is not None and self.beta > -1):
            raise DomainError("D0 needs beta > -1")
        if self.kind is WeightClass.DEXP and not (self.a is not None and self.a > 0):
            raise DomainError("DEXP needs a > 0")

    @classmethod
    def dp_phi(cls, p, system=SystemKind.BASE_PHI, log_phi=None):
        return cls(WeightClass.DP_PHI, p, system, log_phi=log_phi)

    @classmethod
    def d0(cls, p, beta):
        return cls(WeightClass.D0, p, beta=beta)

    @classmethod
    def dexp(cls, p, a):
        return cls(WeightClass.DEXP, p, a=a)


def _log_everywhere(w):
    """ln w(y) on all of (0, inf): the formula for exact weights, power-law ends for tables."""
    def f(y):
        with np.errstate(all="ignore"):
            out = np.asarray(w.log_abs_extrapolated(y), dtype=float)
        return out
    return f


def _sanitize(lg):
    # an undefined integrand value is treated as unbounded
    return np.where(np.isnan(lg), np.inf, lg)


def class_membership(w, spec: WeightClassSpec, params: SemigroupParams | None = None,
                     system: SystemKind | None = None, quad=None):
    """Numerical membership of w in the class described by ``spec``.

    Returns ``(member, norm)`` where norm is the p'-th root of the defining
    integral (inf for a non-member). The integral is taken over
    e^-150 < y < 1e4 and declared divergent when widening to e^-300 < y < 2e4
    increases it by more than ``quad.divergence_growth``.
    """
    cfg = quad or QuadratureConfig()
    p = spec.p
    pp = _conj(p)
    lw = _log_everywhere(w)
    system = system or spec.system

    if spec.kind is WeightClass.DP_LOC:
        # W^{-p'/p} integrable on every compact piece of the node range
        nodes = np.asarray(w.nodes, dtype=float)
        lv = lw(nodes)
        if not np.all(np.isfinite(lv)):
            return False, math.inf
        lg, _ = log_integral(lambda s: _sanitize(-(pp / p) * lw(np.exp(s)) + s),
                             math.log(nodes[0]), math.log(nodes[-1]), cfg)
        ok = bool(np.isfinite(lg))
        return ok, math.exp(lg / pp) if ok else math.inf

    if spec.kind is WeightClass.DP_PHI:
        if params is None and spec.log_phi is None:
            raise DomainError("DP_PHI membership needs the semigroup parameters")
        lo, hi = SIGMA_LO, SIGMA_HI

        def extra(y):
            if spec.log_phi is not None:
                return pp * spec.log_phi(y)
            return pp * log_phi(system, params, y)
    elif spec.kind is WeightClass.D0:
        lo, hi = SIGMA_LO, 0.0

        def extra(y):
            return spec.beta * pp * _bracket_log(y)
    else:
        lo, hi = 0.0, SIGMA_HI

        def extra(y):
            return -spec.a * pp * y * y

    def log_integrand(s):
        y = np.exp(s)
        with np.errstate(all="ignore"):
            return _sanitize(-(pp / p) * lw(y) + extra(y) + s)

    lg, conv = improper_log_integral(log_integrand, lo, hi, cfg,
                                     check_lower=lo < 0, check_upper=hi > 0)
    member = bool(conv and np.isfinite(lg))
    if not member:
        return False, math.inf
    return True, math.exp(lg / pp) if lg / pp < 709 else math.inf


def log_phi_integral(f, params: SemigroupParams, system=SystemKind.BASE_PHI, quad=None):
    """ln of the integral of |f| Phi and whether it converged.

    Tabulated data is integrated over its support (and its power tail, if
    any). Data given by a formula is integrated up to the end of its support
    and declared divergent when doubling that end grows the value by more than
    ``quad.divergence_growth``.
    """
    cfg = quad or QuadratureConfig()
    nodes = np.asarray(f.nodes, dtype=float)
    lo, hi = math.log(nodes[0]), math.log(nodes[-1])
    formula = not isinstance(f, TabulatedFunction) and hasattr(f, "log_abs_extrapolated")
    tail = getattr(f, "extension", None) is not None and f.extension.kind == "power_tail"

    def log_f(y):
        if formula:
            return np.asarray(f.log_abs_extrapolated(y), dtype=float)
        return f._eval(y)[0]

    def log_integrand(s):
        y = np.exp(s)
        with np.errstate(all="ignore"):
            return _sanitize(log_f(y) + log_phi(system, params, y) + s)

    if formula:
        return improper_log_integral(log_integrand, lo, hi, cfg, check_lower=False)
    if tail:
        return improper_log_integral(log_integrand, lo, max(hi, SIGMA_HI), cfg, check_lower=False)
    lg, _ = log_integral(log_integrand, lo, hi, cfg)
    return lg, bool(lg < math.inf)


def admissible(f, params: SemigroupParams, system=SystemKind.BASE_PHI, quad=None):
    """True when the integral of |f| Phi converges numerically."""
    _, ok = log_phi_integral(f, params, system, quad)
    return ok


@dataclass(frozen=True)
class CJWeights:
    """V = [M_loc(W^{-p'/p})]^{-p/p'} and V_eps = V rho_eps(V) on W's nodes."""

    p: float
    eps: float
    big_m: float
    V: TabulatedFunction
    V_eps: TabulatedFunction


def carleson_jones(W: TabulatedFunction, p, eps, big_m, lower=0.5):
    """Carleson-Jones weights built from W (see ``CJWeights``).

    ``lower`` is the left end of the maximal-function window as a fraction of x.
    """
    _check_p(p)
    if not eps > 0:
        raise DomainError("eps must be > 0")
    if not big_m > 1:
        raise DomainError("M must be > 1")
    if np.any(W.signs <= 0) or not np.all(np.isfinite(W.log_values)):
        raise AdmissibilityError("W must be positive and finite at every node")
    pp = _conj(p)
    g = W.power(-pp / p)
    if not np.all(np.isfinite(g.log_values)):
        raise AdmissibilityError("W^{-p'/p} is not locally integrable")
    lm = log_local_maximal(g, big_m, W.nodes, lower=lower)
    if not np.all(np.isfinite(lm)):
        raise AdmissibilityError("W^{-p'/p} is not locally integrable")
    log_v = -(p / pp) * lm
    v = TabulatedFunction(W.nodes, log_values=log_v, interp=Interp.LINEAR_IN_LOG)
    v_eps = v.with_log_values(log_v + log_rho_eps(eps, log_v))
    return CJWeights(p, eps, big_m, v, v_eps)


# ---------------------------------------------------------------------------
# explicit weights

def default_weight_nodes(system: SystemKind, n=400, y_min=1e-4):
    """Log-spaced nodes on [1e-4, Y_max]; Y_max is 30 for gaussian decay, 200 for linear exponentials."""
    y_max = 200.0 if system.uses_square_map else 30.0
    # 1 is a node so the kink of <y> is represented exactly
    return np.unique(np.concatenate([log_spaced_nodes(y_min, y_max, n), [1.0]]))


def _exp_profile(system: SystemKind, y):
    """The exponent e(y) in Phi ~ e^{-e(y)}: y^2/2, y/2 or y."""
    if system in (SystemKind.BASE_PHI, SystemKind.PSI):
        return 0.5 * y * y
    if system is SystemKind.LAGUERRE_POLY:
        return y
    return 0.5 * y


def window_for(system: SystemKind, big_m):
    """(lower, upper) factors of the local maximal window used for the system.

    Systems reached through y -> y^2 use (x/4, M^2 x), the image of (x/2, M x).
    """
    if system.uses_square_map:
        return 0.25, big_m * big_m
    return 0.5, big_m


def v2_threshold(system: SystemKind, params: SemigroupParams, p, variant="poisson"):
    """Exponent N must exceed this value for v2 to make C2 p-integrable."""
    if variant == "heat":
        return None
    a, mu = params.alpha, params.mu
    if system in (SystemKind.BASE_PHI, SystemKind.PSI):
        return 1 + p * abs(mu + 0.5)
    if system is SystemKind.FRAK_L:
        return 1 + 0.5 * p * (abs(mu + 0.5) - 0.5)
    if system is SystemKind.SMALL_ELL:
        return 1 + 0.5 * p * (abs(mu + 0.5) - 0.5 - a)
    return 1 + p * (params.m + abs(a + 0.5))


def _v2_local_exponent(system, params, p):
    a = params.alpha
    return {
        SystemKind.BASE_PHI: (a + 1.5) * p - 1,
        SystemKind.PSI: (2 * a + 2) * p - 1,
        SystemKind.FRAK_L: (0.5 * a + 1) * p - 1,
        SystemKind.SMALL_ELL: (a + 1) * p - 1,
        SystemKind.LAGUERRE_POLY: (a + 1) * p - 1,
    }[system]


def log_weight_v2(system: SystemKind, params: SemigroupParams, p, n_exponent=None,
                  variant="poisson"):
    """Returns y -> ln v2(y) after validating N against the threshold."""
    _check_p(p)
    if variant not in ("poisson", "heat"):
        raise DomainError(f"unknown variant {variant!r}")
    if variant == "heat":
        if system is not SystemKind.BASE_PHI:
            raise DomainError("the heat weight is defined for the base system")
        k = (params.alpha + 1.5) * p - 1

        def heat(y):
            y = np.asarray(y, dtype=float)
            lb = _bracket_log(y)
            return k * lb - 2 * np.log(1 - lb) - np.log1p(y)
        return heat
    thr = v2_threshold(system, params, p)
    if n_exponent is None or not n_exponent > thr:
        raise DomainError(f"N must exceed {thr:.6g}")
    k = _v2_local_exponent(system, params, p)

    def poisson(y):
        y = np.asarray(y, dtype=float)
        lb = _bracket_log(y)
        return (k * lb - 2 * np.log(1 - lb) - p * _exp_profile(system, y)
                - n_exponent * np.log1p(y))
    return poisson


def weight_v2(system: SystemKind, params: SemigroupParams, p, n_exponent=None,
              variant="poisson", nodes=None):
    """Tabulated v2; ``variant`` is "poisson" (needs N) or "heat"."""
    fn = log_weight_v2(system, params, p, n_exponent, variant)
    nodes = default_weight_nodes(system) if nodes is None else np.asarray(nodes, float)
    return TabulatedFunction(nodes, log_values=fn(nodes), interp=Interp.LINEAR_IN_LOG)


def _weight_nodes(w, system, nodes):
    if nodes is not None:
        return np.asarray(nodes, dtype=float)
    if isinstance(w, TabulatedFunction):
        return w.nodes
    return default_weight_nodes(system)


def _require_member(w, system, params, p, quad):
    ok, _ = class_membership(w, WeightClassSpec.dp_phi(p, system), params, system, quad)
    if not ok:
        raise AdmissibilityError("w is not in D_p(Phi)")


def weight_v1eps(w, system: SystemKind, params: SemigroupParams, p, eps, big_m=4.0,
                 nodes=None, check=True, quad=None):
    """v_{1,eps} = (1+x)^{-c p nu} e^{-p e(x)} V_eps[W], W = w e^{p e(x)}.

    e(x) is x^2/2 (c = 2) for the base and PSI systems and x/2 or x (c = 1)
    for the systems reached through the square map, where the maximal window
    is (x/4, M^2 x).
    """
    _check_p(p)
    if check:
        _require_member(w, system, params, p, quad)
    nodes = _weight_nodes(w, system, nodes)
    e = _exp_profile(system, nodes)
    log_w = _log_everywhere(w)(nodes)
    big_w = TabulatedFunction(nodes, log_values=log_w + p * e, interp=Interp.LINEAR_IN_LOG)
    lower, upper = window_for(system, big_m)
    cj = carleson_jones(big_w, p, eps, upper, lower)
    c = 1.0 if system.uses_square_map else 2.0
    log_v = -c * p * params.nu * np.log1p(nodes) - p * e + cj.V_eps.log_values
    return TabulatedFunction(nodes, log_values=log_v, interp=Interp.LINEAR_IN_LOG)


def weight_v_combined(v1: TabulatedFunction, v2: TabulatedFunction):
    """Pointwise minimum of two weights on the same nodes."""
    if v1.nodes.shape != v2.nodes.shape or not np.array_equal(v1.nodes, v2.nodes):
        raise DomainError("weights must share their nodes")
    return TabulatedFunction(v1.nodes, log_values=np.minimum(v1.log_values, v2.log_values),
                             interp=Interp.LINEAR_IN_LOG)


def phi_w_defaults(params: SemigroupParams, p):
    """Default (N0, N1, N2) for the alternative weight."""
    n0 = math.ceil(2 + p * (abs(params.mu + 0.5) + params.alpha + 1.5))
    return n0, 4, 4


def weight_v_phi_w(w, system: SystemKind, params: SemigroupParams, p, eps, n0=None, n1=None,
                   n2=None, big_m=4.0, nodes=None, check=True, quad=None):
    """Alternative weight v^{Phi,w}_eps as the minimum of two branches.

    With G = M_loc(w^{-p'/p} Phi^{p'}) and U = G^{-p/p'}:
      first  = Phi^p U <x>^{eps N1} (1+x)^{-N2} rho_eps(U),
      second = <x>^{p-1} Phi^p / ([log(e/<x>)]^2 (1+x)^{N0}).
    """
    _check_p(p)
    d0, d1, d2 = phi_w_defaults(params, p)
    n0 = d0 if n0 is None else n0
    n1 = d1 if n1 is None else n1
    n2 = d2 if n2 is None else n2
    if check:
        _require_member(w, system, params, p, quad)
    nodes = _weight_nodes(w, system, nodes)
    pp = _conj(p)
    lphi = log_phi(system, params, nodes)
    g = TabulatedFunction(nodes, log_values=-(pp / p) * _log_everywhere(w)(nodes) + pp * lphi,
                          interp=Interp.LINEAR_IN_LOG)
    lower, upper = window_for(system, big_m)
    log_u = -(p / pp) * log_local_maximal(g, upper, nodes, lower=lower)
    lb = _bracket_log(nodes)
    l1 = np.log1p(nodes)
    first = p * lphi + log_u + eps * n1 * lb - n2 * l1 + log_rho_eps(eps, log_u)
    second = (p - 1) * lb - 2 * np.log(1 - lb) + p * lphi - n0 * l1
    return TabulatedFunction(nodes, log_values=np.minimum(first, second),
                             interp=Interp.LINEAR_IN_LOG)


# ---------------------------------------------------------------------------
# weighted norms

_GL_X, _GL_W = np.polynomial.legendre.leggauss(15)


def _as_table(f, other):
    if isinstance(f, TabulatedFunction):
        return f
    return f.tabulate(other.nodes if isinstance(other, TabulatedFunction) else f.nodes)


def _log_tail(f, weight, p, y_end, l_end):
    # both extended by power laws past the last common node
    kf = f.extension.exponent if f.extension.kind == "power_tail" else None
    kw = weight.extension.exponent if weight.extension.kind == "power_tail" else None
    if kf is None or kw is None or not np.isfinite(l_end):
        return -np.inf
    if y_end < max(f.nodes[-1], weight.nodes[-1]):
        return -np.inf
    s = p * kf + kw
    if s >= -1:
        return np.inf
    return l_end + math.log(y_end) - math.log(-(s + 1))


def log_lp_norm(f, weight, p):
    """ln of (integral of |f|^p weight)^{1/p}; +inf for a divergent tail."""
    if not 1 <= p < math.inf:
        raise DomainError("p must lie in [1, inf)")
    f = _as_table(f, weight)
    weight = _as_table(weight, f)
    lo = max(f.nodes[0], weight.nodes[0])
    hi_f = math.inf if f.extension.kind == "power_tail" else f.nodes[-1]
    hi_w = math.inf if weight.extension.kind == "power_tail" else weight.nodes[-1]
    hi = min(max(f.nodes[-1], weight.nodes[-1]), hi_f, hi_w)
    if not hi > lo:
        return -np.inf
    pts = np.concatenate([f.nodes, weight.nodes])
    pts = np.unique(pts[(pts >= lo) & (pts <= hi)])
    a, b = pts[:-1], pts[1:]
    if f.interp == Interp.LINEAR_IN_LOG and weight.interp == Interp.LINEAR_IN_LOG:
        la = p * f.log_abs(a) + weight.log_abs(a)
        lb = p * f.log_abs(b) + weight.log_abs(b)
        with np.errstate(invalid="ignore"):
            slope = (lb - la) / np.log(b / a)
        finite = np.isfinite(la) & np.isfinite(lb)
        pieces = np.where(finite, log_power_segment(a, b, np.where(finite, la, 0.0),
                                                    np.where(finite, slope, 0.0)), -np.inf)
    else:
        # split where the linear interpolant of f changes sign
        fa, fb = f(a), f(b)
        cross = (fa * fb < 0)
        root = np.where(cross, a + (b - a) * fa / np.where(cross, fa - fb, 1.0), b)
        a2 = np.concatenate([a, root[cross]])
        b2 = np.concatenate([root, b[cross]])
        mid, half = 0.5 * (a2 + b2), 0.5 * (b2 - a2)
        y = mid[:, None] + half[:, None] * _GL_X
        lg = p * f.log_abs(y) + weight.log_abs(y)
        top = np.max(lg, axis=1, keepdims=True)
        top = np.where(np.isfinite(top), top, 0.0)
        with np.errstate(under="ignore", divide="ignore"):
            s = np.sum(np.exp(lg - top) * _GL_W, axis=1) * half
            pieces = np.log(s) + top[:, 0]
    total = np.logaddexp.reduce(pieces) if len(pieces) else -np.inf
    l_end = p * f.log_abs(hi) + weight.log_abs(hi)
    total = np.logaddexp(total, _log_tail(f, weight, p, hi, l_end))
    return float(total / p)


def lp_norm(f, weight, p):
    """(integral of |f|^p weight)^{1/p} with exact integration of power-law interpolants."""
    lg = log_lp_norm(f, weight, p)
    return math.exp(lg) if lg < 709 else math.inf
