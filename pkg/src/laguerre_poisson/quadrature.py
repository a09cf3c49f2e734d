"""Batched adaptive Gauss-Kronrod quadrature and improper log-space integrals."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "QuadratureConfig",
    "NumericFailure",
    "AdmissibilityError",
    "integrate",
    "integrate_many",
    "log_integral",
    "improper_log_integral",
    "gauss_legendre_panels",
    "graded_y_grid",
    "KernelTable",
]


class NumericFailure(ArithmeticError):
    """Adaptive refinement did not reach the requested tolerance."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class AdmissibilityError(ValueError):
    """A defining integral diverges (datum not admissible / weight not in class)."""


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 0.0
    max_panels: int = 20000
    max_rounds: int = 60
    # large-u cutoff of the subordination integral; beyond it only the ground
    # state of the heat kernel survives and the remainder is summed analytically
    u_tail: float = 12.0
    y_min: float = 1e-4
    y_max: float = 30.0
    divergence_growth: float = 0.01

    def halved(self):
        from dataclasses import replace
        return replace(self, rel_tol=self.rel_tol / 2, abs_tol=self.abs_tol / 2)


# Kronrod 15 / Gauss 7 nodes and weights on [-1, 1]
_XK = np.array([
    -0.991455371120812639206854697526329, -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926, -0.741531185599394439863864773280788,
    -0.586087235467691130294144845693013, -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245, 0.0,
    0.207784955007898467600689403773245, 0.405845151377397166906606412076961,
    0.586087235467691130294144845693013, 0.741531185599394439863864773280788,
    0.864864423359769072789712788640926, 0.949107912342758524526189684047851,
    0.991455371120812639206854697526329])
_WK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
    0.204432940075298892414161999234649, 0.190350578064785409913256402421014,
    0.169004726639267902826583426598550, 0.140653259715525918745189590510238,
    0.104790010322250183839876322541518, 0.063092092629978553290700663189204,
    0.022935322010529224963732008058970])
_WG = np.zeros(15)
_WG[1::2] = [0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
             0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
             0.381830050505118944950369775488975, 0.279705391489276667901467771423780,
             0.129484966168869693270611432679082]


def integrate_many(fn, edges, rel_tol=1e-10, abs_tol=0.0, max_panels=20000, max_rounds=60):
    """Integrate several scalar functions at once by adaptive G7/K15 bisection.

    ``edges`` is a list of increasing breakpoint arrays, one per integral.
    ``fn(ids, nodes)`` receives integer ids and node arrays of equal shape and
    must return the integrand values of integral ``ids`` at ``nodes``.
    ``max_panels`` caps the number of live panels of any one integral.
    Returns ``(values, errors)``.
    """
    n = len(edges)
    a = np.concatenate([np.asarray(e[:-1], float) for e in edges])
    b = np.concatenate([np.asarray(e[1:], float) for e in edges])
    ids = np.concatenate([np.full(len(e) - 1, i) for i, e in enumerate(edges)])
    done_val = np.zeros(n)
    done_err = np.zeros(n)
    for _ in range(max_rounds):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        nodes = mid[:, None] + half[:, None] * _XK
        vals = fn(np.broadcast_to(ids[:, None], nodes.shape), nodes)
        k = half * (vals @ _WK)
        g = half * (vals @ _WG)
        err = np.abs(k - g)
        tot = done_val + np.bincount(ids, k, minlength=n)
        tot_err = done_err + np.bincount(ids, err, minlength=n)
        tol = np.maximum(abs_tol, rel_tol * np.abs(tot))
        count = np.bincount(ids, minlength=n)
        unfinished = tot_err > tol
        # a panel is kept when its error is within its share of the budget
        share = tol[ids] / np.maximum(count[ids], 1)
        split = unfinished[ids] & (err > 0.5 * share)
        keep = ~split
        done_val += np.bincount(ids[keep], k[keep], minlength=n)
        done_err += np.bincount(ids[keep], err[keep], minlength=n)
        if not split.any():
            return done_val, done_err
        estimate = done_val + np.bincount(ids[split], k[split], minlength=n)
        if 2 * np.bincount(ids[split], minlength=n).max() > max_panels:
            break
        a_s, b_s, i_s = a[split], b[split], ids[split]
        m_s = 0.5 * (a_s + b_s)
        a = np.concatenate([a_s, m_s])
        b = np.concatenate([m_s, b_s])
        ids = np.concatenate([i_s, i_s])
    raise NumericFailure(f"quadrature did not converge; estimate {estimate}", estimate=estimate)


def integrate(fn, edges, cfg: QuadratureConfig | None = None):
    """Adaptive G7/K15 integral of ``fn`` over ``[edges[0], edges[-1]]``.

    Returns ``(value, error_estimate)``.
    """
    cfg = cfg or QuadratureConfig()
    v, e = integrate_many(lambda _i, s: fn(s), [np.asarray(edges, float)],
                          cfg.rel_tol, cfg.abs_tol, cfg.max_panels, cfg.max_rounds)
    return float(v[0]), float(e[0])


def log_integral(log_fn, lo, hi, cfg: QuadratureConfig | None = None, panel=1.0, scan=4001,
                 strict=True):
    """ln of the integral of exp(log_fn(s)) over [lo, hi], plus relative error.

    The integrand is shifted by its scanned maximum before exponentiation, so
    the result can be far outside double range. Returns ``(-inf, 0)`` for a
    vanishing integrand. With ``strict=False`` a quadrature that stalls (for
    instance on rounding noise) returns its last estimate with error nan.
    """
    cfg = cfg or QuadratureConfig()
    grid = np.linspace(lo, hi, scan)
    lg = log_fn(grid)
    shift = np.max(lg)
    if not np.isfinite(shift):
        if shift == np.inf:
            return np.inf, 0.0
        return -np.inf, 0.0
    # panels refined around the region where the integrand is not negligible
    alive = grid[lg >= shift - 60]
    pts = [lo, hi, alive[0], alive[-1]]
    npan = max(2, int(np.ceil((alive[-1] - alive[0]) / panel)))
    pts.extend(np.linspace(alive[0], alive[-1], npan + 1))
    edges = np.unique(np.clip(pts, lo, hi))
    with np.errstate(under="ignore"):
        try:
            v, e = integrate(lambda s: np.exp(log_fn(s) - shift), edges, cfg)
        except NumericFailure as exc:
            if strict:
                raise
            v, e = float(exc.estimate[0]), np.nan
    if v <= 0:
        return -np.inf, 0.0
    return shift + np.log(v), e / v


def improper_log_integral(log_fn_sigma, s_lo, s_hi, cfg: QuadratureConfig | None = None,
                          check_lower=True, check_upper=True):
    """Log-integral over sigma in [s_lo, s_hi] with divergence detection.

    The window is doubled at each checked end: s_lo -> 2 s_lo at the lower end
    (an end at 0 moves by one unit) and y_hi -> 2 y_hi at the upper end.
    Growth of the value beyond ``cfg.divergence_growth`` declares the integral
    divergent. Returns ``(log_value, converged)``.
    """
    cfg = cfg or QuadratureConfig()
    # only the first few digits matter for the growth test
    cfg = replace(cfg, rel_tol=max(cfg.rel_tol, 1e-8))
    base, _ = log_integral(log_fn_sigma, s_lo, s_hi, cfg, strict=False)
    if not np.isfinite(base):
        return base, base != np.inf
    lo2 = (2 * s_lo if s_lo < 0 else s_lo - 1.0) if check_lower else s_lo
    hi2 = s_hi + np.log(2.0) if check_upper else s_hi
    if lo2 == s_lo and hi2 == s_hi:
        return base, True
    grown, _ = log_integral(log_fn_sigma, lo2, hi2, cfg, strict=False)
    return base, bool(grown - base <= np.log1p(cfg.divergence_growth))


def gauss_legendre_panels(lo, hi, width, order=15):
    """Composite Gauss-Legendre nodes and weights on [lo, hi]."""
    x, w = np.polynomial.legendre.leggauss(order)
    n = max(1, int(np.ceil((hi - lo) / width)))
    edges = np.linspace(lo, hi, n + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


def graded_y_grid(x, y_lo=1e-8, y_hi=30.0, h_min=1e-4, order=15, breakpoints=None):
    """Gauss-Legendre nodes/weights on [y_lo, y_hi], graded geometrically towards x.

    Panel edges sit at x +- h_min 2^k near x, shrink by 1.6 below x/2 and grow
    by 1.25 above 2x; ``breakpoints`` (kinks of the data) are added as edges.
    """
    left = [x]
    d = h_min
    while x - d > x / 2:
        left.append(x - d)
        d *= 2
    y = x / 2
    while y > y_lo:
        left.append(y)
        y /= 1.6
    left.append(y_lo)
    right = [x]
    d = h_min
    while d < x:
        right.append(x + d)
        d *= 2
    y = 2 * x
    while y < y_hi:
        right.append(y)
        y *= 1.25
    right.append(y_hi)
    pts = [left, right]
    if breakpoints is not None:
        pts.append(np.asarray(breakpoints, dtype=float).ravel())
    edges = np.unique(np.clip(np.concatenate(pts), y_lo, y_hi))
    gx, gw = np.polynomial.legendre.leggauss(order)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    return (mid[:, None] + half[:, None] * gx).ravel(), (half[:, None] * gw).ravel()


class KernelTable:
    """Base for kernels K(t_i, x, y_j) tabulated on a quadrature grid in y.

    Subclasses set ``log_kernel`` with shape (n_t, n_y). The first two grid
    points, y_lo and 2 y_lo, carry no weight: they fix a power law for the
    integral over (0, y_lo).
    """

    def _set_grid(self, y_lo, y_hi, h_min, breakpoints=None):
        y, w = graded_y_grid(self.x, y_lo, y_hi, h_min=h_min, breakpoints=breakpoints)
        self.y = np.concatenate([[y_lo, 2 * y_lo], y])
        self.w = np.concatenate([[0.0, 0.0], w])
        self.y_lo = y_lo

    @property
    def kernel(self):
        return np.exp(self.log_kernel)

    def apply(self, f):
        """Integral of K(t, x, y) f(y) dy for every t; f is a function object or callable."""
        if hasattr(f, "_eval"):
            lf, sf = f._eval(self.y)
        else:
            v = np.asarray(f(self.y), float)
            with np.errstate(divide="ignore"):
                lf, sf = np.log(np.abs(v)), np.sign(v)
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            terms = sf[None, :] * np.exp(self.log_kernel + lf[None, :]) * self.w[None, :]
        terms = np.nan_to_num(terms, nan=0.0)
        return terms.sum(axis=1) + self._below(lf[:2], sf[:2])

    def _below(self, lf, sf):
        if sf[0] == 0 or sf[0] != sf[1] or not np.all(np.isfinite(lf)):
            return 0.0
        la = self.log_kernel[:, 0] + lf[0]
        beta = (self.log_kernel[:, 1] + lf[1] - la) / np.log(2.0)
        with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
            out = sf[0] * np.exp(la) * self.y_lo / (beta + 1)
        return np.where(beta > -1, out, 0.0)

    def apply_many(self, values):
        """Transforms of a stack of functions sampled at ``self.y``: (n_f, n_y) -> (n_f, n_t).

        No correction is made below y_lo (meant for data vanishing near 0).
        """
        with np.errstate(under="ignore"):
            k = np.exp(self.log_kernel) * self.w[None, :]
        return np.asarray(values) @ k.T
