"""Local Hardy-Littlewood maximal function with exact interval averages."""
from __future__ import annotations

import numpy as np

from .functions import TabulatedFunction
from .special import DomainError

__all__ = ["log_local_maximal", "local_maximal", "default_radii"]


def default_radii(f: TabulatedFunction, x, big_m, lower=0.5, n_geom=96):
    """Distances from x to every node in the window, the window edges, and a geometric grid."""
    lo, hi = lower * x, big_m * x
    nodes = f.nodes[(f.nodes > lo) & (f.nodes < hi)]
    d = np.abs(nodes - x)
    geo = np.geomspace(1e-6 * x, 1.1 * (big_m - 1) * x, n_geom)
    r = np.concatenate([d, [x - lo, hi - x], geo])
    return np.unique(r[r > 0])


def _one_side(f, x, edge, d, side):
    """ln of the integral of |f| between x and x -/+ min(d, |edge - x|)."""
    if side < 0:
        inner = f.nodes[(f.nodes > edge) & (f.nodes < x)][::-1]
    else:
        inner = f.nodes[(f.nodes > x) & (f.nodes < edge)]
    ev = np.concatenate([[x], inner, [edge]])
    dist = np.abs(ev - x)
    if side < 0:
        pieces = f.log_abs_integral_pieces(ev[1:], ev[:-1])
    else:
        pieces = f.log_abs_integral_pieces(ev[:-1], ev[1:])
    cum = np.logaddexp.accumulate(pieces)
    d = np.minimum(d, dist[-1])
    k = np.clip(np.searchsorted(dist, d, side="left") - 1, 0, len(pieces) - 1)
    start = ev[k]
    end = x + side * d
    if side < 0:
        partial = f.log_abs_integral_pieces(end, start)
    else:
        partial = f.log_abs_integral_pieces(start, end)
    before = np.where(k > 0, cum[np.maximum(k - 1, 0)], -np.inf)
    return np.logaddexp(before, partial)


def log_local_maximal(f: TabulatedFunction, big_m, x, r_grid=None, lower=0.5):
    """ln M_loc f(x) for each x: sup over radii of averages of |f| 1{lower x < y < M x}.

    Averages are over I(x, r) = (x - r, x + r) intersected with (0, inf), with the
    integral of the interpolant computed exactly; the r -> 0 limit |f(x)| is
    included. The result is a lower approximation of the supremum.
    """
    if not big_m > 1:
        raise DomainError("M must be > 1")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs <= 0):
        raise DomainError("x must be > 0")
    if r_grid is not None and len(r_grid) == 0:
        raise DomainError("empty radius grid")
    out = np.empty(xs.shape)
    for i, xi in enumerate(xs):
        r = default_radii(f, xi, big_m, lower) if r_grid is None else np.asarray(r_grid, float)
        left = _one_side(f, xi, lower * xi, r, -1)
        right = _one_side(f, xi, big_m * xi, r, +1)
        avg = np.logaddexp(left, right) - np.log(r + np.minimum(r, xi))
        out[i] = max(np.max(avg), f.log_abs(xi))
    return out if np.ndim(x) else float(out[0])


def local_maximal(f: TabulatedFunction, big_m, x, r_grid=None, lower=0.5):
    """M_loc f(x) (see ``log_local_maximal``)."""
    out = np.exp(log_local_maximal(f, big_m, x, r_grid, lower))
    return out if np.ndim(out) else float(out)
