"""Transport between the base system and the other four Laguerre systems.

PSI is a multiplier image of the base system. FRAK_L is the image under the
L^2 isometry A f(x) = sqrt(2x) f(x^2), and SMALL_ELL and LAGUERRE_POLY are
multiplier images of FRAK_L. Kernels and transforms of every system are
computed by pulling back to the base system.
"""
from __future__ import annotations

import math

import numpy as np

from .functions import TabulatedFunction
from .maximal import log_local_maximal
from .poisson import PoissonOperator, log_poisson_kernel, subordination_multiplier_bessel
from .quadrature import AdmissibilityError
from .reports import BoundReport
from .special import DomainError, SemigroupParams, eigenfunctions
from .systems import SystemKind, log_phi_table, system_eigenfunctions
from .weights import log_phi_integral

__all__ = [
    "square_map",
    "inverse_square_map",
    "PulledBack",
    "pull_back",
    "system_poisson_kernel",
    "transfer_poisson",
    "transported_eigenfunctions",
    "kernel_series",
    "kernel_relation_check",
    "eigenfunction_transport_check",
    "phi_consistency",
    "phi_chain_ratio",
    "local_maximal_transport_check",
]


def square_map(f: TabulatedFunction) -> TabulatedFunction:
    """A f(x) = sqrt(2x) f(x^2) on the nodes sqrt(y_i)."""
    x = np.sqrt(f.nodes)
    lv = f.log_values + 0.5 * np.log(2 * x)
    return TabulatedFunction(x, log_values=lv, signs=f.signs, interp=f.interp)


def inverse_square_map(g: TabulatedFunction) -> TabulatedFunction:
    """A^{-1} g(y) = (4y)^{-1/4} g(sqrt y) on the nodes x_i^2."""
    y = g.nodes ** 2
    lv = g.log_values - 0.25 * np.log(4 * y)
    return TabulatedFunction(y, log_values=lv, signs=g.signs, interp=g.interp)


class PulledBack:
    """The function seen by the base semigroup when f lives in ``system``.

    For PSI this is a^{-1} f; for the square-map systems it is A[a^{-1} f]
    (a = 1 for FRAK_L). Evaluation is lazy and exact in f.
    """

    def __init__(self, f, system: SystemKind, params: SemigroupParams):
        self.f, self.system, self.params = f, system, params
        nodes = np.asarray(f.nodes, dtype=float)
        self.nodes = np.sqrt(nodes) if system.uses_square_map else nodes
        self.extension = f.extension

    def _eval(self, u):
        u = np.asarray(u, dtype=float)
        y = u * u if self.system.uses_square_map else u
        la, sg = self.f._eval(y)
        with np.errstate(all="ignore"):
            la = la - self.system.log_multiplier(self.params, y)
            if self.system.uses_square_map:
                la = la + 0.5 * np.log(2 * u)
        return la, sg

    def __call__(self, u):
        la, sg = self._eval(u)
        with np.errstate(over="ignore"):
            out = sg * np.exp(la)
        return out if np.ndim(out) else float(out)


def pull_back(f, system: SystemKind, params: SemigroupParams):
    return PulledBack(f, system, params)


def _push_log_factor(system, params, x):
    # ln of the factor multiplying the base transform at the base point
    lf = system.log_multiplier(params, x)
    if system.uses_square_map:
        lf = lf - 0.25 * np.log(4 * x)
    return lf


def system_poisson_kernel(system: SystemKind, params: SemigroupParams, t, x, y, quad=None):
    """P_t^system(x, y) with respect to the system's measure a(y)^{-2} dy.

    PSI: a(x) a(y) P_t(x, y); FRAK_L: (16xy)^{-1/4} P_{t/2}(sqrt x, sqrt y);
    SMALL_ELL, LAGUERRE_POLY: a(x) a(y) times the FRAK_L kernel.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if system.uses_square_map:
        lk = log_poisson_kernel(params, t / 2, np.sqrt(x), np.sqrt(y), quad) - 0.25 * np.log(16 * x * y)
    else:
        lk = log_poisson_kernel(params, t, x, y, quad)
    lk = lk + system.log_multiplier(params, x) + system.log_multiplier(params, y)
    out = np.exp(lk)
    return out if np.ndim(out) else float(out)


def transfer_poisson(system: SystemKind, params: SemigroupParams, t, f, x, quad=None, check=True):
    """P_t^system f(x) by pulling f back to the base system.

    ``t`` may be a scalar or an array of times (one kernel table serves all).
    For the square-map systems the base semigroup runs at time t/2 at the
    point sqrt(x).
    """
    if not x > 0:
        raise DomainError("x must be > 0")
    if check:
        _, ok = log_phi_integral(f, params, system, quad)
        if not ok:
            raise AdmissibilityError("f is not in L^1(Phi) for this system")
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if system is SystemKind.BASE_PHI:
        out = PoissonOperator(params, x, ts, quad, breakpoints=f.nodes).apply(f)
        return out if np.ndim(t) else float(out[0])
    g = pull_back(f, system, params)
    if system.uses_square_map:
        y_hi = None
        if quad is not None:
            y_hi = max(quad.y_max, math.sqrt(float(np.max(g.f.nodes))))
        op = PoissonOperator(params, math.sqrt(x), ts / 2, quad, y_hi=y_hi, breakpoints=g.nodes)
    else:
        op = PoissonOperator(params, x, ts, quad, breakpoints=g.nodes)
    out = op.apply(g) * math.exp(_push_log_factor(system, params, x))
    return out if np.ndim(t) else float(out[0])


def transported_eigenfunctions(system: SystemKind, params: SemigroupParams, n_max, y):
    """Images of phi_0..phi_{n_max} under the system's map chain (evaluated through A^{-1})."""
    y = np.asarray(y, dtype=float)
    if system.uses_square_map:
        la, sg = eigenfunctions(params.alpha, n_max, np.sqrt(y), log=True)
        la = la - 0.25 * np.log(4 * y)
    else:
        la, sg = eigenfunctions(params.alpha, n_max, y, log=True)
    la = la + system.log_multiplier(params, y)
    return sg * np.exp(la)


def kernel_series(system: SystemKind, params: SemigroupParams, t, x, y, n_max=None):
    """Eigen-series sum_n F(lambda_n) e_n(x) e_n(y) of the system's Poisson kernel.

    F is the Bessel closed form at time t (t/2 for the square-map systems).
    The default n_max makes F(lambda_{n_max}) negligible in double precision.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    tb = t / 2 if system.uses_square_map else t
    if n_max is None:
        n_max = int(math.ceil((45.0 / tb) ** 2 / 4)) + 10
    lam = params.eigenvalue(np.arange(n_max + 1))
    f = subordination_multiplier_bessel(params.nu, tb, lam)
    ex = system_eigenfunctions(system, params, n_max, x)
    ey = system_eigenfunctions(system, params, n_max, y)
    return np.einsum("n,n...,n...->...", f, ex, ey)


def kernel_relation_check(system: SystemKind, params: SemigroupParams, n_samples=50, seed=0,
                          t_range=(0.2, 2.0), xy_range=(0.2, 3.0), rtol=1e-6, quad=None):
    """Kernel from the transport relations against the eigen-series at seeded (t, x, y)."""
    rng = np.random.default_rng(seed)
    t = np.exp(rng.uniform(*np.log(t_range), n_samples))
    x = rng.uniform(*xy_range, n_samples)
    y = rng.uniform(*xy_range, n_samples)
    rep = BoundReport(f"kernel_relation_{system.value}",
                      ["t", "x", "y", "kernel", "series", "rel_error"], key=("t", "x", "y"))
    worst = 0.0
    for ti, xi, yi in zip(t, x, y):
        k = float(system_poisson_kernel(system, params, ti, xi, yi, quad))
        o = float(kernel_series(system, params, ti, xi, yi)[0])
        e = abs(k - o) / abs(o)
        worst = max(worst, e)
        rep.add(t=ti, x=xi, y=yi, kernel=k, series=o, rel_error=e)
    rep.fitted = {"max_rel_error": worst}
    rep.passed = bool(worst <= rtol)
    rep.config = {"system": system.value, "alpha": params.alpha, "mu": params.mu,
                  "nu": params.nu, "n_samples": n_samples, "seed": seed, "rtol": rtol}
    return rep


def eigenfunction_transport_check(system: SystemKind, params: SemigroupParams, y_grid,
                                  n_max=10, rtol=1e-10):
    """Transported base eigenfunctions against the system's direct formulas."""
    y = np.asarray(y_grid, dtype=float)
    moved = transported_eigenfunctions(system, params, n_max, y)
    direct = system_eigenfunctions(system, params, n_max, y)
    scale = np.max(np.abs(direct), axis=1, keepdims=True)
    err = np.abs(moved - direct) / scale
    rep = BoundReport(f"eigen_transport_{system.value}", ["n", "max_rel_error"], key=("n",))
    for n in range(n_max + 1):
        rep.add(n=n, max_rel_error=float(err[n].max()))
    rep.fitted = {"max_rel_error": float(err.max())}
    rep.passed = bool(err.max() <= rtol)
    rep.config = {"system": system.value, "alpha": params.alpha, "n_max": n_max, "rtol": rtol}
    return rep


def _image_of_parent(system, params, y):
    """ln of the one-step image of the parent's table Phi: a^{-1} Phi_parent or A^{-1} Phi_base."""
    if system is SystemKind.BASE_PHI:
        return log_phi_table(system, params, y)
    if system is SystemKind.FRAK_L:
        return log_phi_table(SystemKind.BASE_PHI, params, np.sqrt(y)) - 0.25 * np.log(4 * y)
    parent = system.parent
    return log_phi_table(parent, params, y) - system.log_multiplier(params, y)


def phi_chain_ratio(system: SystemKind, params: SemigroupParams, y):
    """Table Phi over the full-chain image of the base table Phi."""
    y = np.asarray(y, dtype=float)
    if system.uses_square_map:
        img = log_phi_table(SystemKind.BASE_PHI, params, np.sqrt(y)) - 0.25 * np.log(4 * y)
    else:
        img = log_phi_table(SystemKind.BASE_PHI, params, y)
    img = img - system.log_multiplier(params, y)
    return np.exp(log_phi_table(system, params, y) - img)


def phi_consistency(system: SystemKind, params: SemigroupParams, y_grid, rtol=1e-8):
    """Compare the table Phi with the image of its parent's table Phi.

    Passes when the ratio is constant across the grid within ``rtol``. The
    ratio range is recorded either way (a bounded, non-constant ratio means
    the two agree only up to comparability constants).
    """
    y = np.asarray(y_grid, dtype=float)
    if np.any(~(y > 0)):
        raise DomainError("y must be > 0")
    table = log_phi_table(system, params, y)
    image = _image_of_parent(system, params, y)
    ratio = np.exp(table - image)
    spread = float(ratio.max() / ratio.min() - 1)
    rep = BoundReport(f"phi_consistency_{system.value}",
                      ["y", "phi_table", "phi_image", "ratio", "pass"], key=("y",))
    ok = spread <= rtol
    for yi, a, b, r in zip(y, table, image, ratio):
        rep.add(y=yi, phi_table=math.exp(a), phi_image=math.exp(b), ratio=r,
                **{"pass": bool(abs(r / ratio[0] - 1) <= rtol)})
    rep.fitted = {"ratio_min": float(ratio.min()), "ratio_max": float(ratio.max()),
                  "spread": spread}
    rep.passed = bool(ok)
    rep.config = {"system": system.value, "alpha": params.alpha, "mu": params.mu,
                  "nu": params.nu, "rtol": rtol}
    return rep


def local_maximal_transport_check(g: TabulatedFunction, big_m, x):
    """Both sides of the change-of-variables bound for the local maximal function.

    lhs = M(g(y^2) 1{sqrt x / 2 < y < M sqrt x})(sqrt x),
    rhs = M(g 1{x/4 < u < M^2 x})(x).
    """
    if not x > 0:
        raise DomainError("x must be > 0")
    if np.all(g.signs == 0):
        return 0.0, 0.0
    h = TabulatedFunction(np.sqrt(g.nodes), log_values=g.log_values, signs=g.signs,
                          interp=g.interp)
    lhs = math.exp(log_local_maximal(h, big_m, math.sqrt(x), lower=0.5))
    rhs = math.exp(log_local_maximal(g, big_m * big_m, x, lower=0.25))
    return lhs, rhs
