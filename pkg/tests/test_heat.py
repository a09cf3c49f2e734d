import math

import numpy as np
import pytest

from laguerre_poisson import (
    AdmissibilityError,
    DomainError,
    ExactFunction,
    HeatBoundEnvelope,
    HeatOperator,
    HeatParametrization,
    Region,
    S_FORM_MAX,
    SemigroupParams,
    TabulatedFunction,
    eigenfunction_datum,
    heat_bound_envelope,
    heat_envelope_sweep,
    heat_kernel,
    heat_kernel_series,
    heat_maximal,
    heat_transform,
    log_heat_kernel,
    series_terms,
)

# mpmath eigen-series at 40 digits
HEAT_A = 0.064761112286585953953    # alpha=1.5, mu=0.5, t=0.3, x=0.8, y=1.7
HEAT_B = 1.1179083128738052052      # alpha=-0.75, mu=0, t=0.05, x=1.0, y=1.1


def test_parametrization():
    hp = HeatParametrization(0.3)
    assert hp.r == pytest.approx(math.exp(-0.6))
    assert hp.s == pytest.approx(math.tanh(0.3))
    assert hp.kind == "S_FORM"
    assert HeatParametrization(1.0).kind == "R_FORM"
    with pytest.raises(DomainError):
        HeatParametrization(0.0)


def test_pinned_values():
    assert heat_kernel(SemigroupParams(1.5, 0.5), 0.3, 0.8, 1.7) == pytest.approx(HEAT_A, rel=1e-13)
    assert heat_kernel(SemigroupParams(-0.75, 0.0), 0.05, 1.0, 1.1) == pytest.approx(HEAT_B, rel=1e-13)


def test_symmetry_exact():
    p = SemigroupParams(0.3, 0.2)
    for t in (0.05, 0.7, 3.0):
        assert heat_kernel(p, t, 2.0, 3.0) == heat_kernel(p, t, 3.0, 2.0)


@pytest.mark.parametrize("alpha", [-0.75, 0.0, 2.5])
def test_seam(alpha):
    p = SemigroupParams(alpha)
    x = np.geomspace(0.05, 6, 15)
    a = log_heat_kernel(p, S_FORM_MAX, x[:, None], x[None, :], form="s")
    b = log_heat_kernel(p, S_FORM_MAX, x[:, None], x[None, :], form="r")
    assert np.allclose(np.exp(a - b), 1.0, rtol=1e-10)


def test_series_example():
    p = SemigroupParams(0.0)
    v, tail = heat_kernel_series(p, 0.5, 1.0, 1.0, 60)
    assert heat_kernel(p, 0.5, 1.0, 1.0) == pytest.approx(v, rel=1e-9)
    p = SemigroupParams(1.5, 0.5)
    v, tail = heat_kernel_series(p, 0.3, 0.8, 1.7, 80)
    k = heat_kernel(p, 0.3, 0.8, 1.7)
    assert abs(v - k) <= max(1e-9 * k, tail)


def test_series_large_t_one_term():
    p = SemigroupParams(0.5, 0.0)
    v, _ = heat_kernel_series(p, 5.0, 1.0, 1.3, 0)
    assert v == pytest.approx(heat_kernel(p, 5.0, 1.0, 1.3), rel=1e-6)


def test_series_tail_nonincreasing():
    p = SemigroupParams(0.0)
    tails = [heat_kernel_series(p, 0.2, 0.7, 1.1, n)[1] for n in range(0, 60, 5)]
    assert all(b <= a for a, b in zip(tails, tails[1:]))


def test_series_domain():
    with pytest.raises(DomainError):
        heat_kernel_series(SemigroupParams(0.0), 0.2, 1.0, 1.0, -1)


def test_series_terms_rule():
    assert series_terms(0.25) == 60
    assert math.exp(-4 * series_terms(0.01) * 0.01) <= math.exp(-60) * 1.0001


def test_kernel_domain_and_overflow():
    p = SemigroupParams(0.0)
    with pytest.raises(DomainError):
        heat_kernel(p, 0.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        heat_kernel(p, 1.0, -1.0, 1.0)
    assert np.isfinite(log_heat_kernel(p, 1e-3, 200.0, 200.0))
    assert heat_kernel(p, 1e-3, 1.0, 40.0) == 0.0    # underflows to zero, no warning


def test_transform_eigenfunction():
    p = SemigroupParams(0.5, 0.25)
    f = eigenfunction_datum(p)
    for t in (0.1, 1.0):
        got = heat_transform(p, t, f, 1.2)
        want = math.exp(-p.eigenvalue(0) * t) * f(1.2)
        assert got == pytest.approx(want, rel=1e-7)


def test_transform_zero():
    f = TabulatedFunction(np.geomspace(0.01, 10, 20), np.zeros(20))
    assert heat_transform(SemigroupParams(0.0), 0.3, f, 1.0) == 0.0


def test_semigroup_law():
    from scipy.integrate import quad
    p = SemigroupParams(0.0, 0.3)
    t1, t2 = 0.2, 0.3
    for x, y in ((0.5, 1.0), (1.0, 1.0), (2.0, 0.7)):
        val, _ = quad(lambda z: heat_kernel(p, t1, x, z) * heat_kernel(p, t2, z, y),
                      0, 12, points=[x, y], epsabs=0, epsrel=1e-12, limit=200)
        assert val == pytest.approx(heat_kernel(p, t1 + t2, x, y), rel=1e-9)


def test_transform_linear_combination():
    p = SemigroupParams(0.0)
    phi0, phi3 = eigenfunction_datum(p, 0), eigenfunction_datum(p, 3)
    f = ExactFunction.from_values(lambda y: phi0(y) + phi3(y), support=(1e-8, 40.0))
    for x in (0.5, 1.0, 2.0):
        want = (math.exp(-p.eigenvalue(0) * 0.5) * phi0(x)
                + math.exp(-p.eigenvalue(3) * 0.5) * phi3(x))
        assert heat_transform(p, 0.5, f, x) == pytest.approx(want, rel=1e-7, abs=1e-12)


def test_transform_rejects_fast_growth():
    f = ExactFunction(lambda y: 2.0 * np.asarray(y) ** 2)
    with pytest.raises(AdmissibilityError):
        heat_transform(SemigroupParams(0.0), 0.5, f, 1.0)


def test_operator_matches_transform():
    p = SemigroupParams(-0.5)
    f = eigenfunction_datum(p, 2)
    op = HeatOperator(p, 0.9, [0.05, 0.5], breakpoints=f.nodes)
    got = op.apply(f)
    want = np.exp(-p.eigenvalue(2) * np.array([0.05, 0.5])) * f(0.9)
    assert np.allclose(got, want, rtol=1e-9)


def test_envelope_regions():
    p, env = SemigroupParams(0.0), HeatBoundEnvelope()
    assert env.big_m == pytest.approx(4.0)
    assert heat_bound_envelope(p, env, 0.2, 1.0, 0.4)[1] is Region.GLOBAL
    assert heat_bound_envelope(p, env, 0.2, 1.0, 1.0)[1] is Region.LOCAL
    assert HeatBoundEnvelope.from_big_m(3.0).big_m == pytest.approx(3.0)
    with pytest.raises(DomainError):
        heat_bound_envelope(SemigroupParams(0.0, 1.0), env, 0.2, 1.0, 1.0)
    with pytest.raises(DomainError):
        HeatBoundEnvelope(1.0)


def test_envelope_ratio_finite():
    rep = heat_envelope_sweep(SemigroupParams(0.0), t_values=(0.05, 0.2, 1.0), n=20)
    assert math.isfinite(rep.fitted["C"]) and rep.fitted["C"] > 0


def test_heat_maximal():
    p = SemigroupParams(0.0)
    f = eigenfunction_datum(p)
    grid = np.geomspace(0.01, 0.5, 12)
    v = heat_maximal(p, 0.5, f, 1.0, t_grid=grid)
    assert v == pytest.approx(math.exp(-p.eigenvalue(0) * 0.01) * f(1.0), rel=1e-7)
    zero = TabulatedFunction(np.geomspace(0.01, 10, 5), np.zeros(5))
    assert heat_maximal(p, 0.5, zero, 1.0, t_grid=grid) == 0.0
    with pytest.raises(DomainError):
        heat_maximal(p, 0.5, f, 1.0, t_grid=[])
