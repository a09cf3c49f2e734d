import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import ive

from laguerre_poisson import (
    AngleBracket,
    DomainError,
    RangeError,
    SemigroupParams,
    bI,
    bessel_i_scaled,
    eigenfunction_phi,
    eigenfunctions,
    laguerre_normalized,
    log_bessel_i_scaled,
    log_gamma,
)

# 40-digit values computed once with mpmath and frozen here
LOG_GAMMA_7_3 = 7.1478925230222486921
LOG_GAMMA_0_01 = 4.5994798780420217016
IVE_CASES = [
    (0.7, 12.0, 0.11396696295447006747),
    (-0.75, 0.3, 0.92472441370232921667),
    (1.5, 50.0, 0.055290579187680116121),
    (0.0, 1000.0, 0.012617240455891256586),
    (-0.5, 2.0, 0.28726153811240115694),
    (3.25, 0.01, 3.9720540369714435629e-9),
]
LAGUERRE_CASES = [
    (0.5, 10, 3.2, -0.73112402362994706745),
    (-0.75, 40, 20.0, 5698.810032006531512),
    (2.0, 5, 0.1, 2.7267761365108685626),
]
PHI_7_AT_1_4 = 0.4842077194577730615   # alpha = 0.3


def test_log_gamma_small_cases():
    assert log_gamma(1.0) == 0.0
    assert log_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-15)


def test_log_gamma_pinned():
    assert log_gamma(7.3) == pytest.approx(LOG_GAMMA_7_3, rel=1e-14)
    assert log_gamma(0.01) == pytest.approx(LOG_GAMMA_0_01, rel=1e-14)


@pytest.mark.parametrize("x", [0.0, -1.0, float("nan")])
def test_log_gamma_domain(x):
    with pytest.raises(DomainError):
        log_gamma(x)


def test_bessel_at_zero():
    assert bessel_i_scaled(0, 0) == 1.0


def test_bessel_half_integer_closed_form():
    want = math.sqrt(2 / math.pi) * math.exp(-1) * math.cosh(1)
    assert bessel_i_scaled(-0.5, 1.0) == pytest.approx(want, rel=1e-13)
    assert want == pytest.approx(0.45300, abs=1e-4)   # the quoted figure is rounded


@pytest.mark.parametrize("alpha,z,want", IVE_CASES)
def test_bessel_pinned(alpha, z, want):
    assert bessel_i_scaled(alpha, z) == pytest.approx(want, rel=1e-12)


def test_bessel_matches_scipy_across_crossover():
    z = np.geomspace(1e-3, 1e4, 400)
    for a in (-0.9, -0.25, 0.0, 1.3, 7.5):
        assert np.allclose(bessel_i_scaled(a, z), ive(a, z), rtol=1e-11, atol=0)


def test_log_bessel_no_overflow():
    v = log_bessel_i_scaled(0.5, np.array([1e300]))
    assert np.isfinite(v).all()


def test_bessel_domain():
    with pytest.raises(DomainError):
        bessel_i_scaled(0.5, -1.0)
    with pytest.raises(DomainError):
        bessel_i_scaled(-1.5, 1.0)


def test_bI_limits_and_closed_form():
    assert bI(-0.5, 0.0) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-15)
    assert bI(0.0, 0.0) == 0.0
    i_half = math.sqrt(2 / (3 * math.pi)) * math.sinh(3)
    assert bI(0.5, 3.0) == pytest.approx(math.sqrt(3) * math.exp(-3) * i_half, rel=1e-13)
    with pytest.raises(RangeError):
        bI(-0.75, 0.0)


def test_bI_comparable_to_bracket():
    z = np.geomspace(1e-6, 1e6, 200)
    for a in (-0.75, 0.0, 2.0):
        r = bI(a, z) / np.minimum(z, 1.0) ** (a + 0.5)
        assert r.min() > 0.05 and r.max() < 20


def test_angle_bracket():
    assert AngleBracket.of(0.3).value == 0.3
    assert AngleBracket.of(7.0).value == 1.0
    with pytest.raises(DomainError):
        AngleBracket.of(0.0)


def test_laguerre_degree_zero_and_one():
    for a in (-0.5, 0.0, 2.5):
        v = laguerre_normalized(a, 0, np.array([0.0, 1.0, 9.0]))
        assert np.allclose(v[0], 1 / math.sqrt(math.gamma(a + 1)), rtol=1e-14)
    assert np.allclose(laguerre_normalized(0.0, 1, 0.0), [1.0, 1.0])


@pytest.mark.parametrize("alpha,n,x,want", LAGUERRE_CASES)
def test_laguerre_pinned(alpha, n, x, want):
    assert laguerre_normalized(alpha, n, x)[n] == pytest.approx(want, rel=1e-12)


def test_laguerre_gram_matrix():
    a, n = 1.5, 5
    gram = np.empty((n + 1, n + 1))
    for i in range(n + 1):
        for j in range(i, n + 1):
            def g(x):
                v = laguerre_normalized(a, n, x)
                return v[i] * v[j] * x ** a * math.exp(-x)
            gram[i, j] = gram[j, i] = quad(g, 0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    assert np.allclose(gram, np.eye(n + 1), atol=1e-8)


def test_laguerre_large_degree_finite():
    v = laguerre_normalized(0.0, 2000, np.array([1e3]))
    assert np.isfinite(v).all()


def test_laguerre_domain():
    with pytest.raises(DomainError):
        laguerre_normalized(0.0, -1, 1.0)


def test_phi_values():
    assert eigenfunction_phi(SemigroupParams(0.0), 0, 1.0) == pytest.approx(
        math.sqrt(2) * math.exp(-0.5), rel=1e-15)
    assert eigenfunction_phi(SemigroupParams(0.3), 7, 1.4) == pytest.approx(PHI_7_AT_1_4, rel=1e-12)


@pytest.mark.parametrize("alpha", [-0.75, 0.0, 1.5])
def test_phi_orthonormal(alpha):
    p = SemigroupParams(alpha)

    def prod(i, j):
        def g(y):
            v = eigenfunctions(alpha, 1, y)
            return v[i] * v[j]
        # graded split at 1 handles the y^(2 alpha + 1) endpoint behaviour
        return sum(quad(g, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
                   for a, b in ((0, 1), (1, np.inf)))
    assert prod(0, 0) == pytest.approx(1.0, abs=1e-9)
    assert abs(prod(0, 1)) < 1e-9
    assert eigenfunction_phi(p, 1, 0.5) == pytest.approx(eigenfunctions(alpha, 1, 0.5)[1])


def test_phi_domain():
    with pytest.raises(DomainError):
        eigenfunction_phi(SemigroupParams(-0.75), 0, 0.0)
    with pytest.raises(DomainError):
        eigenfunction_phi(SemigroupParams(0.0), -1, 1.0)


@pytest.mark.parametrize("kw", [dict(alpha=-1.0), dict(alpha=0.0, nu=0.0),
                                dict(alpha=0.0, mu=-1.5)])
def test_params_validation(kw):
    with pytest.raises(DomainError):
        SemigroupParams(**kw)


def test_params_extreme_case():
    p = SemigroupParams.extreme(0.5)
    assert p.extreme_case and p.lambda0 == 0.0
    assert SemigroupParams(0.0, 1.0).eigenvalue(2) == pytest.approx(12.0)
    assert SemigroupParams(0.0, 1.0).m == pytest.approx(1.0)
