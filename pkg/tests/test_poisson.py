import math

import numpy as np
import pytest

from laguerre_poisson import (
    AdmissibilityError,
    DomainError,
    ExactFunction,
    PhiWeight,
    PoissonEnvelope,
    SemigroupParams,
    SplitPoint,
    SystemKind,
    TabulatedFunction,
    eigenfunction_datum,
    log_phi_table,
    log_poisson_envelope,
    phi,
    poisson_envelope,
    poisson_kernel,
    poisson_split,
    poisson_sup,
    poisson_transform,
    poisson_two_sided_check,
    split_point,
    subordination_multiplier,
    subordination_multiplier_bessel,
)

# mpmath: direct u-integral of the eigen-series heat kernel, 30 digits
KERNEL_CASES = [
    ((0.0, 0.0, 0.5), (0.5, 1.0, 1.3), 0.36048354350851672941),
    ((-0.75, 1.0, 0.3), (1.0, 0.4, 2.2), 0.0022790384160292015701),
    ((1.5, 0.0, 2.0), (0.8, 1.5, 1.5), 0.69550964727781323969),
]
# mpmath besselk closed form
MULT_CASES = [
    (0.3, 0.7, 5.0, 0.1248999449447033737),
    (2.0, 0.1, 40.0, 0.91391428071578736986),
]


def test_phi_base_example():
    p = SemigroupParams(0.5, 0.0, 0.5)
    want = math.exp(-0.5) / (math.sqrt(2) * math.log(1 + math.e) ** 1.5)
    assert phi(SystemKind.BASE_PHI, p, 1.0) == pytest.approx(want, rel=1e-13)
    assert want == pytest.approx(0.2849, abs=1e-4)


def test_phi_psi_relation():
    p = SemigroupParams(0.3, 0.2, 1.0)
    y = np.geomspace(0.01, 10, 17)
    diff = log_phi_table(SystemKind.PSI, p, y) - log_phi_table(SystemKind.BASE_PHI, p, y)
    assert np.allclose(diff, (p.alpha + 0.5) * np.log(y), rtol=1e-12, atol=1e-13)


def test_phi_extreme_log_power():
    # generic mu near the extreme value: the extreme case carries one more log power
    alpha = 0.4
    ext = SemigroupParams.extreme(alpha)
    gen = SemigroupParams(alpha, ext.mu + 1e-6)
    y = np.geomspace(0.01, 20, 13)
    ratio = phi(SystemKind.BASE_PHI, ext, y) / phi(SystemKind.BASE_PHI, gen, y)
    assert np.allclose(ratio, np.log(y + math.e), rtol=1e-5)


def test_phi_domain():
    with pytest.raises(DomainError):
        phi(SystemKind.BASE_PHI, SemigroupParams(0.0), 0.0)
    w = PhiWeight(SystemKind.BASE_PHI, SemigroupParams(0.0))
    assert w(2.0) == pytest.approx(math.exp(w.log_value_at(2.0)))


def test_split_points():
    assert split_point(4.0) == 0.125
    assert split_point(0.5) == 0.75
    assert split_point(1.0) == 0.5
    assert SplitPoint.of(4.0).r0 == 0.125
    with pytest.raises(DomainError):
        split_point(0.0)


def test_multiplier_basics():
    assert subordination_multiplier(0.7, 0.0, 3.0) == 1.0
    for t, lam in ((0.1, 2.0), (1.3, 6.0), (4.0, 10.0)):
        assert subordination_multiplier(0.5, t, lam) == pytest.approx(math.exp(-t * math.sqrt(lam)),
                                                                     rel=1e-9)
    vals = [subordination_multiplier(1.3, t, 4.0) for t in (0.0, 0.1, 0.5, 1.0, 3.0)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    with pytest.raises(DomainError):
        subordination_multiplier(0.5, 1.0, 0.0)


@pytest.mark.parametrize("nu,t,lam,want", MULT_CASES)
def test_multiplier_pinned(nu, t, lam, want):
    assert subordination_multiplier(nu, t, lam) == pytest.approx(want, rel=1e-10)
    assert subordination_multiplier_bessel(nu, t, lam) == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("args,txy,want", KERNEL_CASES)
def test_kernel_pinned(args, txy, want):
    assert poisson_kernel(SemigroupParams(*args), *txy) == pytest.approx(want, rel=1e-9)


def test_kernel_symmetry_positivity():
    p = SemigroupParams(0.0, 0.5, 1.0)
    a, b = poisson_kernel(p, 0.7, 1.0, 2.0), poisson_kernel(p, 0.7, 2.0, 1.0)
    assert a > 0 and a == pytest.approx(b, rel=1e-9)
    with pytest.raises(DomainError):
        poisson_kernel(p, 0.0, 1.0, 1.0)


@pytest.mark.parametrize("n", range(5))
def test_eigen_relation(n):
    p = SemigroupParams(0.5, 0.25, 0.75)
    f = eigenfunction_datum(p, n)
    lam = float(p.eigenvalue(n))
    for t in (0.1, 1.0):
        for x in (0.5, 1.0, 2.0):
            want = subordination_multiplier(p.nu, t, lam) * f(x)
            got = poisson_transform(p, t, f, x)
            assert abs(got - want) <= 1e-5 * abs(want) + 1e-12


def test_small_t_concentration():
    p = SemigroupParams(0.0)
    mass = []
    for t in (0.4, 0.2, 0.1, 0.05):
        ys = np.linspace(0.8, 1.2, 801)
        k = poisson_kernel(p, t, 1.0, ys)
        mass.append(float(np.sum((k[1:] + k[:-1]) / 2 * np.diff(ys))))
    assert all(b > a for a, b in zip(mass, mass[1:]))
    assert mass[-1] > 0.8


def test_split_additivity():
    p = SemigroupParams(-0.5, 0.0, 1.0)
    g = np.geomspace(0.1, 5, 10)
    x, y = np.meshgrid(g, g)
    b, a = poisson_split(p, 0.6, x, y)
    k = poisson_kernel(p, 0.6, x, y)
    assert np.all(b >= 0) and np.all(a >= 0)
    assert np.allclose(b + a, k, rtol=2e-8)


def test_envelope_local_term_off():
    p, env = SemigroupParams(0.0), PoissonEnvelope(big_m=2.0)
    glo = (env.log_c2(p, 1.0) + math.log(phi(SystemKind.BASE_PHI, p, 3.0)))
    assert log_poisson_envelope(p, env, 0.5, 1.0, 3.0) == pytest.approx(glo, rel=1e-14)
    with pytest.raises(DomainError):
        PoissonEnvelope(big_m=1.0)


def test_envelope_sharpened_bookkeeping():
    p = SemigroupParams(0.2, 0.1, 0.5)
    std, sharp = PoissonEnvelope(), PoissonEnvelope(sharpened=True)
    t = 0.1
    x = np.geomspace(0.05, 5, 9)[:, None]
    y = np.geomspace(0.05, 8, 11)[None, :]
    # global constants differ by (t / <x>)^(2nu); the local term is shared
    factor = np.maximum(1.0, (t / np.minimum(x, 1.0)) ** (2 * p.nu))
    assert np.all(poisson_envelope(p, sharp, t, x, y) <= poisson_envelope(p, std, t, x, y) * factor * (1 + 1e-12))


def test_two_sided_example():
    rep = poisson_two_sided_check(SemigroupParams(0.0, 0.0, 0.5), 1.0, 1.0)
    assert rep.passed
    assert rep.fitted["c1"] > 0 and rep.fitted["extra_in_range"]


def test_sup_and_transform():
    p = SemigroupParams(0.0)
    f = eigenfunction_datum(p)
    grid = np.geomspace(0.01, 0.5, 8)
    got = poisson_sup(p, 0.5, f, 1.0, t_grid=grid)
    assert got == pytest.approx(subordination_multiplier(0.5, 0.01, p.lambda0) * f(1.0), rel=1e-6)
    zero = TabulatedFunction(np.geomspace(0.01, 10, 5), np.zeros(5))
    assert poisson_sup(p, 0.5, zero, 1.0, t_grid=grid) == 0.0
    with pytest.raises(DomainError):
        poisson_sup(p, 0.5, f, 1.0, t_grid=[0.7])


def test_rejects_non_admissible():
    p = SemigroupParams(0.0)
    f = ExactFunction(lambda y: np.asarray(y) ** 2, support=(1e-4, 60.0))   # ln f = y^2
    with pytest.raises(AdmissibilityError):
        poisson_transform(p, 0.5, f, 1.0)
    with pytest.raises(AdmissibilityError):
        poisson_sup(p, 0.5, f, 1.0, t_grid=[0.1])
