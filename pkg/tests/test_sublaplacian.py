import numpy as np
import pytest

from nilsphere.haar import CircleIntegrator
from nilsphere.lie import GroupPoint
from nilsphere.representation import sublap_eigenvalue
from nilsphere.special import bessel_reduced, laguerre_norm
from nilsphere.spherical import SphericalIndex, phi_values
from nilsphere.sublaplacian import left_translate, observed_order, second_derivative, sublap_apply

from conftest import random_skew


def random_point(rng, p, scale=1.0):
    return GroupPoint(rng.uniform(-scale, scale, p), random_skew(rng, p, scale / 2))


def closed_p2(lam, l):
    def f(x, a):
        return np.cos(lam * a[..., 1, 0]) * laguerre_norm(l, 0, 0.5 * lam * np.sum(x * x, axis=-1))
    return f


def bessel_fn(r, p):
    def f(x, a):
        return bessel_reduced((p - 2) / 2, r * np.linalg.norm(x, axis=-1))
    return f


def test_trivial_examples(rng):
    n = random_point(rng, 3)
    one = lambda x, a: np.ones(len(x))
    assert second_derivative(one, n, 0) == 0.0
    lin = lambda x, a: x[:, 1]
    assert abs(second_derivative(lin, n, 1)) <= 1e-10
    sq = lambda x, a: x[:, 2] ** 2
    assert abs(second_derivative(sq, n, 2) - 2) <= 1e-10
    norm2 = lambda x, a: np.sum(x * x, axis=1)
    for p in (1, 2, 4):
        m = random_point(rng, p)
        assert abs(sublap_apply(norm2, m) + 2 * p) <= 1e-9


def test_step_validation(rng):
    with pytest.raises(ValueError):
        second_derivative(lambda x, a: x[:, 0], random_point(rng, 2), 0, h=0.0)


def test_bessel_ratio(rng):
    f = bessel_fn(1.3, 3)
    for _ in range(5):
        n = random_point(rng, 3)
        assert abs(sublap_apply(f, n, 1e-2) / f(n.x[None], n.a[None])[0] - 1.69) <= 1e-6


def test_p2_closed_form_ratio(rng):
    lam, l = 1.5, 2
    f = closed_p2(lam, l)
    tested = 0
    while tested < 5:
        n = random_point(rng, 2)
        v = f(n.x[None], n.a[None])[0]
        if abs(v) < 0.1:
            continue
        assert abs(sublap_apply(f, n, 1e-2) / v - lam * (2 * l + 1)) <= 1e-5
        tested += 1


def eigen_cases():
    yield SphericalIndex(2, 0.0, (0.7,), (1,)), closed_p2(0.7, 1)
    yield SphericalIndex(2, 0.0, (2.0,), (3,)), closed_p2(2.0, 3)
    for p in (2, 3, 4, 5):
        yield SphericalIndex(p, 1.1, (0.0,) * (p // 2)), bessel_fn(1.1, p)


@pytest.mark.parametrize("case", list(range(6)))
def test_eigenfunction_property(case, rng):
    idx, f = list(eigen_cases())[case]
    eig = sublap_eigenvalue(idx)
    done = 0
    while done < 20:
        n = random_point(rng, idx.p, 1.2)
        v = f(n.x[None], n.a[None])[0]
        if abs(v) <= 0.1:
            continue
        assert abs(sublap_apply(f, n) - eig * v) <= 1e-4 * abs(eig * v)
        done += 1
    steps = np.array([1e-1, 3e-2, 1e-2])
    errs = [abs(-sum(second_derivative(f, n, i, h, richardson=False) for i in range(idx.p)) - eig * v)
            for h in steps]
    if min(errs) > 1e-11:
        assert abs(observed_order(errs, steps) - 4) <= 0.5


def test_integrator_phi_is_eigenfunction(rng):
    idx = SphericalIndex(2, 0.0, (1.1,), (2,))
    integ = CircleIntegrator("O")
    f = lambda x, a: phi_values(idx, x, a, integ)[0]
    n = GroupPoint(np.array([0.2, 0.3]), np.zeros((2, 2)))
    v = f(n.x[None], n.a[None])[0]
    assert abs(sublap_apply(f, n) - sublap_eigenvalue(idx) * v) <= 1e-6


def test_left_invariance(rng):
    f = lambda x, a: np.sin(x[:, 0] + 0.3 * x[:, 1] ** 2) * np.cos(a[:, 1, 0] - 0.5 * a[:, 2, 0])
    for _ in range(5):
        m, n = random_point(rng, 3), random_point(rng, 3)
        lhs = sublap_apply(left_translate(f, m), n)
        rhs = sublap_apply(f, m * n)
        assert abs(lhs - rhs) <= 1e-7


def test_observed_order():
    steps = np.array([0.1, 0.05, 0.025])
    assert abs(observed_order(3 * steps ** 4, steps) - 4) <= 1e-12
