import numpy as np
import pytest

from nilsphere.haar import CircleIntegrator, MonteCarloIntegrator, Welford, make_integrator, sample_haar
from nilsphere.lie import GroupPoint, basis_z, k_action, z_inner
from nilsphere.skew import d2_matrix
from nilsphere.special import bessel_reduced, laguerre_norm
from nilsphere.spherical import (
    SphericalIndex, functional_equation_residual, heis_spherical_bessel, heis_spherical_laguerre,
    phi, phi_bessel, phi_values, theta, theta_arrays, theta_on_orbit,
)

from conftest import random_skew


def random_point(rng, p, scale=1.0):
    return GroupPoint(rng.uniform(-scale, scale, p), random_skew(rng, p, scale / 2))


def closed_form_p2(lam, l, n):
    a = z_inner(n.a, basis_z(0, 1, 2))
    return np.cos(lam * a) * laguerre_norm(l, 0, 0.5 * lam * (n.x @ n.x))


def test_index_grammar():
    SphericalIndex(3, 0.5, (1.0,), (2,))
    SphericalIndex(3, 0.5, (0.0,))
    with pytest.raises(ValueError):
        SphericalIndex(2, 0.5, (1.0,), (0,))  # r must vanish when 2 p0 = p
    with pytest.raises(ValueError):
        SphericalIndex(3, 0.0, (1.0,))  # l missing
    with pytest.raises(ValueError):
        SphericalIndex(3, 0.0, (0.0,), (1,))  # l given for Lambda = 0
    with pytest.raises(ValueError):
        SphericalIndex(4, 0.0, (2.0, 1.0), (1,))  # p1 = 2
    with pytest.raises(ValueError):
        SphericalIndex(3, 0.0, (1.0,), (0,), epsilon=1)  # epsilon only for SO
    with pytest.raises(ValueError):
        SphericalIndex(3, 0.0, (1.0,), (0,), group_kind="SO")
    with pytest.raises(ValueError):
        SphericalIndex(3, -1.0, (0.0,))
    with pytest.raises(ValueError):
        SphericalIndex(3, 0.0, (1.0, 0.0))
    idx = SphericalIndex(4, 0.0, (2.0, 2.0), [3])
    assert idx.l == (3,) and idx.profile.m == (2,)


def test_theta_examples(rng):
    idx = SphericalIndex(4, 0.0, (2.0, 1.0), (1, 2))
    assert theta(idx, GroupPoint.identity(4)) == 1.0
    lam, l = 1.7, 3
    idx = SphericalIndex(2, 0.0, (lam,), (l,))
    x = np.array([0.4, -0.9])
    a = 0.8
    n = GroupPoint(x, a * basis_z(0, 1, 2))
    # the central phase is <D2(lam), X_{1,2}> per unit of the X_{1,2}-coefficient
    lam_prime = z_inner(d2_matrix((lam,)), basis_z(0, 1, 2))
    assert lam_prime == -lam
    expected = np.exp(1j * lam_prime * a) * laguerre_norm(l, 0, lam * (x @ x) / 2)
    assert abs(theta(idx, n) - expected) <= 1e-15
    with pytest.raises(ValueError):
        theta(SphericalIndex(2, 0.0, (0.0,)), n)


def test_theta_epsilon_conjugates_last_block(rng):
    n = random_point(rng, 4)
    plus = SphericalIndex(4, 0.0, (2.0, 1.0), (1, 0), epsilon=1, group_kind="SO")
    minus = SphericalIndex(4, 0.0, (2.0, 1.0), (1, 0), epsilon=-1, group_kind="SO")
    tp, tm = theta(plus, n), theta(minus, n)
    assert np.isclose(abs(tp), abs(tm))
    last = z_inner(d2_matrix((0.0, 1.0)), n.a)
    assert np.isclose(tm, tp * np.exp(-2j * last))


def test_theta_modulus_and_orbit_kernel(rng):
    idx = SphericalIndex(5, 0.4, (2.0, 2.0), (2,))
    n = random_point(rng, 5, 2.0)
    ks = sample_haar("O", 5, rng, size=200)
    vals = theta_on_orbit(idx, n, ks)
    assert np.max(np.abs(vals)) <= 1.0 + 1e-12
    direct = np.array([theta(idx, k_action(k, n)) for k in ks])
    assert np.allclose(vals, direct, atol=1e-13)
    x = np.stack([k_action(k, n).x for k in ks])
    a = np.stack([k_action(k, n).a for k in ks])
    assert np.allclose(theta_arrays(idx, x, a), direct, atol=1e-13)


def test_phi_bessel_examples(rng):
    n = random_point(rng, 3)
    assert phi_bessel(1.3, GroupPoint.identity(3)) == 1.0
    assert phi_bessel(0.0, n) == 1.0
    for x in (0.2, 1.0, 3.7):
        assert abs(phi_bessel(1.1, GroupPoint.from_x([x])) - np.cos(1.1 * x)) <= 1e-14
    # independent of the central part
    m = GroupPoint(n.x, np.zeros((3, 3)))
    assert phi_bessel(0.8, n) == phi_bessel(0.8, m)


def test_phi_identity_exact(rng):
    integ = MonteCarloIntegrator("O", 3, 1000, rng=rng)
    est = phi(SphericalIndex(3, 0.6, (1.0,), (2,)), GroupPoint.identity(3), integ)
    assert est.value == 1.0 and est.std_error == 0.0
    est = phi(SphericalIndex(4, 0.0, (0.0, 0.0)), GroupPoint.identity(4))
    assert est.value == 1.0 and est.std_error == 0.0


def test_phi_p2_closed_form(rng):
    integ = CircleIntegrator("O")
    for lam in (0.5, 1.0, 3.0):
        for l in range(6):
            idx = SphericalIndex(2, 0.0, (lam,), (l,))
            for _ in range(10):
                n = random_point(rng, 2, 2.0)
                assert abs(phi(idx, n, integ).value - closed_form_p2(lam, l, n)) <= 1e-10


def test_phi_p3_against_independent_mc(rng):
    idx = SphericalIndex(3, 0.0, (1.0,), (0,))
    n = GroupPoint.from_x([1.0, 0.0, 0.0])
    est = phi(idx, n, MonteCarloIntegrator("O", 3, 40000, rng=np.random.default_rng(1)))
    # brute force on an independent stream: Theta(k.n) = exp(-|pr_1(k e_1)|^2 / 4)
    ks = sample_haar("O", 3, np.random.default_rng(2), size=40000)
    y = ks[:, :2, 0]
    ref = Welford().add_batch(np.exp(-0.25 * np.sum(y * y, axis=1))).estimate()
    assert abs(est.value - ref.value) <= 5 * np.hypot(est.std_error, ref.std_error)


def test_phi_rejects_mismatched_integrator(rng):
    idx = SphericalIndex(3, 0.0, (1.0,), (0,))
    with pytest.raises(ValueError):
        phi(idx, GroupPoint.identity(3), CircleIntegrator("O"))
    with pytest.raises(ValueError):
        phi(idx, GroupPoint.identity(3), MonteCarloIntegrator("SO", 3, 10, rng=rng))
    with pytest.raises(ValueError):
        phi(idx, GroupPoint.identity(3))


def test_k_invariance_exact_p2(rng):
    integ = CircleIntegrator("O")
    idx = SphericalIndex(2, 0.0, (1.3,), (2,))
    for _ in range(10):
        n = random_point(rng, 2)
        q = sample_haar("O", 2, rng)
        assert abs(phi(idx, n, integ).value - phi(idx, k_action(q, n), integ).value) <= 1e-12


def test_k_invariance_mc(rng):
    idx = SphericalIndex(3, 0.5, (1.2,), (1,))
    for _ in range(5):
        n = random_point(rng, 3)
        q = sample_haar("O", 3, rng)
        a = phi(idx, n, MonteCarloIntegrator("O", 3, 20000, rng=rng))
        b = phi(idx, k_action(q, n), MonteCarloIntegrator("O", 3, 20000, rng=rng))
        assert abs(a.value - b.value) <= 5 * np.hypot(a.std_error, b.std_error)


def test_hermitian_and_bounded(rng):
    idx = SphericalIndex(3, 0.5, (1.2,), (1,))
    integ = MonteCarloIntegrator("O", 3, 5000, rng=rng)
    for _ in range(20):
        n = random_point(rng, 3, 2.0)
        a = phi(idx, n, integ)
        b = phi(idx, n.inverse(), integ)
        assert abs(a.value) <= 1 + 5 * a.std_error
        # with shared samples the two estimates are exact conjugates of each other
        assert abs(a.value - np.conj(b.value)) <= 5 * np.hypot(a.std_error, b.std_error) + 1e-12


def test_so_odd_p_epsilon(rng):
    # p = 3, 2 p0 < p. For any reflection tau, phi^{-1} = phi^{+1} o tau. The
    # SO_3 elements that flip the lambda-block also flip e_3, so eps is
    # redundant exactly when r = 0 and a genuine label when r > 0.
    ks = sample_haar("SO", 3, rng, size=40000)
    tau = np.diag([1.0, -1.0, 1.0])
    for r in (0.0, 0.6):
        plus = SphericalIndex(3, r, (1.5,), (1,), epsilon=1, group_kind="SO")
        minus = SphericalIndex(3, r, (1.5,), (1,), epsilon=-1, group_kind="SO")
        z_scores = []
        for _ in range(5):
            n = random_point(rng, 3, 1.5)
            b = theta_on_orbit(minus, n, ks)
            d = Welford().add_batch(theta_on_orbit(plus, n, ks) - b).estimate()
            z_scores.append(abs(d.value) / d.std_error)
            e = Welford().add_batch(theta_on_orbit(plus, k_action(tau, n), ks) - b).estimate()
            assert abs(e.value) <= 5 * e.std_error
        if r == 0.0:
            assert max(z_scores) <= 5
        else:
            assert max(z_scores) > 10


def test_so_even_p_epsilon_distinct():
    integ = CircleIntegrator("SO")
    n = GroupPoint(np.array([0.3, 0.2]), 0.9 * basis_z(0, 1, 2))
    plus = phi(SphericalIndex(2, 0.0, (1.0,), (0,), epsilon=1, group_kind="SO"), n, integ).value
    minus = phi(SphericalIndex(2, 0.0, (1.0,), (0,), epsilon=-1, group_kind="SO"), n, integ).value
    assert abs(plus - np.conj(minus)) <= 1e-14
    assert abs(plus - minus) > 0.1


def test_phi_values_batch(rng):
    idx = SphericalIndex(2, 0.0, (0.8,), (1,))
    integ = make_integrator("O", 2)
    pts = [random_point(rng, 2) for _ in range(5)]
    vals, errs = phi_values(idx, np.stack([n.x for n in pts]), np.stack([n.a for n in pts]), integ)
    assert np.allclose(vals, [phi(idx, n, integ).value for n in pts])
    assert not errs.any()
    idx = SphericalIndex(3, 1.1, (0.0,))
    vals, _ = phi_values(idx, np.ones((2, 3)), np.zeros((2, 3, 3)))
    assert np.allclose(vals, bessel_reduced(0.5, 1.1 * np.sqrt(3)))


def test_heisenberg_central_values(rng):
    for lam in (-2.0, 0.7, 3.0):
        for t in (0.0, 0.4, -2.3):
            v = heis_spherical_laguerre(lam, (2, 1), (1, 2), np.zeros(3), t)
            assert v == np.exp(1j * lam * t)
    assert heis_spherical_bessel((1.5, 0.5), (2, 1), np.zeros(3), 4.0) == 1.0
    z = rng.normal(size=3) + 1j * rng.normal(size=3)
    assert heis_spherical_laguerre(1.2, (2, 1), (1, 2), z, 0.0).imag == 0.0
    with pytest.raises(ValueError):
        heis_spherical_laguerre(0.0, (1,), (1,), np.zeros(1), 0.0)
    with pytest.raises(ValueError):
        heis_spherical_bessel((0.0,), (1,), np.zeros(1), 0.0)


def test_p2_bridge_to_heisenberg(rng):
    integ = CircleIntegrator("O")
    for lam, l in ((0.5, 0), (1.0, 3), (3.0, 5)):
        idx = SphericalIndex(2, 0.0, (lam,), (l,))
        for _ in range(10):
            n = random_point(rng, 2, 2.0)
            a = z_inner(n.a, basis_z(0, 1, 2))
            w = heis_spherical_laguerre(lam, (l,), (1,), [n.x[0] + 1j * n.x[1]], a)
            assert abs(phi(idx, n, integ).value - w.real) <= 1e-10


def test_functional_equation_p2(rng):
    integ = CircleIntegrator("O")
    idx = SphericalIndex(2, 0.0, (1.4,), (2,))
    for _ in range(5):
        n1, n2 = random_point(rng, 2), random_point(rng, 2)
        assert functional_equation_residual(idx, n1, n2, integ) <= 1e-8
    assert functional_equation_residual(idx, n1, GroupPoint.identity(2), integ) <= 1e-14


def test_functional_equation_bessel_p3(rng):
    idx = SphericalIndex(3, 1.2, (0.0,))
    outer = MonteCarloIntegrator("O", 3, 20000, rng=rng)
    n1, n2 = random_point(rng, 3), random_point(rng, 3)
    res = functional_equation_residual(idx, n1, n2, outer=outer)
    kx = outer.samples @ n2.x
    vals = bessel_reduced(0.5, 1.2 * np.linalg.norm(n1.x + kx, axis=1))
    se = vals.std(ddof=1) / np.sqrt(len(vals))
    assert res <= 5 * se
