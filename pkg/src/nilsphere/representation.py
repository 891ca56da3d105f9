"""The Schroedinger-type representation Pi_{r, Lambda} of N_p on L^2(R^{p0}).

For n = exp(X + A) and f on R^{p0},

    (Pi(n) f)(y) = exp(i [<D2(Lambda), A> + r x_p
                          - sum_j (lambda_j/2) x_{2j} x_{2j-1} + sqrt(lambda_j) x_{2j} y_j])
                   * f(y_1 + sqrt(lambda_1) x_1, ..., y_{p0} + sqrt(lambda_{p0}) x_{2p0-1}).

The minus sign in front of the x-dependent phase is forced by the bracket
convention of ``lie`` ([e_1, e_2] = -J): with it, Pi is a homomorphism
*and* its central character is exp(i <D2(Lambda), A>), the same phase that
appears in Theta. The K-averaged diagonal matrix elements against the
Hermite vectors zeta_alpha, alpha in E_l, reproduce phi^{r, Lambda, l}.
"""
import itertools
from functools import lru_cache

import numpy as np

from .errors import BudgetError
from .lie import k_action_arrays
from .skew import LambdaSpec, orbit_profile
from .special import hermite_multi, hermite_poly_table

DEFAULT_NODES = 64
# largest tensor Gauss-Hermite grid (nodes ** p0) a matrix element may use
MAX_TENSOR_POINTS = 2 ** 24


@lru_cache(maxsize=None)
def gauss_hermite(n_nodes):
    """Nodes and weights for the weight exp(-t^2); read-only, cached."""
    t, w = np.polynomial.hermite.hermgauss(n_nodes)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def _as_lambda(lam):
    return lam if isinstance(lam, LambdaSpec) else LambdaSpec(tuple(lam))


def enumerate_El(l, profile):
    """All multi-indices alpha whose j-th block (size m_j) sums to l_j.

    Lexicographic order within each block, blocks combined as a Cartesian
    product.
    """
    l = tuple(int(v) for v in l)
    if len(l) != profile.p1:
        raise ValueError(f"need {profile.p1} entries in l, got {len(l)}")
    blocks = [sorted(_compositions(lj, mj), reverse=True) for lj, mj in zip(l, profile.m)]
    return [tuple(itertools.chain.from_iterable(combo)) for combo in itertools.product(*blocks)]


def _compositions(total, parts):
    if parts == 1:
        return [(total,)]
    return [(first,) + rest for first in range(total + 1) for rest in _compositions(total - first, parts - 1)]


def zeta_eval(alpha, y):
    """The Hermite vector zeta_alpha(y) = prod_i h_{alpha_i}(y_i)."""
    return hermite_multi(alpha, y)


def _phase_and_shift(lam, n, p0, r):
    lam = np.asarray(lam.lambdas[:p0], dtype=float)
    x = n.x
    sq = np.sqrt(lam)
    xo, xe = x[0:2 * p0:2], x[1:2 * p0:2]
    central = float(np.sum(lam * n.a[0:2 * p0:2, 1:2 * p0:2].diagonal())) if p0 else 0.0
    const = central + r * x[-1] - float(np.sum(0.5 * lam * xe * xo))
    return const, sq * xe, sq * xo


def pi_apply(r, lam, n, f):
    """Pi_{r, Lambda}(n) f, returned as a function of y with shape (..., p0)."""
    lam = _as_lambda(lam)
    p0 = orbit_profile(lam).p0
    if p0 == 0:
        raise ValueError("Pi_{r, Lambda} needs Lambda != 0")
    if len(lam) != n.p // 2:
        raise ValueError("Lambda does not match the dimension of n")
    const, freq, shift = _phase_and_shift(lam, n, p0, r)

    def g(y):
        y = np.asarray(y, dtype=float)
        return np.exp(1j * (const - y @ freq)) * f(y + shift)

    return g


def _check_budget(p0, n_nodes):
    if n_nodes ** p0 > MAX_TENSOR_POINTS:
        raise BudgetError(f"quadrature budget exceeded: {n_nodes}^{p0} nodes")


def _overlaps(k, s, b, n_nodes):
    """int exp(-i b y) h_k(y + s) h_k(y) dy for arrays s, b (Gauss-Hermite).

    The Gaussian factors of the two Hermite functions combine to
    exp(-(y + s/2)^2 - s^2/4), so nodes are centred at -s/2.
    """
    t, w = gauss_hermite(n_nodes)
    s = np.asarray(s, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    hp = hermite_poly_table(k, t + 0.5 * s)[k]
    hm = hermite_poly_table(k, t - 0.5 * s)[k]
    vals = np.sum(w * np.exp(-1j * b * t) * hp * hm, axis=-1)
    return vals * np.exp(-0.25 * s[..., 0] ** 2 + 0.5j * b[..., 0] * s[..., 0])


def matrix_element(r, lam, alpha, n, n_nodes=DEFAULT_NODES):
    """<Pi_{r, Lambda}(n) zeta_alpha, zeta_alpha> by Gauss-Hermite quadrature.

    The integrand is a product over coordinates, so the p0-dimensional tensor
    rule is evaluated as a product of one-dimensional rules on the same nodes.
    """
    lam = _as_lambda(lam)
    p0 = orbit_profile(lam).p0
    if p0 == 0:
        raise ValueError("Pi_{r, Lambda} needs Lambda != 0")
    if len(alpha) != p0:
        raise ValueError(f"alpha must have {p0} entries")
    _check_budget(p0, n_nodes)
    const, freq, shift = _phase_and_shift(lam, n, p0, r)
    out = np.exp(1j * const)
    for i, ai in enumerate(alpha):
        out *= _overlaps(int(ai), shift[i], freq[i], n_nodes)
    return complex(out)


def matrix_element_arrays(r, lam, alpha, x, a, n_nodes=DEFAULT_NODES):
    """Batched ``matrix_element`` over points ``x[N, p]``, ``a[N, p, p]``."""
    lam = _as_lambda(lam)
    p0 = orbit_profile(lam).p0
    _check_budget(p0, n_nodes)
    lv = np.asarray(lam.lambdas[:p0], dtype=float)
    sq = np.sqrt(lv)
    xo, xe = x[:, 0:2 * p0:2], x[:, 1:2 * p0:2]
    central = np.einsum("nii->n", a[:, 0:2 * p0:2, 1:2 * p0:2] * lv[None, None, :]) if p0 else 0.0
    const = central + r * x[:, -1] - np.sum(0.5 * lv * xe * xo, axis=1)
    out = np.exp(1j * const)
    for i, ai in enumerate(alpha):
        out = out * _overlaps(int(ai), sq[i] * xo[:, i], sq[i] * xe[:, i], n_nodes)
    return out


def phi_via_rep(idx, n, integrator, alpha=None, n_nodes=DEFAULT_NODES):
    """K-average of <Pi(k.n) zeta_alpha, zeta_alpha> for one alpha in E_l.

    Independent of which alpha in E_l is used; defaults to the first one.
    """
    if idx.is_bessel:
        raise ValueError("the representation route needs Lambda != 0")
    if idx.group_kind != "O":
        raise ValueError("the representation route is implemented for K = O_p")
    if integrator.p != idx.p or integrator.group_kind != "O":
        raise ValueError("integrator must average over O_p with matching p")
    if alpha is None:
        alpha = enumerate_El(idx.l, idx.profile)[0]
    alpha = tuple(alpha)
    if alpha not in enumerate_El(idx.l, idx.profile):
        raise ValueError(f"alpha={alpha} is not in E_l for l={idx.l}")

    def f(ks):
        kx, ka = k_action_arrays(ks, n.x[None, :], n.a[None, :, :])
        return matrix_element_arrays(idx.r, idx.lam, alpha, kx, ka, n_nodes)

    return integrator.average(f)


def sublap_eigenvalue(idx):
    """Eigenvalue of the sub-Laplacian on phi^{r, Lambda, l}: sum_j mu_j (2 l_j + m_j) + r^2."""
    prof = idx.profile
    return float(sum(mu * (2 * lj + mj) for mu, lj, mj in zip(prof.mu, idx.l, prof.m)) + idx.r ** 2)


__all__ = [
    "enumerate_El",
    "gauss_hermite",
    "matrix_element",
    "matrix_element_arrays",
    "phi_via_rep",
    "pi_apply",
    "sublap_eigenvalue",
    "zeta_eval",
]
