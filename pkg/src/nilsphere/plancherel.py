"""Polar measure on antisymmetric matrices and the radial Plancherel check.

Conventions
-----------
Haar measure on N_p is Lebesgue measure dX dA in exponential coordinates,
with respect to the orthonormal bases X_1..X_p of V and X_{i,j} of Z. Every
constant here is relative to that choice.

The polar constant ``c`` is defined by

    int_{A_p} g(A) dA = c int_K int_L g(k.D2(Lambda)) density(Lambda) dLambda dk,

with density prod_{j<k} (lambda_j^2 - lambda_k^2)^2 (times prod lambda_i^2 for
odd p). It is calibrated numerically by ``calibrate_c``.
"""
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import BudgetError
from .haar import MCEstimate, Welford
from .lie import z_from_coords, z_inner
from .representation import gauss_hermite
from .skew import d2_matrix
from .spherical import phi_bessel_arrays, theta_arrays


def c_stated(p):
    """The stated normalizing constant c(p) of the Plancherel measure."""
    pp = p // 2
    z = p * (p - 1) / 2
    if p % 2 == 0:
        return (2 * math.pi) ** (-z + pp)
    return 2 * (2 * math.pi) ** (-z + pp - 1)


def _density_poly(lam, p):
    lam = np.asarray(lam, dtype=float)
    sq = lam ** 2
    out = np.ones(lam.shape[:-1])
    n = lam.shape[-1]
    for j in range(n):
        for k in range(j + 1, n):
            out = out * (sq[..., j] - sq[..., k]) ** 2
    if p % 2 == 1:
        out = out * np.prod(sq, axis=-1)
    return out


def eta_density(lam, p):
    """Density of eta on the open chamber, without the constant c.

    Points with ties or zeros lie on the boundary and get density 0.
    """
    lam = np.asarray(lam, dtype=float)
    if lam.shape[-1] != p // 2:
        raise ValueError(f"p={p} needs {p // 2} lambdas")
    inside = np.all(lam > 0, axis=-1)
    if lam.shape[-1] > 1:
        inside &= np.all(np.diff(lam, axis=-1) < 0, axis=-1)
    out = np.where(inside, _density_poly(lam, p), 0.0)
    return out if out.ndim else float(out)


def eta_prime_density(lam, p):
    """Density of eta' = prod lambda_i d eta (without c)."""
    lam = np.asarray(lam, dtype=float)
    out = eta_density(lam, p) * np.prod(lam, axis=-1)
    return out if np.ndim(out) else float(out)


def lambda_grid(p, scale=1.0, n_nodes=24):
    """Quadrature for int_L F(Lambda) dLambda when F decays like a Gaussian.

    The integrands used here are even in every lambda_i and symmetric under
    permutations (those moves are O_p-conjugations of D2), so the chamber
    integral is 1 / (2^p' p'!) times the integral over R^p', done with a
    scaled Gauss-Hermite tensor rule. Returns (nodes[M, p'], weights[M]); the
    weights already carry the Gaussian compensation exp(t^2).
    """
    pp = p // 2
    t, w = gauss_hermite(n_nodes)
    h = math.sqrt(2.0) * scale
    grids = np.meshgrid(*([t] * pp), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1) * h
    wts = np.ones(nodes.shape[0])
    for g in np.meshgrid(*([w * np.exp(t ** 2)] * pp), indexing="ij"):
        wts = wts * g.ravel() * h
    return nodes, wts / (2 ** pp * math.factorial(pp))


def z_grid(p, scale=1.0, n_nodes=24):
    """Scaled Gauss-Hermite tensor rule on Z = A_p (Lebesgue measure)."""
    z = p * (p - 1) // 2
    t, w = gauss_hermite(n_nodes)
    h = math.sqrt(2.0) * scale
    grids = np.meshgrid(*([t] * z), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1) * h
    wts = np.ones(nodes.shape[0])
    for g in np.meshgrid(*([w * np.exp(t ** 2)] * z), indexing="ij"):
        wts = wts * g.ravel() * h
    return nodes, wts


def polar_lhs(g, p, scale=1.0, method="quad", rng=None, n_samples=0, n_nodes=24, spread=1.25):
    """int_{A_p} g(A) dA by tensor Gauss-Hermite or importance-sampled MC.

    The MC proposal is an isotropic Gaussian of standard deviation
    ``spread * scale`` in the orthonormal coordinates of Z.
    """
    z = p * (p - 1) // 2
    if method == "quad":
        if n_nodes ** z > 2 ** 22:
            raise BudgetError(f"{n_nodes}^{z} quadrature nodes is over budget")
        nodes, wts = z_grid(p, scale, n_nodes)
        vals = np.asarray(g(z_from_coords(nodes, p)))
        return MCEstimate(complex(np.dot(wts, vals)), 0.0, wts.size)
    if method != "mc":
        raise ValueError(f"unknown method {method!r}")
    if rng is None or n_samples < 2:
        raise ValueError("MC needs an rng and at least 2 samples")
    sd = spread * scale
    acc = Welford()
    chunk = 1 << 17
    left = n_samples
    while left > 0:
        m = min(chunk, left)
        c = rng.standard_normal((m, z)) * sd
        logq = -0.5 * np.sum(c * c, axis=1) / sd ** 2 - 0.5 * z * math.log(2 * math.pi * sd ** 2)
        acc.add_batch(np.asarray(g(z_from_coords(c, p))) * np.exp(-logq))
        left -= m
    return acc.estimate()


def polar_rhs(g, p, scale=1.0, n_nodes=24, k_samples=None):
    """int_K int_L g(k.D2(Lambda)) density dLambda dk, without the constant c.

    ``k_samples=None`` assumes g is K-invariant and skips the K-average.
    """
    nodes, wts = lambda_grid(p, scale, n_nodes)
    d2 = np.stack([d2_matrix(lam, p) for lam in nodes])
    wd = wts * _density_poly(nodes, p)
    if k_samples is None:
        return MCEstimate(complex(np.dot(wd, np.asarray(g(d2)))), 0.0, 0)
    acc = Welford()
    per_k = []
    for k in k_samples:
        per_k.append(np.dot(wd, np.asarray(g(k @ d2 @ k.T))))
    acc.add_batch(per_k)
    return acc.estimate()


def gaussian_z(scale):
    """g(A) = exp(-|A|^2 / (2 scale^2)), |A| the Z-norm."""
    def g(a):
        return np.exp(-0.5 * z_inner(a, a) / scale ** 2)
    return g


def reference_c(p, n_nodes=24):
    """c from the closed form int exp(-|A|^2 / 2) dA = (2 pi)^(z/2).

    Deterministic; the Lambda-side integrand is a polynomial times a Gaussian,
    which the Gauss-Hermite rule integrates exactly for enough nodes.
    """
    z = p * (p - 1) // 2
    rhs = polar_rhs(gaussian_z(1.0), p, 1.0, n_nodes=n_nodes).value.real
    return (2 * math.pi) ** (z / 2) / rhs


@dataclass
class Calibration:
    c: float
    std_error: float
    per_width: list = field(default_factory=list)

    @property
    def rel_se(self):
        return self.std_error / abs(self.c)


def calibrate_c(p, rng=None, n_samples=0, widths=(0.8, 1.0, 1.25), method=None, n_nodes=24, max_rel_se=0.05):
    """Least-squares fit of the polar constant c over radial Gaussians.

    ``method`` defaults to exact quadrature when dim Z <= 1 and to importance
    sampling otherwise; ``n_samples`` is split evenly across the widths.
    """
    z = p * (p - 1) // 2
    if p < 2:
        raise ValueError("the polar decomposition needs p >= 2")
    if method is None:
        method = "quad" if z <= 1 else "mc"
    per = max(2, n_samples // len(widths)) if method == "mc" else 0
    rows = []
    for s in widths:
        g = gaussian_z(s)
        lhs = polar_lhs(g, p, s, method=method, rng=rng, n_samples=per, n_nodes=n_nodes)
        rhs = polar_rhs(g, p, s, n_nodes=n_nodes)
        rows.append((s, lhs.value.real, lhs.std_error, rhs.value.real))
    L = np.array([r[1] for r in rows])
    se = np.array([r[2] for r in rows])
    R = np.array([r[3] for r in rows])
    if np.all(se > 0):
        wt = 1.0 / se ** 2
        c = float(np.sum(wt * L * R) / np.sum(wt * R * R))
        c_se = float(1.0 / np.sqrt(np.sum(wt * R * R)))
    else:
        c = float(np.dot(L, R) / np.dot(R, R))
        c_se = float(np.sqrt(np.sum((se * R) ** 2)) / np.dot(R, R))
    out = Calibration(c, c_se, [dict(width=s, c=l / r, std_error=e / r) for s, l, e, r in rows])
    if out.rel_se > max_rel_se:
        raise BudgetError(f"relative SE {out.rel_se:.3g} exceeds {max_rel_se}")
    return out


def polar_identity_check(g, p, calibration, scale=1.0, method="mc", rng=None, n_samples=0,
                         n_nodes=24, k_samples=None):
    """Both sides of the polar identity for a held-out g.

    Returns (lhs, rhs, ratio, ratio_se); ratio_se combines the MC errors of
    both sides and of the calibrated c.
    """
    lhs = polar_lhs(g, p, scale, method=method, rng=rng, n_samples=n_samples, n_nodes=n_nodes)
    rhs0 = polar_rhs(g, p, scale, n_nodes=n_nodes, k_samples=k_samples)
    rhs = calibration.c * rhs0.value.real
    ratio = lhs.value.real / rhs
    rel = np.sqrt((lhs.std_error / lhs.value.real) ** 2 + (rhs0.std_error / rhs0.value.real) ** 2
                  + calibration.rel_se ** 2)
    return lhs.value.real, rhs, ratio, float(abs(ratio) * rel)


@dataclass(frozen=True)
class GroupGrid:
    """Scaled Gauss-Hermite tensor grid on N_p (coordinates X then Z)."""

    p: int
    n_nodes: int = 32
    x_scale: float = 1.0
    a_scale: float = 1.0
    max_points: int = 2 ** 24

    @property
    def dim(self):
        return self.p + self.p * (self.p - 1) // 2

    def axes(self):
        t, w = gauss_hermite(self.n_nodes)
        axes = []
        for d in range(self.dim):
            h = math.sqrt(2.0) * (self.x_scale if d < self.p else self.a_scale)
            axes.append((t * h, w * np.exp(t ** 2) * h))
        return axes

    def chunks(self, chunk=1 << 20):
        """Yield (x[N, p], a[N, p, p], weights[N]) over the whole grid."""
        if self.n_nodes ** self.dim > self.max_points:
            raise BudgetError(f"{self.n_nodes}^{self.dim} grid points exceed the budget")
        axes = self.axes()
        shape = (self.n_nodes,) * self.dim
        total = self.n_nodes ** self.dim
        for start in range(0, total, chunk):
            flat = np.arange(start, min(total, start + chunk))
            idx = np.unravel_index(flat, shape)
            coords = np.stack([axes[d][0][idx[d]] for d in range(self.dim)], axis=-1)
            wts = np.ones(flat.size)
            for d in range(self.dim):
                wts = wts * axes[d][1][idx[d]]
            yield coords[:, :self.p], z_from_coords(coords[:, self.p:], self.p), wts


def spherical_coefficient(psi, idx, grid):
    """<psi, phi^{r, Lambda, l}> = int_N psi(n) conj(phi(n)) dn.

    ``psi`` must be K-invariant; then the K-average inside phi can be moved
    onto psi, which leaves psi unchanged, so the integral is taken against
    Theta directly (or the closed-form Bessel family when Lambda = 0).
    """
    if grid.p != idx.p:
        raise ValueError("grid and index have different p")
    total = 0j
    for x, a, w in grid.chunks():
        f = phi_bessel_arrays(idx.r, x) if idx.is_bessel else theta_arrays(idx, x, a)
        total += np.sum(w * np.asarray(psi(x, a)) * np.conj(f))
    return complex(total)


def norm_squared(psi, grid):
    """||psi||^2 in L^2(N) on the given grid."""
    return float(sum(np.sum(w * np.abs(np.asarray(psi(x, a))) ** 2) for x, a, w in grid.chunks()))


@dataclass(frozen=True)
class RadialMeasure:
    """The radial Plancherel measure c(p) eta' (x) counting (x) tau, discretized.

    ``lambda_max`` bounds the Gauss-Legendre Lambda-integration; the
    integrand is bounded by int |psi-hat(., lambda)|^2, so for psi with
    Gaussian decay of width ``a_scale`` in the centre the neglected tail is
    below exp(-(lambda_max * a_scale)^2).
    """

    p: int
    c_polar: float
    c_p: float
    lambda_max: float = 7.0
    lambda_nodes: int = 32
    lambda_rtol: float = 1e-5
    max_lambda_nodes: int = 512
    l_rtol: float = 1e-8
    l_max: int = 2000000
    r_grid: tuple | None = None

    def __post_init__(self):
        if self.c_polar <= 0:
            raise ValueError("c_polar must be positive")
        if (self.p % 2 == 1) != (self.r_grid is not None):
            raise ValueError("an r-grid is required exactly when p is odd")

    @classmethod
    def for_p(cls, p, c_polar=None, **kw):
        if c_polar is None:
            if p != 2:
                raise ValueError("pass a calibrated c_polar for p != 2")
            c_polar = calibrate_c(2).c
        return cls(p=p, c_polar=c_polar, c_p=c_stated(p), **kw)


@dataclass(frozen=True)
class PolarGrid:
    """Product rule for O_2-invariant functions on N_2.

    Gauss-Legendre in r on [0, r_factor * x_scale] with weight 2 pi r, and
    scaled Gauss-Hermite in the central coordinate.
    """

    x_scale: float = 1.0
    a_scale: float = 1.0
    n_r: int = 400
    n_a: int = 64
    r_factor: float = 12.0

    p = 2

    def radial(self):
        t, w = np.polynomial.legendre.leggauss(self.n_r)
        rmax = self.r_factor * self.x_scale
        r = 0.5 * rmax * (t + 1.0)
        return r, 0.5 * rmax * w * 2.0 * np.pi * r

    def central(self):
        t, w = gauss_hermite(self.n_a)
        h = math.sqrt(2.0) * self.a_scale
        return t * h, w * np.exp(t ** 2) * h

    def scaled(self, s):
        """The grid matched to psi o delta_s."""
        return PolarGrid(self.x_scale / s, self.a_scale / s ** 2, self.n_r, self.n_a, self.r_factor)

    def values(self, psi):
        """psi on the (r, a) grid, with the point X = (r, 0)."""
        r, _ = self.radial()
        av, _ = self.central()
        R, A = np.meshgrid(r, av, indexing="ij")
        x = np.stack([R.ravel(), np.zeros(R.size)], axis=-1)
        vals = np.asarray(psi(x, z_from_coords(A.ravel()[:, None], 2)))
        return vals.reshape(R.shape)


def _check_invariant(psi, grid, rng_seed=0):
    rng = np.random.default_rng(rng_seed)
    r = rng.uniform(0.1, 2.0, 8) * grid.x_scale
    th = rng.uniform(0, 2 * np.pi, 8)
    a = z_from_coords(rng.normal(0, grid.a_scale, (8, 1)), 2)
    v0 = np.asarray(psi(np.stack([r, np.zeros(8)], axis=-1), a))
    v1 = np.asarray(psi(np.stack([r * np.cos(th), r * np.sin(th)], axis=-1), a))
    v2 = np.asarray(psi(np.stack([r, np.zeros(8)], axis=-1), -a))
    scale = max(np.max(np.abs(v0)), 1e-300)
    if np.max(np.abs(v1 - v0)) > 1e-10 * scale or np.max(np.abs(v2 - v0)) > 1e-10 * scale:
        raise ValueError("psi must be O_2-invariant")
    if np.iscomplexobj(v0) and np.max(np.abs(v0.imag)) > 1e-12 * scale:
        raise ValueError("psi must be real-valued")


def _check_decay(psi, grid):
    far = np.array([[grid.r_factor * grid.x_scale, 0.0]])
    zero_a = np.zeros((1, 2, 2))
    big_a = z_from_coords(np.array([[8.0 * grid.a_scale]]), 2)
    v0 = abs(np.asarray(psi(np.zeros((1, 2)), zero_a)).ravel()[0])
    vf = abs(np.asarray(psi(far, zero_a)).ravel()[0])
    va = abs(np.asarray(psi(np.zeros((1, 2)), big_a)).ravel()[0])
    if v0 == 0.0 or vf > 1e-8 * v0 or va > 1e-8 * v0:
        raise ValueError("psi does not decay on the scale of the grid")


def polar_norm_squared(psi, grid):
    """||psi||^2 for O_2-invariant psi on N_2."""
    _, wr = grid.radial()
    _, wa = grid.central()
    return float(wr @ (np.abs(grid.values(psi)) ** 2) @ wa)


def laguerre_energy(psi, grid, lams, rtol=1e-8, l_max=2000000):
    """sum_l |<psi, phi^{0, (lam), l}>|^2 for each lam (p = 2, O_2-invariant psi).

    Invariance lets phi be replaced by Theta, whose central factor
    exp(-i lam a) becomes cos(lam a) because psi is even in a.
    """
    lams = np.asarray(lams, dtype=float)
    r, wr = grid.radial()
    av, wa = grid.central()
    vals = np.real(grid.values(psi))
    m = (vals @ (np.cos(np.outer(av, lams)) * wa[:, None])) * wr[:, None]
    out = np.empty(lams.size)
    for i, lam in enumerate(lams):
        mom, ok = kernels.laguerre_moments(0.0, 0.5 * lam * r * r, m[:, i], rtol, l_max)
        if not ok:
            raise BudgetError(f"l-sum did not converge within {l_max} terms at lambda={lam}")
        out[i] = float(np.sum(mom ** 2))
    return out


@dataclass
class PlancherelResult:
    lhs: float
    rhs: float
    ratio: float | None
    c_p: float
    c_p_measured: float | None
    lambda_nodes: int
    details: dict = field(default_factory=dict)

    @property
    def agrees_with_c_p(self):
        return self.ratio is not None and abs(self.ratio - 1.0) < 0.01


def radial_plancherel_check(psi, measure, grid=None):
    """Compare ||psi||^2 with c(p) sum_l int |<psi, phi^{0,Lambda,l}>|^2 d eta'(Lambda).

    Implemented for p = 2, where tau is the Dirac mass at r = 0, and for
    O_2-invariant real psi. Returns a ``PlancherelResult``; ``c_p_measured``
    is the value of c(p) that would make the two sides equal.
    """
    if measure.p != 2:
        raise ValueError("the radial Plancherel check is implemented for p = 2")
    grid = grid or PolarGrid()
    if not np.any(grid.values(psi)):
        return PlancherelResult(0.0, 0.0, None, measure.c_p, None, 0)
    _check_decay(psi, grid)
    _check_invariant(psi, grid)
    lhs = polar_norm_squared(psi, grid)

    def integral(n):
        t, w = np.polynomial.legendre.leggauss(n)
        lam = 0.5 * measure.lambda_max * (t + 1.0)
        wl = 0.5 * measure.lambda_max * w
        energy = laguerre_energy(psi, grid, lam, measure.l_rtol, measure.l_max)
        # d eta'(lambda) = c lambda d lambda for p = 2
        return float(np.sum(wl * lam * energy)) * measure.c_polar

    n = measure.lambda_nodes
    prev = integral(n)
    while True:
        if 2 * n > measure.max_lambda_nodes:
            raise BudgetError("Lambda-integration did not converge")
        n *= 2
        cur = integral(n)
        if abs(cur - prev) <= measure.lambda_rtol * abs(cur):
            break
        prev = cur
    rhs = measure.c_p * cur
    ratio = rhs / lhs
    return PlancherelResult(lhs, rhs, ratio, measure.c_p, measure.c_p / ratio, n,
                            details=dict(lambda_integral=cur, c_polar=measure.c_polar))


def dilation_check(psi, s, measure, grid=None):
    """Both sides for psi and for psi o delta_s, against s^-(p + 2z).

    Returns (lhs_ratio, rhs_ratio, expected).
    """
    grid = grid or PolarGrid()
    p = measure.p
    z = p * (p - 1) // 2
    base = radial_plancherel_check(psi, measure, grid)
    m2 = replace(measure, lambda_max=measure.lambda_max * s ** 2)
    scaled = radial_plancherel_check(dilate(psi, s), m2, grid.scaled(s))
    return scaled.lhs / base.lhs, scaled.rhs / base.rhs, float(s) ** (-(p + 2 * z))


def dilate(psi, s):
    """psi composed with the dilation (X, A) -> (s X, s^2 A)."""
    def g(x, a):
        return psi(s * np.asarray(x), s * s * np.asarray(a))
    return g


def radial_gaussian(x_width=1.0, a_width=1.0):
    """psi(exp(X + A)) = exp(-(|X|^2 / x_width^2 + |A|^2 / a_width^2) / 2)."""
    def psi(x, a):
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * (np.sum(x * x, axis=-1) / x_width ** 2 + z_inner(a, a) / a_width ** 2))
    return psi


__all__ = [
    "BudgetError",
    "Calibration",
    "GroupGrid",
    "PlancherelResult",
    "PolarGrid",
    "RadialMeasure",
    "c_stated",
    "calibrate_c",
    "dilate",
    "dilation_check",
    "eta_density",
    "eta_prime_density",
    "gaussian_z",
    "lambda_grid",
    "laguerre_energy",
    "norm_squared",
    "polar_identity_check",
    "polar_lhs",
    "polar_norm_squared",
    "polar_rhs",
    "radial_gaussian",
    "radial_plancherel_check",
    "reference_c",
    "spherical_coefficient",
]
