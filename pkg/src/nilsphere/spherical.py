"""Bounded spherical functions of (N_p, O_p) and (N_p, SO_p).

For Lambda != 0 the spherical function is the K-average of the explicit
integrand

    Theta(exp(X + A)) = exp(i r x_p) exp(i <D2^eps(Lambda), A>)
                        * prod_j laguerre_norm(l_j, m_j - 1, mu_j |pr_j X|^2 / 2)

and for Lambda = 0 it is the reduced Bessel function of r |X|. The central
phase uses the bracket convention of ``lie`` ([e_1, e_2] = -J), so for p = 2
Theta(exp(a X_{1,2})) = exp(-i lambda a); O_p-averages do not depend on
this sign.
"""
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .haar import GROUP_KINDS, MCEstimate
from .lie import GroupPoint, k_action_arrays, mul_arrays
from .skew import LambdaSpec, OrbitProfile, orbit_profile
from .special import bessel_reduced, laguerre_norm


@dataclass(frozen=True)
class SphericalIndex:
    """Parameters (r, Lambda, l, eps) of one bounded spherical function on N_p."""

    p: int
    r: float
    lam: LambdaSpec
    l: tuple = ()
    epsilon: int | None = None
    group_kind: str = "O"
    profile: OrbitProfile = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be at least 1")
        lam = self.lam if isinstance(self.lam, LambdaSpec) else LambdaSpec(tuple(self.lam))
        object.__setattr__(self, "lam", lam)
        if len(lam) != self.p // 2:
            raise ValueError(f"p={self.p} needs {self.p // 2} lambdas, got {len(lam)}")
        if self.group_kind not in GROUP_KINDS:
            raise ValueError(f"group_kind must be one of {GROUP_KINDS}")
        if (self.epsilon is not None) != (self.group_kind == "SO"):
            raise ValueError("epsilon is required for SO and forbidden for O")
        if self.epsilon is not None and self.epsilon not in (1, -1):
            raise ValueError("epsilon must be +1 or -1")
        if not self.r >= 0:
            raise ValueError("r must be nonnegative")
        prof = orbit_profile(lam)
        object.__setattr__(self, "profile", prof)
        l = () if self.l is None else tuple(int(v) for v in np.atleast_1d(self.l))
        if lam.is_zero:
            if l:
                raise ValueError("l must be empty when Lambda = 0")
        elif len(l) != prof.p1 or any(v < 0 for v in l):
            raise ValueError(f"l must hold {prof.p1} nonnegative integers, got {l}")
        object.__setattr__(self, "l", l)
        if 2 * prof.p0 == self.p and self.r != 0:
            raise ValueError("r must be 0 when 2 p0 = p")
        object.__setattr__(self, "r", float(self.r))

    @property
    def is_bessel(self):
        return self.lam.is_zero

    def central_lambdas(self):
        """Nonzero block values with the SO sign applied to the last block."""
        lam = list(self.lam.lambdas[: self.profile.p0])
        if self.epsilon == -1 and self.profile.p0 == len(self.lam) and lam:
            lam[-1] = -lam[-1]
        return np.array(lam, dtype=float)


def _theta_arrays(idx, x, a):
    prof = idx.profile
    p = idx.p
    lam = idx.central_lambdas()
    b = np.arange(prof.p0)
    central = np.sum(a[..., 2 * b, 2 * b + 1] * lam, axis=-1)
    out = np.exp(1j * (central + idx.r * x[..., p - 1]))
    sq = x[..., : 2 * prof.p0] ** 2
    pair = sq[..., 0::2] + sq[..., 1::2]
    for j in range(prof.p1):
        s = pair[..., prof.m_cum[j]:prof.m_cum[j + 1]].sum(axis=-1)
        out = out * laguerre_norm(idx.l[j], prof.m[j] - 1, 0.5 * prof.mu[j] * s)
    return out


def theta(idx, n):
    """The integrand Theta^{r, Lambda, l, eps} at one group point."""
    if idx.is_bessel:
        raise ValueError("Theta is only defined for Lambda != 0; use phi_bessel")
    return complex(_theta_arrays(idx, n.x, n.a))


def theta_arrays(idx, x, a):
    """Theta on batches ``x[..., p]``, ``a[..., p, p]``."""
    if idx.is_bessel:
        raise ValueError("Theta is only defined for Lambda != 0; use phi_bessel")
    return _theta_arrays(idx, np.asarray(x, dtype=float), np.asarray(a, dtype=float))


def theta_on_orbit(idx, n, ks):
    """Theta(k.n) for every k in the stack ``ks`` (compiled kernel when built)."""
    prof = idx.profile
    return kernels.theta_samples(ks, n.x, n.a, idx.central_lambdas(), idx.r,
                                 np.array(prof.mu, dtype=float), np.array(idx.l), np.array(prof.m))


def phi_bessel(r, n):
    """The Lambda = 0 family: reduced Bessel of order (p-2)/2 at r |X|."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    return bessel_reduced((n.p - 2) / 2, r * np.linalg.norm(n.x))


def phi_bessel_arrays(r, x):
    x = np.asarray(x, dtype=float)
    return bessel_reduced((x.shape[-1] - 2) / 2, r * np.linalg.norm(x, axis=-1))


def _check_integrator(idx, integrator):
    if integrator.p != idx.p:
        raise ValueError(f"integrator is for p={integrator.p}, index has p={idx.p}")
    if integrator.group_kind != idx.group_kind:
        raise ValueError(f"integrator averages over {integrator.group_kind}, index needs {idx.group_kind}")


def phi(idx, n, integrator=None):
    """phi^{r, Lambda, l, eps}(n) as an estimate with standard error.

    Lambda = 0 is evaluated in closed form (no integrator needed).
    """
    if idx.is_bessel:
        return MCEstimate(complex(phi_bessel(idx.r, n)), 0.0, 0)
    if integrator is None:
        raise ValueError("an integrator over K is required for Lambda != 0")
    _check_integrator(idx, integrator)
    return integrator.average(lambda ks: theta_on_orbit(idx, n, ks))


def phi_values(idx, x, a, integrator=None):
    """phi over a batch of points: returns (values, std_errors)."""
    x = np.asarray(x, dtype=float).reshape(-1, idx.p)
    a = np.asarray(a, dtype=float).reshape(-1, idx.p, idx.p)
    if idx.is_bessel:
        return phi_bessel_arrays(idx.r, x).astype(complex), np.zeros(len(x))
    vals = np.empty(len(x), dtype=complex)
    errs = np.empty(len(x))
    for i in range(len(x)):
        est = phi(idx, GroupPoint(x[i], a[i]), integrator)
        vals[i], errs[i] = est.value, est.std_error
    return vals, errs


def heis_spherical_laguerre(lam, l, m, z, t):
    """omega_{lambda, l} on the Heisenberg group C^{p0} x R."""
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    z = np.asarray(z, dtype=complex).reshape(-1)
    m = tuple(int(v) for v in m)
    l = tuple(int(v) for v in l)
    if sum(m) != z.size or len(l) != len(m):
        raise ValueError("block sizes m must partition z and match l")
    out = np.exp(1j * lam * t)
    start = 0
    for lj, mj in zip(l, m):
        s = float(np.sum(np.abs(z[start:start + mj]) ** 2))
        out *= laguerre_norm(lj, mj - 1, 0.5 * abs(lam) * s)
        start += mj
    return complex(out)


def heis_spherical_bessel(mu, m, z, t):
    """omega_mu on the Heisenberg group; independent of t."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    m = tuple(int(v) for v in m)
    if sum(m) != z.size or len(mu) != len(m):
        raise ValueError("block sizes m must partition z and match mu")
    out = 1.0
    start = 0
    for muj, mj in zip(mu, m):
        if muj <= 0:
            raise ValueError("mu must be positive")
        s = float(np.sum(np.abs(z[start:start + mj]) ** 2))
        out *= bessel_reduced(mj - 1, muj * np.sqrt(s))
        start += mj
    return float(out)


def functional_equation_residual(idx, n1, n2, integrator=None, outer=None):
    """| int_K phi(n1 . k.n2) dk - phi(n1) phi(n2) |.

    ``integrator`` evaluates phi itself, ``outer`` the K-average on the
    left (defaults to ``integrator``; pass an independent one for MC).
    """
    outer = integrator if outer is None else outer
    if outer is None:
        raise ValueError("an outer integrator over K is required")
    ks = outer.samples
    kx, ka = k_action_arrays(ks, n2.x[None, :], n2.a[None, :, :])
    xs, as_ = mul_arrays(n1.x[None, :], n1.a[None, :, :], kx, ka)
    vals, _ = phi_values(idx, xs, as_, integrator)
    lhs = vals.mean()
    rhs = phi(idx, n1, integrator).value * phi(idx, n2, integrator).value
    return float(abs(lhs - rhs))
