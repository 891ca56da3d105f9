"""Normal forms of antisymmetric matrices under orthogonal conjugation.

Every antisymmetric p x p matrix is O_p-conjugate to a block-diagonal
D2(Lambda) = diag(lambda_1 J, ..., lambda_p' J, (0)), J = [[0, 1], [-1, 0]],
with lambda_1 >= ... >= lambda_p' >= 0. This module computes that form, the
multiplicity data attached to Lambda, and the (r, Lambda) invariants of a
coadjoint orbit.
"""
from dataclasses import dataclass

import numpy as np

from .lie import as_skew

# relative tolerance used when grouping numerically computed lambdas
CLUSTER_RTOL = 1e-8
# singular values below this fraction of the largest count as zero
KERNEL_RTOL = 1e-10

J = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True)
class LambdaSpec:
    """A point of the closed chamber lambda_1 >= ... >= lambda_p' >= 0."""

    lambdas: tuple

    def __post_init__(self):
        lam = tuple(float(v) for v in np.atleast_1d(self.lambdas))
        if any(v < 0 for v in lam):
            raise ValueError(f"lambdas must be nonnegative: {lam}")
        if any(lam[i] < lam[i + 1] for i in range(len(lam) - 1)):
            raise ValueError(f"lambdas must be nonincreasing: {lam}")
        object.__setattr__(self, "lambdas", lam)

    def __len__(self):
        return len(self.lambdas)

    def __iter__(self):
        return iter(self.lambdas)

    @property
    def is_zero(self):
        return not any(self.lambdas)

    def norm(self):
        return float(np.sqrt(sum(v * v for v in self.lambdas)))


@dataclass(frozen=True)
class OrbitProfile:
    """p0, p1, distinct values mu, multiplicities m and cumulative sums m'."""

    p0: int
    p1: int
    mu: tuple
    m: tuple
    m_cum: tuple


def d2_matrix(lam, p=None, epsilon=None):
    """The block matrix D2(Lambda), or D2^eps(Lambda) when ``epsilon`` is given.

    ``p`` defaults to 2 * len(lam); pass it explicitly for odd p.
    """
    lam = np.asarray(tuple(lam), dtype=float)
    if p is None:
        p = 2 * lam.size
    if p // 2 != lam.size:
        raise ValueError(f"need floor(p/2) = {p // 2} lambdas, got {lam.size}")
    lam = lam.copy()
    if epsilon is not None and lam.size:
        if epsilon not in (1, -1):
            raise ValueError("epsilon must be +1 or -1")
        lam[-1] *= epsilon
    d = np.zeros((p, p))
    for i, v in enumerate(lam):
        d[2 * i, 2 * i + 1] = v
        d[2 * i + 1, 2 * i] = -v
    return d


def canonical_form(a):
    """Orthogonal ``k`` and Lambda with ``k @ a @ k.T == d2_matrix(Lambda)``.

    The eigenvectors of the symmetric matrix -a^2 come in pairs (u, a u / lambda)
    sharing the eigenvalue lambda^2; each pair spans a block. Eigenspaces of
    higher multiplicity are split with a Gram-Schmidt sweep.
    """
    a = as_skew(a)
    p = a.shape[0]
    w, v = np.linalg.eigh(-a @ a)
    w = np.clip(w, 0.0, None)
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    scale = np.sqrt(w[0]) if p and w[0] > 0 else 0.0
    rows = []
    lams = []
    # columns of v span the candidate space; peel off pairs greedily
    basis = []
    for idx in range(p):
        if len(lams) == p // 2:
            break
        if scale == 0.0:
            break
        u = v[:, idx].copy()
        for b in basis:
            u -= (b @ u) * b
        nu = np.linalg.norm(u)
        if nu < 0.5:
            continue
        u /= nu
        # |a u| is accurate to eps |a|, while sqrt(w) only to sqrt(eps) |a|
        lam = np.linalg.norm(a @ u)
        if lam <= KERNEL_RTOL * scale:
            break
        # u is an eigenvector of -a^2, so k u' = (a^T u) / lam completes the block
        u2 = -a @ u / lam
        for b in basis:
            u2 -= (b @ u2) * b
        u2 /= np.linalg.norm(u2)
        basis.extend([u, u2])
        rows.extend([u, u2])
        lams.append(lam)
    # |a u| can reorder near-ties at rounding level; sort the pairs
    perm = sorted(range(len(lams)), key=lambda i: -lams[i])
    lams = [lams[i] for i in perm]
    rows = [rows[2 * i + j] for i in perm for j in (0, 1)]
    # complete with an orthonormal basis of the kernel
    nrows = len(rows)
    if nrows == 0:
        rows = list(np.eye(p))
    elif nrows < p:
        _, _, vt = np.linalg.svd(np.array(rows))
        rows.extend(vt[nrows:])
    k = np.array(rows)
    lams.extend([0.0] * (p // 2 - len(lams)))
    return k, LambdaSpec(tuple(lams))


def orbit_profile(lam):
    """Multiplicity data of a LambdaSpec; ties are decided exactly."""
    vals = [v for v in tuple(lam) if v != 0]
    mu, m = [], []
    for v in vals:
        if mu and v == mu[-1]:
            m[-1] += 1
        else:
            mu.append(v)
            m.append(1)
    return OrbitProfile(p0=len(vals), p1=len(mu), mu=tuple(mu), m=tuple(m), m_cum=tuple(np.cumsum([0] + m).tolist()))


def cluster_lambdas(lam, rtol=CLUSTER_RTOL):
    """Snap numerically computed lambdas so that near-ties become exact ties.

    Needed before ``orbit_profile`` when Lambda came out of
    ``canonical_form`` rather than from the user.
    """
    lam = list(tuple(lam))
    if not lam:
        return LambdaSpec(())
    top = max(lam)
    out = []
    for v in lam:
        if v <= rtol * top:
            out.append(0.0)
        elif out and abs(out[-1] - v) <= rtol * max(out[-1], v):
            out.append(out[-1])
        else:
            out.append(v)
    return LambdaSpec(tuple(out))


def kernel_projector(a, rtol=KERNEL_RTOL):
    """Orthogonal projector onto ker(a)."""
    a = np.asarray(a, dtype=float)
    p = a.shape[0]
    _, s, vt = np.linalg.svd(a)
    top = s[0] if s.size else 0.0
    if top == 0.0:
        return np.eye(p)
    rank = int(np.sum(s > rtol * top))
    null = vt[rank:]
    return null.T @ null


def orbit_invariants(xstar, astar):
    """(r, Lambda) of the coadjoint orbit through X* + A*.

    Lambda is the normal form of A*; r is the length of the component of X*
    in ker(A*), which no coadjoint move can change.
    """
    xstar = np.asarray(xstar, dtype=float)
    astar = as_skew(astar)
    if astar.shape[0] != xstar.size:
        raise ValueError("dimension mismatch")
    _, lam = canonical_form(astar)
    r = float(np.linalg.norm(kernel_projector(astar) @ xstar))
    return r, lam


def coadjoint_action(k, x0, xstar, astar):
    """Coadjoint action of (k, exp X0) on X* + A*: k.X* + k.A* - (k.A*).X0."""
    ka = k @ astar @ k.T
    return k @ xstar - ka @ x0, ka


def pr_norms(x, profile):
    """Squared norms |pr_j X|^2 of the projections onto each multiplicity block."""
    x = np.asarray(x, dtype=float)
    sq = x[..., : 2 * profile.p0] ** 2
    pair = sq[..., 0::2] + sq[..., 1::2]
    return [pair[..., profile.m_cum[j]:profile.m_cum[j + 1]].sum(axis=-1) for j in range(profile.p1)]
