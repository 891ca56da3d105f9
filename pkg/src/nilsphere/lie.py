"""The free two-step nilpotent Lie group N_p in exponential coordinates.

A point exp(X + A) is stored as the pair (x, a): x is the coordinate
vector of X in the orthonormal basis X_1..X_p of V, and a is the
antisymmetric p x p matrix of A. The bracket of X and Y is the
antisymmetric map V -> <X, V> Y - <Y, V> X, i.e. the matrix
``outer(y, x) - outer(x, y)``; in particular [e_1, e_2] has entry
(2, 1) = +1.

Inner product on Z
------------------
The scalar product on Z is *half* the Frobenius product,
``<a, b> = trace(a.T @ b) / 2``. With that factor the identity
<[X, Y], [X', Y']> = <X, X'><Y, Y'> - <X, Y'><X', Y> holds and the
brackets X_{i,j} = [e_i, e_j], i < j, are orthonormal. Dropping the 1/2
silently rescales every central frequency by 2.

Most functions accept leading batch dimensions: ``x[..., p]`` and
``a[..., p, p]``.
"""
from dataclasses import dataclass

import numpy as np

SKEW_TOL = 1e-12
ORTHO_TOL = 1e-10


def as_skew(mat, tol=SKEW_TOL):
    """Validate and antisymmetrize a (batch of) square matrix.

    Raises ``ValueError`` if ``mat`` is further than ``tol`` (relative to
    its size, with an absolute floor of 1) from antisymmetric.
    """
    mat = np.asarray(mat, dtype=float)
    if mat.ndim < 2 or mat.shape[-1] != mat.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {mat.shape}")
    sym = mat + np.swapaxes(mat, -1, -2)
    scale = max(1.0, float(np.max(np.abs(mat), initial=0.0)))
    if np.max(np.abs(sym), initial=0.0) > tol * scale:
        raise ValueError("matrix is not antisymmetric")
    return 0.5 * (mat - np.swapaxes(mat, -1, -2))


def _check_dims(*arrays):
    p = {np.shape(v)[-1] for v in arrays}
    if len(p) != 1:
        raise ValueError(f"dimension mismatch: {sorted(p)}")
    return p.pop()


@dataclass(frozen=True)
class GroupPoint:
    """exp(X + A) in N_p."""

    x: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        if x.size < 1:
            raise ValueError("p must be at least 1")
        a = as_skew(np.array(self.a, dtype=float).reshape(x.size, x.size))
        x.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "a", a)

    @property
    def p(self):
        return self.x.size

    @classmethod
    def identity(cls, p):
        return cls(np.zeros(p), np.zeros((p, p)))

    @classmethod
    def from_x(cls, x):
        x = np.asarray(x, dtype=float)
        return cls(x, np.zeros((x.size, x.size)))

    @classmethod
    def from_coords(cls, coords, p):
        """Build from the flat vector (x_1..x_p, a_{1,2}, a_{1,3}, .., a_{p-1,p}).

        The Z-coordinates are taken in the basis X_{i,j} = [e_i, e_j], i < j,
        listed lexicographically.
        """
        coords = np.asarray(coords, dtype=float)
        z = p * (p - 1) // 2
        if coords.size != p + z:
            raise ValueError(f"expected {p + z} coordinates for p={p}, got {coords.size}")
        return cls(coords[:p], z_from_coords(coords[p:], p))

    def coords(self):
        return np.concatenate([self.x, z_coords(self.a)])

    def inverse(self):
        return GroupPoint(-self.x, -self.a)

    def __mul__(self, other):
        return group_mul(self, other)

    def __repr__(self):
        return f"GroupPoint(x={self.x.tolist()}, a={z_coords(self.a).tolist()})"


def basis_z(i, j, p):
    """The central basis vector X_{i,j} = [e_i, e_j] (0-based indices)."""
    e = np.eye(p)
    return bracket(e[i], e[j])


def z_coords(a):
    """Coordinates of A in the orthonormal basis X_{i,j}, i < j."""
    a = np.asarray(a, dtype=float)
    p = a.shape[-1]
    iu, ju = np.triu_indices(p, 1)
    # X_{i,j} has entry (j, i) = +1
    return a[..., ju, iu]


def z_from_coords(c, p):
    c = np.asarray(c, dtype=float)
    iu, ju = np.triu_indices(p, 1)
    a = np.zeros(c.shape[:-1] + (p, p))
    a[..., ju, iu] = c
    a[..., iu, ju] = -c
    return a


def bracket(x, y):
    """[X, Y] as the antisymmetric matrix ``y x^T - x y^T``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_dims(x, y)
    return y[..., :, None] * x[..., None, :] - x[..., :, None] * y[..., None, :]


def z_inner(a, b):
    """Scalar product on Z: trace(a^T b) / 2."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_dims(a, b)
    return 0.5 * np.sum(a * b, axis=(-2, -1))


def group_mul(n1, n2):
    """Product of two group points (step-two Baker-Campbell-Hausdorff)."""
    _check_dims(n1.x, n2.x)
    return GroupPoint(n1.x + n2.x, n1.a + n2.a + 0.5 * bracket(n1.x, n2.x))


def mul_arrays(x1, a1, x2, a2):
    """Batched group product on raw arrays."""
    return x1 + x2, a1 + a2 + 0.5 * bracket(x1, x2)


def check_orthogonal(k, tol=ORTHO_TOL):
    k = np.asarray(k, dtype=float)
    p = k.shape[-1]
    err = np.max(np.abs(np.swapaxes(k, -1, -2) @ k - np.eye(p)), initial=0.0)
    if err > tol:
        raise ValueError(f"matrix is not orthogonal (|k^T k - I| = {err:.2e})")
    return k


def k_action(k, n):
    """The automorphism k.exp(X + A) = exp(kX + k A k^T)."""
    k = check_orthogonal(k)
    if k.shape[-1] != n.p:
        raise ValueError(f"dimension mismatch: k is {k.shape}, p={n.p}")
    return GroupPoint(k @ n.x, k @ n.a @ k.T)


def k_action_arrays(k, x, a):
    """Batched action; ``k`` may carry a leading sample axis."""
    kt = np.swapaxes(k, -1, -2)
    return np.einsum("...ij,...j->...i", k, x), k @ a @ kt


def one_param_curve(n, vx, va, t):
    """n . exp(t (V_X + V_A)), the left-translated one-parameter subgroup.

    For step-two groups this is exp(X + t V_X, A + t V_A + (t/2)[X, V_X]).
    """
    vx = np.asarray(vx, dtype=float)
    va = np.zeros((n.p, n.p)) if np.isscalar(va) and va == 0 else as_skew(va)
    _check_dims(n.x, vx, va)
    return GroupPoint(n.x + t * vx, n.a + t * va + 0.5 * t * bracket(n.x, vx))


def curve_arrays(x, a, vx, ts):
    """Points n . exp(t V_X) for an array of ``ts`` (no central velocity)."""
    ts = np.asarray(ts, dtype=float)
    xs = x[None, :] + ts[:, None] * vx[None, :]
    as_ = a[None, :, :] + 0.5 * ts[:, None, None] * bracket(x, vx)[None, :, :]
    return xs, as_
