"""Normalized Laguerre, reduced Bessel and Hermite functions.

All three are normalized so the building blocks of the spherical functions
take the value 1 at the origin (Laguerre, Bessel) or are L^2-orthonormal
(Hermite).
"""
import numpy as np
from scipy import special as sp

from . import kernels

# series for the reduced Bessel function is used up to this argument; the
# alternating terms grow like exp(z) so cancellation costs ~exp(z) ulps
SERIES_MAX_Z = 8.0


class SeriesError(ArithmeticError):
    """A power series did not converge within the term budget."""


def _check_alpha(alpha):
    if not alpha > -1:
        raise ValueError(f"order alpha must be > -1, got {alpha}")


def laguerre_norm(n, alpha, x):
    """L_n^alpha(x) exp(-x/2) / C(n+alpha, n).

    Equals 1 at x = 0. Computed with the three-term recurrence rewritten for
    the normalized polynomials, so no Gamma function is needed.
    """
    _check_alpha(alpha)
    if n < 0 or int(n) != n:
        raise ValueError(f"degree must be a nonnegative integer, got {n}")
    x = np.asarray(x, dtype=float)
    out = kernels.laguerre_norm(int(n), float(alpha), x.ravel())
    return out.reshape(x.shape) if x.ndim else float(out[0])


def laguerre_norm_table(nmax, alpha, x):
    """``laguerre_norm(n, alpha, x)`` for n = 0..nmax, stacked on axis 0."""
    _check_alpha(alpha)
    x = np.asarray(x, dtype=float)
    return kernels.laguerre_norm_table(int(nmax), float(alpha), x.ravel()).reshape((nmax + 1,) + x.shape)


def bessel_reduced(alpha, z):
    """Gamma(alpha+1) (z/2)^(-alpha) J_alpha(z), an entire function with value 1 at 0.

    Small arguments use the compensated power series; beyond
    ``SERIES_MAX_Z`` the value is rebuilt from ``scipy.special.jv``.
    """
    _check_alpha(alpha)
    z = np.abs(np.asarray(z, dtype=float))
    flat = z.ravel()
    out = np.empty_like(flat)
    small = flat <= SERIES_MAX_Z
    if small.any():
        vals, ok = kernels.bessel_series(float(alpha), flat[small])
        if not ok:
            raise SeriesError("reduced Bessel series did not converge")
        out[small] = vals
    if (~small).any():
        zz = flat[~small]
        logpref = sp.gammaln(alpha + 1.0) - alpha * np.log(0.5 * zz)
        out[~small] = np.exp(logpref) * sp.jv(alpha, zz)
    out = out.reshape(z.shape)
    return out if z.ndim else float(out)


def hermite_fn(k, x):
    """L^2(R)-orthonormal Hermite function h_k."""
    x = np.asarray(x, dtype=float)
    table = kernels.hermite_poly_table(int(k), x.ravel())
    out = (table[k] * np.exp(-0.5 * x.ravel() ** 2)).reshape(x.shape)
    return out if x.ndim else float(out)


def hermite_table(kmax, x):
    """h_0..h_kmax at the points ``x`` (shape ``(kmax+1,) + x.shape``)."""
    x = np.asarray(x, dtype=float)
    table = kernels.hermite_poly_table(int(kmax), x.ravel()) * np.exp(-0.5 * x.ravel() ** 2)
    return table.reshape((kmax + 1,) + x.shape)


def hermite_poly_table(kmax, x):
    """h_k(x) exp(x^2/2): the polynomial part, safe for large |x|."""
    x = np.asarray(x, dtype=float)
    return kernels.hermite_poly_table(int(kmax), x.ravel()).reshape((kmax + 1,) + x.shape)


def hermite_multi(alpha, y):
    """Product of h_{alpha_i}(y_i); ``y`` has shape (..., len(alpha))."""
    y = np.asarray(y, dtype=float)
    alpha = tuple(int(a) for a in alpha)
    if y.shape[-1] != len(alpha):
        raise ValueError("multi-index and point dimensions differ")
    out = np.ones(y.shape[:-1])
    for i, ai in enumerate(alpha):
        out = out * hermite_fn(ai, y[..., i])
    return out
