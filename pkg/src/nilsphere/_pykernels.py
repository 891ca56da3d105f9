"""Numpy implementations of the inner loops.

These are the reference versions; ``_ckernels.pyx`` mirrors every function
here with identical signatures and must agree to rounding.
"""
import numpy as np

MAX_SERIES_TERMS = 400


def laguerre_norm(n, alpha, x):
    """L_n^alpha(x) exp(-x/2) / C(n+alpha, n) by the normalized recurrence."""
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev * np.exp(-0.5 * x)
    cur = (1.0 + alpha - x) / (1.0 + alpha)
    for k in range(1, n):
        nxt = ((2 * k + 1 + alpha - x) * cur - k * prev) / (k + 1 + alpha)
        prev, cur = cur, nxt
    return cur * np.exp(-0.5 * x)


def laguerre_norm_table(nmax, alpha, x):
    """Rows 0..nmax of ``laguerre_norm`` evaluated on the flat array ``x``."""
    x = np.asarray(x, dtype=float).ravel()
    out = np.empty((nmax + 1, x.size))
    damp = np.exp(-0.5 * x)
    prev = np.ones_like(x)
    out[0] = damp
    if nmax == 0:
        return out
    cur = (1.0 + alpha - x) / (1.0 + alpha)
    out[1] = cur * damp
    for k in range(1, nmax):
        nxt = ((2 * k + 1 + alpha - x) * cur - k * prev) / (k + 1 + alpha)
        prev, cur = cur, nxt
        out[k + 1] = cur * damp
    return out


def bessel_series(alpha, z):
    """Power series of Gamma(alpha+1) (z/2)^-alpha J_alpha(z).

    Neumaier-compensated. Returns ``(values, converged)``.
    """
    z = np.asarray(z, dtype=float)
    q = -0.25 * z * z
    total = np.ones_like(z)
    comp = np.zeros_like(z)
    term = np.ones_like(z)
    done = np.zeros(z.shape, dtype=bool)
    for k in range(1, MAX_SERIES_TERMS + 1):
        term = term * q / (k * (k + alpha))
        t = total + term
        big = np.abs(total) >= np.abs(term)
        comp += np.where(big, (total - t) + term, (term - t) + total)
        total = t
        done |= np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)
        if done.all():
            break
    return total + comp, bool(done.all())


def hermite_poly_table(kmax, y):
    """Normalized Hermite polynomials: row k times exp(-y^2/2) is h_k(y)."""
    y = np.asarray(y, dtype=float).ravel()
    out = np.empty((kmax + 1, y.size))
    out[0] = np.pi ** -0.25
    if kmax >= 1:
        out[1] = np.sqrt(2.0) * y * out[0]
    for k in range(1, kmax):
        out[k + 1] = y * np.sqrt(2.0 / (k + 1)) * out[k] - np.sqrt(k / (k + 1)) * out[k - 1]
    return out


def theta_samples(ks, x, a, lam, r, mu, l, m):
    """Theta(k.n) for each orthogonal matrix in ``ks``.

    ``lam`` holds the (sign-adjusted) nonzero block values, one per
    coordinate pair; ``mu``, ``l``, ``m`` describe the multiplicity blocks.
    """
    ks = np.asarray(ks, dtype=float)
    p = ks.shape[-1]
    p0 = len(lam)
    y = ks @ x
    rows_odd = ks[:, 0:2 * p0:2, :]
    rows_even = ks[:, 1:2 * p0:2, :]
    # (k a k^T)[2i, 2i+1] for each block
    central = np.einsum("nip,pq,niq->ni", rows_odd, a, rows_even) @ np.asarray(lam, dtype=float)
    phase = central + r * y[:, p - 1]
    sq = y[:, : 2 * p0] ** 2
    pair = sq[:, 0::2] + sq[:, 1::2]
    out = np.exp(1j * phase)
    start = 0
    for muj, lj, mj in zip(mu, l, m):
        s = pair[:, start:start + mj].sum(axis=1)
        out = out * laguerre_norm(int(lj), mj - 1.0, 0.5 * muj * s)
        start += mj
    return out


def laguerre_moments(alpha, x, w, rtol, lmax):
    """Moments c_l = sum_i w_i laguerre_norm(l, alpha, x_i) for l = 0, 1, ...

    Stops after two consecutive terms with c_l^2 <= rtol * sum c^2.
    Returns ``(moments, converged)``.
    """
    x = np.asarray(x, dtype=float).ravel()
    w = np.asarray(w, dtype=float).ravel()
    wd = w * np.exp(-0.5 * x)
    out = [float(np.sum(wd))]
    total = out[0] ** 2
    prev = np.ones_like(x)
    cur = (1.0 + alpha - x) / (1.0 + alpha)
    small = 0
    for k in range(1, lmax + 1):
        if k > 1:
            nxt = ((2 * k - 1 + alpha - x) * cur - (k - 1) * prev) / (k + alpha)
            prev, cur = cur, nxt
        c = float(np.dot(wd, cur))
        out.append(c)
        total += c * c
        small = small + 1 if c * c <= rtol * total else 0
        if small == 2:
            return np.array(out), True
    return np.array(out), False
