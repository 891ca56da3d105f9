# cython: language_level=3
"""Compiled versions of the functions in ``_pykernels``.

Signatures and return conventions match the numpy module exactly.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt, fabs, cos, sin, pow, M_PI

cnp.import_array()

cdef int MAX_SERIES_TERMS = 400


cdef inline double _lag_norm(int n, double alpha, double x) noexcept nogil:
    cdef double prev = 1.0, cur, nxt
    cdef int k
    if n == 0:
        return exp(-0.5 * x)
    cur = (1.0 + alpha - x) / (1.0 + alpha)
    for k in range(1, n):
        nxt = ((2 * k + 1 + alpha - x) * cur - k * prev) / (k + 1 + alpha)
        prev = cur
        cur = nxt
    return cur * exp(-0.5 * x)


cdef void _lag_rows(int nmax, double alpha, const double* x, double* prev, double* cur,
                   double* out, Py_ssize_t size, bint keep) noexcept nogil:
    # k-outer so that the inner loop is independent across points; when
    # ``keep`` is set, row k of the table goes to out + k * size
    cdef Py_ssize_t i
    cdef int k
    cdef double nxt, c1, c2, d
    for i in range(size):
        prev[i] = 1.0
        cur[i] = (1.0 + alpha - x[i]) / (1.0 + alpha)
    if keep and nmax >= 1:
        for i in range(size):
            out[size + i] = cur[i]
    for k in range(1, nmax):
        c1 = 2 * k + 1 + alpha
        c2 = k
        d = k + 1 + alpha
        for i in range(size):
            nxt = ((c1 - x[i]) * cur[i] - c2 * prev[i]) / d
            prev[i] = cur[i]
            cur[i] = nxt
        if keep:
            for i in range(size):
                out[(k + 1) * size + i] = cur[i]


def laguerre_norm(int n, double alpha, x):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xf = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t i, size = xf.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(size)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] prev = np.empty(size)
    cdef double* xp = <double*> xf.data
    cdef double* op = <double*> out.data
    cdef double* pp = <double*> prev.data
    with nogil:
        if n == 0:
            for i in range(size):
                op[i] = exp(-0.5 * xp[i])
        else:
            _lag_rows(n, alpha, xp, pp, op, NULL, size, False)
            for i in range(size):
                op[i] = op[i] * exp(-0.5 * xp[i])
    return out.reshape(np.shape(x))


def laguerre_norm_table(int nmax, double alpha, x):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xf = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t i, size = xf.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((nmax + 1, size))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] prev = np.empty(size)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cur = np.empty(size)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] damp = np.empty(size)
    cdef double* xp = <double*> xf.data
    cdef double* op = <double*> out.data
    cdef double* dp = <double*> damp.data
    cdef int k
    with nogil:
        for i in range(size):
            dp[i] = exp(-0.5 * xp[i])
            op[i] = dp[i]
        if nmax >= 1:
            _lag_rows(nmax, alpha, xp, <double*> prev.data, <double*> cur.data, op, size, True)
        for k in range(1, nmax + 1):
            for i in range(size):
                op[k * size + i] = op[k * size + i] * dp[i]
    return out


def bessel_series(double alpha, z):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] zf = np.ascontiguousarray(z, dtype=np.float64).ravel()
    cdef Py_ssize_t i, size = zf.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(size)
    cdef const double[::1] zv = zf
    cdef double[::1] ov = out
    cdef double q, total, comp, term, t
    cdef int k
    cdef bint ok = True, conv
    with nogil:
        for i in range(size):
            q = -0.25 * zv[i] * zv[i]
            total = 1.0
            comp = 0.0
            term = 1.0
            conv = False
            for k in range(1, MAX_SERIES_TERMS + 1):
                term = term * q / (k * (k + alpha))
                t = total + term
                if fabs(total) >= fabs(term):
                    comp += (total - t) + term
                else:
                    comp += (term - t) + total
                total = t
                if fabs(term) <= 1e-17 * (fabs(total) if fabs(total) > 1e-300 else 1e-300):
                    conv = True
                    break
            if not conv:
                ok = False
            ov[i] = total + comp
    return out.reshape(np.shape(z)), bool(ok)


def hermite_poly_table(int kmax, y):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] yf = np.ascontiguousarray(y, dtype=np.float64).ravel()
    cdef Py_ssize_t i, size = yf.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((kmax + 1, size))
    cdef double* yp = <double*> yf.data
    cdef double* op = <double*> out.data
    cdef double h0 = pow(M_PI, -0.25)
    cdef double c1, c2, s2 = sqrt(2.0)
    cdef int k
    with nogil:
        for i in range(size):
            op[i] = h0
        if kmax >= 1:
            for i in range(size):
                op[size + i] = s2 * yp[i] * h0
        for k in range(1, kmax):
            c1 = sqrt(2.0 / (k + 1))
            c2 = sqrt(k / (k + 1.0))
            for i in range(size):
                op[(k + 1) * size + i] = yp[i] * c1 * op[k * size + i] - c2 * op[(k - 1) * size + i]
    return out


def theta_samples(ks, x, a, lam, double r, mu, l, m):
    cdef const double[:, :, ::1] kv = np.ascontiguousarray(ks, dtype=np.float64)
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[:, ::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] lamv = np.ascontiguousarray(lam, dtype=np.float64).reshape(-1)
    cdef const double[::1] muv = np.ascontiguousarray(mu, dtype=np.float64).reshape(-1)
    cdef const int[::1] lv = np.ascontiguousarray(l, dtype=np.intc).reshape(-1)
    cdef const int[::1] mv = np.ascontiguousarray(m, dtype=np.intc).reshape(-1)
    cdef Py_ssize_t nsamp = kv.shape[0], p = kv.shape[1]
    cdef Py_ssize_t p0 = lamv.shape[0], p1 = muv.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(nsamp, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef double[::1] y = np.empty(p)
    cdef double[::1] ar = np.empty(p)
    cdef Py_ssize_t s, i, j, b, q, start
    cdef double acc, phase, mag, pair
    with nogil:
        for s in range(nsamp):
            for i in range(p):
                acc = 0.0
                for j in range(p):
                    acc = acc + kv[s, i, j] * xv[j]
                y[i] = acc
            phase = r * y[p - 1]
            for b in range(p0):
                # a @ k[2b+1, :]
                for i in range(p):
                    acc = 0.0
                    for j in range(p):
                        acc = acc + av[i, j] * kv[s, 2 * b + 1, j]
                    ar[i] = acc
                acc = 0.0
                for i in range(p):
                    acc = acc + kv[s, 2 * b, i] * ar[i]
                phase = phase + lamv[b] * acc
            mag = 1.0
            start = 0
            for q in range(p1):
                pair = 0.0
                for b in range(start, start + mv[q]):
                    pair = pair + y[2 * b] * y[2 * b] + y[2 * b + 1] * y[2 * b + 1]
                mag = mag * _lag_norm(lv[q], mv[q] - 1.0, 0.5 * muv[q] * pair)
                start = start + mv[q]
            ov[s] = mag * (cos(phase) + 1j * sin(phase))
    return out


def laguerre_moments(double alpha, x, w, double rtol, int lmax):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] wd_arr = np.ascontiguousarray(w, dtype=np.float64).ravel() * np.exp(-0.5 * np.asarray(xv))
    cdef double[::1] wd = wd_arr
    cdef Py_ssize_t i, size = xv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] prev_arr = np.ones(size)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cur_arr = np.empty(size)
    cdef double[::1] prev = prev_arr
    cdef double[::1] cur = cur_arr
    cdef double c, total, nxt, c1, c2, dd
    cdef int k, small = 0
    out = []
    c = 0.0
    for i in range(size):
        c += wd[i]
    out.append(c)
    total = c * c
    for i in range(size):
        cur[i] = (1.0 + alpha - xv[i]) / (1.0 + alpha)
    for k in range(1, lmax + 1):
        c = 0.0
        with nogil:
            if k > 1:
                c1 = 2 * k - 1 + alpha
                c2 = k - 1
                dd = k + alpha
                for i in range(size):
                    nxt = ((c1 - xv[i]) * cur[i] - c2 * prev[i]) / dd
                    prev[i] = cur[i]
                    cur[i] = nxt
            for i in range(size):
                c += wd[i] * cur[i]
        out.append(c)
        total += c * c
        if c * c <= rtol * total:
            small += 1
        else:
            small = 0
        if small == 2:
            return np.array(out), True
    return np.array(out), False
