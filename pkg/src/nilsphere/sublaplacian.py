"""Left-invariant second derivatives and the Kohn sub-Laplacian L = -sum X_i^2.

X_i^2 f(n) is the second derivative of t -> f(n exp(t X_i)) at t = 0. It is
approximated with the five-point central difference (error O(h^4)), and by
default Richardson-extrapolated from steps h and h/2.

Functions ``f`` act on batches: ``f(x, a)`` with ``x[N, p]`` and
``a[N, p, p]``, returning ``N`` values.
"""
import numpy as np

from .lie import curve_arrays, mul_arrays

DEFAULT_STEP = 1e-2

_OFFSETS = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
_WEIGHTS = np.array([-1.0, 16.0, -30.0, 16.0, -1.0])


def _five_point(f, n, i, h):
    e = np.zeros(n.p)
    e[i] = 1.0
    xs, as_ = curve_arrays(n.x, n.a, e, h * _OFFSETS)
    vals = np.asarray(f(xs, as_))
    return np.dot(_WEIGHTS, vals) / (12.0 * h ** 2)


def second_derivative(f, n, i, h=DEFAULT_STEP, richardson=True):
    """X_i^2 f at the group point ``n`` (0-based direction ``i``)."""
    if h <= 0:
        raise ValueError("step must be positive")
    d = _five_point(f, n, i, h)
    if not richardson:
        return d
    d2 = _five_point(f, n, i, 0.5 * h)
    return (16.0 * d2 - d) / 15.0


def sublap_apply(f, n, h=DEFAULT_STEP, richardson=True):
    """(L f)(n) = -sum_i X_i^2 f(n)."""
    return -sum(second_derivative(f, n, i, h, richardson) for i in range(n.p))


def left_translate(f, m):
    """The function n -> f(m n)."""

    def g(x, a):
        xs, as_ = mul_arrays(m.x[None, :], m.a[None, :, :], x, a)
        return f(xs, as_)

    return g


def observed_order(errors, steps):
    """Least-squares slope of log(error) against log(step)."""
    return float(np.polyfit(np.log(steps), np.log(errors), 1)[0])
