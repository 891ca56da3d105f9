"""Haar measure on O_p and SO_p: sampling and averaging.

Integrands take a stack of orthogonal matrices, shape ``(N, p, p)``, and
return ``N`` values. Random streams are always passed in explicitly as
``numpy.random.Generator`` objects.
"""
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

GROUP_KINDS = ("O", "SO")


@dataclass(frozen=True)
class MCEstimate:
    value: complex
    std_error: float
    n_samples: int

    @property
    def real(self):
        return self.value.real

    def __abs__(self):
        return abs(self.value)


class Welford:
    """Streaming mean/variance for complex samples, mergeable across shards."""

    def __init__(self):
        self.n = 0
        self.mean = 0j
        self.m2 = 0.0

    def add_batch(self, values):
        values = np.asarray(values, dtype=complex).ravel()
        if values.size == 0:
            return self
        other = Welford()
        other.n = values.size
        other.mean = values.mean()
        other.m2 = float(np.sum(np.abs(values - other.mean) ** 2))
        return self.merge(other)

    def merge(self, other):
        if other.n == 0:
            return self
        n = self.n + other.n
        delta = other.mean - self.mean
        self.mean = self.mean + delta * other.n / n
        self.m2 = self.m2 + other.m2 + abs(delta) ** 2 * self.n * other.n / n
        self.n = n
        return self

    @property
    def variance(self):
        return self.m2 / (self.n - 1) if self.n > 1 else 0.0

    def estimate(self):
        se = np.sqrt(self.variance / self.n) if self.n > 1 else 0.0
        return MCEstimate(complex(self.mean), float(se), self.n)


def _check_kind(group_kind):
    if group_kind not in GROUP_KINDS:
        raise ValueError(f"group_kind must be one of {GROUP_KINDS}, got {group_kind!r}")


def sample_haar(group_kind, p, rng, size=None):
    """Haar-distributed orthogonal matrices.

    QR of a Gaussian matrix with the signs of diag(R) moved into Q; for SO the
    first column is negated whenever det = -1. ``size=None`` returns a single
    matrix, otherwise an array of shape ``(size, p, p)``.
    """
    _check_kind(group_kind)
    if p < 1:
        raise ValueError("p must be at least 1")
    n = 1 if size is None else int(size)
    g = rng.standard_normal((n, p, p))
    q, r = np.linalg.qr(g)
    d = np.sign(np.diagonal(r, axis1=1, axis2=2))
    d[d == 0] = 1.0
    q = q * d[:, None, :]
    if group_kind == "SO":
        neg = np.linalg.det(q) < 0
        q[neg, :, 0] *= -1.0
    return q[0] if size is None else q


def n_workers():
    try:
        return max(1, int(os.environ.get("NILSPHERE_THREADS", "1")))
    except ValueError:
        return 1


class MonteCarloIntegrator:
    """Plain Monte Carlo over a fixed list of Haar samples.

    The samples are drawn once at construction, so averaging two integrands
    with the same integrator gives paired estimates.
    """

    deterministic = False

    def __init__(self, group_kind, p, n_samples, rng=None, samples=None, chunk=65536):
        _check_kind(group_kind)
        self.group_kind = group_kind
        self.p = p
        if samples is None:
            if n_samples < 2:
                raise ValueError("Monte Carlo averaging needs at least 2 samples")
            if rng is None:
                raise ValueError("an explicit rng is required")
            samples = sample_haar(group_kind, p, rng, size=n_samples)
        self.samples = np.asarray(samples, dtype=float)
        self.samples.setflags(write=False)
        self.chunk = chunk

    @property
    def n_samples(self):
        return self.samples.shape[0]

    def values(self, f):
        return np.concatenate([np.asarray(f(self.samples[i:i + self.chunk]), dtype=complex).ravel()
                               for i in range(0, self.n_samples, self.chunk)])

    def average(self, f):
        shards = [self.samples[i:i + self.chunk] for i in range(0, self.n_samples, self.chunk)]
        workers = min(n_workers(), len(shards))
        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                parts = list(pool.map(lambda s: Welford().add_batch(f(s)), shards))
        else:
            parts = [Welford().add_batch(f(s)) for s in shards]
        acc = Welford()
        for part in parts:
            acc.merge(part)
        return acc.estimate()


def circle_samples(group_kind, n_rotations=256):
    """Equispaced rotations of the plane, plus their reflections for O_2."""
    _check_kind(group_kind)
    th = 2 * np.pi * np.arange(n_rotations) / n_rotations
    c, s = np.cos(th), np.sin(th)
    rot = np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)
    if group_kind == "SO":
        return rot
    refl = rot @ np.diag([1.0, -1.0])
    return np.concatenate([rot, refl])


class CircleIntegrator:
    """Deterministic average over O_2 or SO_2 (trapezoidal rule on the circle).

    Exact for trigonometric polynomials of degree below ``n_rotations`` and
    spectrally accurate for smooth integrands; the reported error is 0.
    """

    deterministic = True

    def __init__(self, group_kind="O", n_rotations=256):
        self.group_kind = group_kind
        self.p = 2
        self.samples = circle_samples(group_kind, n_rotations)
        self.samples.setflags(write=False)

    @property
    def n_samples(self):
        return self.samples.shape[0]

    def values(self, f):
        return np.asarray(f(self.samples), dtype=complex).ravel()

    def average(self, f):
        vals = self.values(f)
        return MCEstimate(complex(vals.mean()), 0.0, vals.size)


class SignIntegrator:
    """O_1 = {1, -1} (and the trivial SO_1), averaged exactly."""

    deterministic = True

    def __init__(self, group_kind="O"):
        _check_kind(group_kind)
        self.group_kind = group_kind
        self.p = 1
        pts = [1.0] if group_kind == "SO" else [1.0, -1.0]
        self.samples = np.array(pts).reshape(-1, 1, 1)

    @property
    def n_samples(self):
        return self.samples.shape[0]

    def values(self, f):
        return np.asarray(f(self.samples), dtype=complex).ravel()

    def average(self, f):
        vals = self.values(f)
        return MCEstimate(complex(vals.mean()), 0.0, vals.size)


def k_average(f, group_kind, p, n_samples=None, rng=None, *, samples=None, deterministic=False, n_rotations=256):
    """Average ``f`` over the Haar probability measure of O_p or SO_p.

    With ``deterministic=True`` and p <= 2 the exact rules above are used;
    ``samples`` reuses a caller-supplied list of group elements (paired mode).
    """
    if deterministic:
        if p == 2:
            return CircleIntegrator(group_kind, n_rotations).average(f)
        if p == 1:
            return SignIntegrator(group_kind).average(f)
        raise ValueError("deterministic averaging is only available for p <= 2")
    if samples is None and (n_samples is None or n_samples < 2):
        raise ValueError("Monte Carlo averaging needs at least 2 samples")
    return MonteCarloIntegrator(group_kind, p, n_samples, rng=rng, samples=samples).average(f)


def make_integrator(group_kind, p, n_samples=None, rng=None, deterministic=None):
    """Deterministic rule when one exists (p <= 2), Monte Carlo otherwise."""
    if deterministic is None:
        deterministic = p <= 2
    if deterministic:
        if p == 2:
            return CircleIntegrator(group_kind)
        if p == 1:
            return SignIntegrator(group_kind)
        raise ValueError("deterministic averaging is only available for p <= 2")
    return MonteCarloIntegrator(group_kind, p, n_samples, rng=rng)
