"""Deterministic sharded Monte Carlo and tensor quadrature rules.

Reproducibility contract: for a fixed ``(seed, n_shards)`` every estimate is
bit-identical regardless of how many worker threads run the shards.  Shard
``i`` draws from its own counter-based substream ``SeedSequence(seed,
spawn_key=(i,))`` in fixed-size chunks, and shard partial statistics are
merged in ascending shard order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from .geometry import (
    TWO_PI,
    Domain,
    SolidTorus,
    _local_point,
    domain_diameter,
    domain_volume,
    sample_uniform,
)

THREADS_ENV = "HELITOOL_THREADS"


class IntegrationError(RuntimeError):
    pass


class NonFiniteIntegrandError(IntegrationError):
    """The integrand returned NaN/inf at an accepted sample."""

    def __init__(self, sample):
        self.sample = sample
        super().__init__(f"non-finite integrand value at sample {sample}")


class SingularKernelError(IntegrationError):
    pass


@dataclass(frozen=True)
class MCConfig:
    n_samples: int = 1_000_000
    seed: int = 0
    n_shards: int = 8
    eps_cutoff: Optional[float] = None
    chunk_size: int = 1 << 15
    n_workers: Optional[int] = None

    def __post_init__(self):
        if int(self.n_samples) <= 0:
            raise ValueError("n_samples must be positive")
        if int(self.n_shards) < 1:
            raise ValueError("n_shards must be >= 1")
        if self.eps_cutoff is not None and self.eps_cutoff < 0:
            raise ValueError("eps_cutoff must be >= 0")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if int(self.chunk_size) < 1:
            raise ValueError("chunk_size must be positive")

    @property
    def per_shard(self) -> int:
        return -(-int(self.n_samples) // int(self.n_shards))

    def workers(self) -> int:
        if self.n_workers is not None:
            return max(1, int(self.n_workers))
        env = os.environ.get(THREADS_ENV)
        if env:
            return max(1, int(env))
        return min(int(self.n_shards), os.cpu_count() or 1)

    def replace(self, **kw) -> "MCConfig":
        d = asdict(self)
        d.update(kw)
        return MCConfig(**d)


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float
    n_used: int
    n_rejected: int = 0

    def __sub__(self, other: "Estimate") -> "Estimate":
        # independent estimates: variances add
        return Estimate(
            self.value - other.value,
            math.hypot(self.std_error, other.std_error),
            self.n_used + other.n_used,
            self.n_rejected + other.n_rejected,
        )

    def within(self, target: float, n_sigma: float = 3.0) -> bool:
        return abs(self.value - target) <= n_sigma * self.std_error

    def to_dict(self):
        return asdict(self)


class _Moments:
    """Running (count, mean, M2) merged with Chan's pairwise update."""

    __slots__ = ("n", "mean", "m2", "rejected")

    def __init__(self):
        self.n, self.mean, self.m2, self.rejected = 0, 0.0, 0.0, 0

    def add_batch(self, vals):
        n_b = len(vals)
        if n_b == 0:
            return
        mean_b = float(np.mean(vals))
        m2_b = float(np.sum((vals - mean_b) ** 2))
        self.merge(n_b, mean_b, m2_b)

    def merge(self, n_b, mean_b, m2_b):
        n = self.n + n_b
        delta = mean_b - self.mean
        self.mean += delta * n_b / n
        self.m2 += m2_b + delta * delta * self.n * n_b / n
        self.n = n


def _shard_rng(seed, shard):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(shard),)))


def _run_shards(cfg: MCConfig, shard_fn) -> _Moments:
    shards = range(int(cfg.n_shards))
    workers = cfg.workers()
    if workers == 1:
        parts = [shard_fn(i) for i in shards]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(shard_fn, shards))
    total = _Moments()
    for m in parts:
        total.merge(m.n, m.mean, m.m2)
        total.rejected += m.rejected
    return total


def _check_finite(vals, pts):
    bad = ~np.isfinite(vals)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise NonFiniteIntegrandError(tuple(np.asarray(p[i]).tolist() for p in pts))


def _finish(total: _Moments, scale: float) -> Estimate:
    n = total.n
    sd = math.sqrt(total.m2 / (n - 1)) if n > 1 else 0.0
    return Estimate(float(total.mean * scale), float(sd / math.sqrt(n) * abs(scale)), int(n), int(total.rejected))


def mc_pair(dA: Domain, dB: Domain, integrand: Callable, cfg: MCConfig) -> Estimate:
    """Estimate of the double integral of ``integrand(x, y)`` over dA x dB.

    Pairs closer than ``cfg.eps_cutoff`` contribute zero but still count as
    samples; their number is reported in ``n_rejected``.  ``integrand`` is
    vectorized: it receives two (m, 3) arrays and returns m values.
    """
    eps = cfg.eps_cutoff
    if eps is None:
        eps = 1e-6 * max(domain_diameter(dA), domain_diameter(dB))
    per, chunk = cfg.per_shard, int(cfg.chunk_size)

    def shard(i):
        rng = _shard_rng(cfg.seed, i)
        acc = _Moments()
        done = 0
        while done < per:
            m = min(chunk, per - done)
            x = sample_uniform(dA, rng, m)
            y = sample_uniform(dB, rng, m)
            vals = np.zeros(m)
            keep = np.linalg.norm(x - y, axis=1) >= eps if eps > 0 else np.ones(m, dtype=bool)
            if keep.any():
                v = np.asarray(integrand(x[keep], y[keep]), dtype=float)
                _check_finite(v, (x[keep], y[keep]))
                vals[keep] = v
            acc.rejected += int(m - keep.sum())
            acc.add_batch(vals)
            done += m
        return acc

    return _finish(_run_shards(cfg, shard), domain_volume(dA) * domain_volume(dB))


def mc_volume(d: Domain, integrand: Callable, cfg: MCConfig) -> Estimate:
    """Estimate of the integral of ``integrand(x)`` over ``d`` (vectorized)."""
    per, chunk = cfg.per_shard, int(cfg.chunk_size)

    def shard(i):
        rng = _shard_rng(cfg.seed, i)
        acc = _Moments()
        done = 0
        while done < per:
            m = min(chunk, per - done)
            x = sample_uniform(d, rng, m)
            vals = np.asarray(integrand(x), dtype=float)
            _check_finite(vals, (x,))
            acc.add_batch(vals)
            done += m
        return acc

    return _finish(_run_shards(cfg, shard), domain_volume(d))


# ---------------------------------------------------------------------------
# deterministic rules


def periodic_nodes(n: int):
    return TWO_PI * np.arange(n) / n


def curve_pair_quadrature(a, b, kernel: Callable, n: int, *, min_distance: float = 1e-9) -> float:
    """Periodic trapezoid rule on an n x n grid for a kernel k(s, t) over
    [0, 2pi)^2.  ``kernel`` receives broadcastable (n, 1) and (1, n) arrays."""
    s = periodic_nodes(n)
    pa, pb = a.point(s), b.point(s)
    gap = np.min(np.linalg.norm(pa[:, None, :] - pb[None, :, :], axis=-1))
    if gap < min_distance:
        raise SingularKernelError(f"loops come within {gap:.3g} of each other")
    vals = kernel(s[:, None], s[None, :])
    return float(np.sum(vals) * (TWO_PI / n) ** 2)


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0):
    x, w = np.polynomial.legendre.leggauss(int(n))
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def toroidal_grid(frame: SolidTorus, orders):
    """Nodes (M, 3) and weights (M,) of the tensor rule on a solid torus:
    Gauss-Legendre in r, periodic trapezoid in theta and phi, weighted by the
    volume density r (A + r cos phi)."""
    n_r, n_t, n_p = (int(o) for o in orders)
    r, wr = gauss_legendre(n_r, 0.0, frame.R)
    th, ph = periodic_nodes(n_t), periodic_nodes(n_p)
    R_, T_, P_ = np.meshgrid(r, th, ph, indexing="ij")
    jac = R_ * (frame.A + R_ * np.cos(P_))
    w = wr[:, None, None] * jac * (TWO_PI / n_t) * (TWO_PI / n_p)
    pts = frame.to_world(_local_point(frame.A, R_, T_, P_))
    return pts.reshape(-1, 3), w.reshape(-1)


def toroidal_quadrature(frame: SolidTorus, integrand: Callable, orders=(16, 32, 32)) -> float:
    pts, w = toroidal_grid(frame, orders)
    return float(np.dot(w, np.asarray(integrand(pts), dtype=float)))
