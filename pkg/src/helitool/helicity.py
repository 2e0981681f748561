"""Helicity by three routes, and the Biot-Savart operator.

* ``helicity_6d``: Monte Carlo over pairs of the classical kernel
  (1/4pi) V(x) x V(y) . (x - y)/|x - y|^3.
* ``helicity_4d``: the same integral with the sphere's mass concentrated at
  the south pole, so for each x only the points straight above it
  contribute: integral over x of integral over y in x+ of
  V(x) x V(y) . (-e_z) dy_3.  The inner integral is done by Gauss-Legendre
  on each vertical chord.
* ``helicity_arnold``: integral of V . BS(V).
"""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass
from typing import Literal

import numpy as np

from . import geometry as geo
from .fields import VectorField, fd_divergence
from .geometry import Domain, OutsideDomainError, vertical_extent  # noqa: F401  (re-export)
from .integrate import Estimate, MCConfig, gauss_legendre, mc_pair, mc_volume

FOUR_PI = 4.0 * np.pi
E_Z = np.array([0.0, 0.0, 1.0])

Method = Literal["six_d", "four_d", "arnold"]


class SingularityError(ValueError):
    pass


@dataclass(frozen=True)
class HelicityReport:
    method: str
    estimate: Estimate
    config: dict

    @property
    def value(self):
        return self.estimate.value

    @property
    def std_error(self):
        return self.estimate.std_error

    def to_dict(self):
        return {"method": self.method, "estimate": self.estimate.to_dict(), "config": self.config}


def _echo(cfg: MCConfig, **extra):
    d = asdict(cfg)
    d.pop("n_workers", None)
    d.update(extra)
    return d


def _triple(a, b, c):
    return np.einsum("...i,...i", np.cross(a, b), c)


def kernel_values(vx, vy, x, y):
    """(1/4pi) vx x vy . (x - y)/|x - y|^3 from precomputed field values."""
    d = x - y
    r = np.linalg.norm(d, axis=-1)
    if np.any(r == 0):
        raise SingularityError("helicity kernel evaluated on the diagonal x == y")
    return _triple(vx, vy, d) / (FOUR_PI * r**3)


def helicity_kernel(V: VectorField, x, y):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return kernel_values(V(x), V(y), x, y)


def pair_kernel(V: VectorField, W: VectorField):
    """Vectorized integrand (x, y) -> kernel with V at x and W at y."""

    def k(x, y):
        return kernel_values(V(x), W(y), x, y)

    return k


def check_divergence_free(V: VectorField, n_points=20, tol=1e-6, seed=0):
    """Spot-check div V at interior points; warns and returns the max |div|."""
    rng = np.random.default_rng(seed)
    h = 1e-5 * geo.domain_diameter(V.domain)
    pts = geo.retract_inside(V.domain, geo.sample_uniform(V.domain, rng, n_points), 2 * h)
    div = np.abs(fd_divergence(V, pts, h))
    worst = float(div.max())
    if worst > tol:
        warnings.warn(f"field {V.label!r} has |div| up to {worst:.3g} at probe points", stacklevel=3)
    return worst


def helicity_6d(V: VectorField, cfg: MCConfig, check=True) -> HelicityReport:
    if check:
        check_divergence_free(V)
    est = mc_pair(V.domain, V.domain, pair_kernel(V, V), cfg)
    return HelicityReport("six_d", est, _echo(cfg))


def cross_helicity(V: VectorField, W: VectorField, cfg: MCConfig) -> Estimate:
    """Pairing of the fields of two tubes: integral over V.domain x W.domain."""
    return mc_pair(V.domain, W.domain, pair_kernel(V, W), cfg)


# ---------------------------------------------------------------------------
# four-dimensional (vertical chord) form


def vertical_chord_integral(V: VectorField, x, n_segment=16):
    """Integral over y in x+ of V(x) x V(y) . (-e_z) dy_3 for a batch of x."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    lo, hi = vertical_extent(V.domain, x)
    nodes, weights = gauss_legendre(n_segment, -1.0, 1.0)
    vx = V(x)
    total = np.zeros(len(x))
    for k in range(lo.shape[1]):
        a, b = lo[:, k], hi[:, k]
        live = b > a
        if not live.any():
            continue
        half, mid = 0.5 * (b[live] - a[live]), 0.5 * (b[live] + a[live])
        ys = np.repeat(x[live][:, None, :], n_segment, axis=1)
        ys[..., 2] = mid[:, None] + half[:, None] * nodes
        vy = V(ys)
        vals = _triple(vx[live][:, None, :], vy, -E_Z)
        total[live] += half * (vals @ weights)
    return total


def helicity_4d(V: VectorField, cfg: MCConfig, n_segment: int = 16, check=True) -> HelicityReport:
    if check:
        check_divergence_free(V)
    est = mc_volume(V.domain, lambda x: vertical_chord_integral(V, x, n_segment), cfg)
    return HelicityReport("four_d", est, _echo(cfg, n_segment=n_segment))


# ---------------------------------------------------------------------------
# Biot-Savart


def _sphere_rule(n_polar, n_azimuth):
    mu, wmu = gauss_legendre(n_polar)
    az = 2 * np.pi * np.arange(n_azimuth) / n_azimuth
    M, Z = np.meshgrid(mu, az, indexing="ij")
    s = np.sqrt(1 - M**2)
    U = np.stack([s * np.cos(Z), s * np.sin(Z), M], axis=-1).reshape(-1, 3)
    w = np.repeat(wmu, n_azimuth) * (2 * np.pi / n_azimuth)
    return U, w


def biot_savart(V: VectorField, p, orders=(24, 48, 48), delta: float = 0.0, block: int = 64):
    """Vector potential BS(V)(p) = (1/4pi) int V(y) x (p - y)/|p - y|^3 dy.

    The integral is taken in spherical coordinates centred at p, where the
    volume element s^2 ds cancels the kernel's 1/s^2:
    BS(p) = (1/4pi) int_{S^2} int V(p + s u) x (-u) ds du.
    ``orders`` = (radial Gauss-Legendre nodes per chord, polar Gauss-Legendre
    nodes, azimuthal trapezoid nodes).  Points with |y - p| < ``delta`` are
    left out of the integral.
    """
    p = np.asarray(p, dtype=float)
    single = p.ndim == 1
    P = np.atleast_2d(p)
    if not np.all(geo.domain_contains(V.domain, P)):
        raise OutsideDomainError("Biot-Savart evaluation point outside the domain")
    n_s, n_pol, n_az = (int(o) for o in orders)
    U, wU = _sphere_rule(n_pol, n_az)
    xs, ws = gauss_legendre(n_s)
    nU = len(U)
    out = np.zeros((len(P), 3))
    for start in range(0, len(P), block):
        Pb = P[start:start + block]
        nb = len(Pb)
        origins = np.repeat(Pb, nU, axis=0)
        dirs = np.tile(U, (nb, 1))
        lo, hi = geo.ray_segments(V.domain, origins, dirs)
        if delta > 0:
            lo = np.maximum(lo, delta)
            hi = np.maximum(hi, lo)
        acc = np.zeros((nb * nU, 3))
        for k in range(lo.shape[1]):
            a, b = lo[:, k], hi[:, k]
            live = np.flatnonzero(b > a)
            if live.size == 0:
                continue
            half, mid = 0.5 * (b[live] - a[live]), 0.5 * (b[live] + a[live])
            s = mid[:, None] + half[:, None] * xs
            ys = origins[live][:, None, :] + s[..., None] * dirs[live][:, None, :]
            vy = V(ys)
            acc[live] += half[:, None] * np.einsum("ijk,j->ik", vy, ws)
        contrib = np.cross(acc, -dirs) * np.tile(wU, nb)[:, None]
        out[start:start + nb] = contrib.reshape(nb, nU, 3).sum(axis=1) / FOUR_PI
    return out[0] if single else out


def biot_savart_field(V: VectorField, orders=(24, 48, 48), delta: float = 0.0) -> VectorField:
    return VectorField(lambda p: biot_savart(V, p, orders, delta), V.domain, label=f"BS({V.label})")


def helicity_arnold(V: VectorField, cfg: MCConfig, orders=(4, 8, 16), check=True) -> HelicityReport:
    if check:
        check_divergence_free(V)

    def integrand(x):
        return np.einsum("ij,ij->i", V(x), biot_savart(V, x, orders))

    est = mc_volume(V.domain, integrand, cfg)
    return HelicityReport("arnold", est, _echo(cfg, orders=list(orders)))


def bs_selfadjoint_defect(V: VectorField, W: VectorField, cfg: MCConfig, orders=(4, 8, 16)) -> Estimate:
    """Estimate of int V . BS(W) - int BS(V) . W over the common domain."""
    if V.domain is not W.domain:
        raise ValueError("V and W must share one domain")

    def integrand(x):
        return np.einsum("ij,ij->i", V(x), biot_savart(W, x, orders)) - np.einsum(
            "ij,ij->i", biot_savart(V, x, orders), W(x)
        )

    return mc_volume(V.domain, integrand, cfg)


def helicity(V: VectorField, method: str = "six_d", cfg: MCConfig | None = None, **kw) -> HelicityReport:
    """Dispatch on ``method`` in {"six_d", "four_d", "arnold"} (also "6d", "4d")."""
    cfg = cfg or MCConfig()
    m = {"6d": "six_d", "4d": "four_d"}.get(method, method)
    if m == "six_d":
        return helicity_6d(V, cfg, **kw)
    if m == "four_d":
        return helicity_4d(V, cfg, **kw)
    if m == "arnold":
        return helicity_arnold(V, cfg, **kw)
    raise ValueError(f"unknown helicity method {method!r}")
