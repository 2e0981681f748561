"""Domains, toroidal coordinates, closed curves and spanning surfaces.

Points are plain numpy arrays with a trailing axis of length 3; every
function here accepts a single point of shape ``(3,)`` or a batch of shape
``(N, 3)`` and returns results of the matching shape.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Union

import numpy as np

TWO_PI = 2.0 * np.pi
BOUNDARY_TOL = 1e-12


class GeometryError(ValueError):
    """Invalid geometric construction or evaluation."""


class OutsideDomainError(GeometryError):
    """A point lies outside the region an operation is defined on."""


def _rigid(rotation, translation):
    rot = np.eye(3) if rotation is None else np.asarray(rotation, dtype=float)
    tr = np.zeros(3) if translation is None else np.asarray(translation, dtype=float)
    if rot.shape != (3, 3) or tr.shape != (3,):
        raise GeometryError("placement needs a 3x3 rotation and a length-3 translation")
    if not np.allclose(rot @ rot.T, np.eye(3), atol=1e-10) or np.linalg.det(rot) <= 0:
        raise GeometryError("rotation must be orthogonal with determinant +1")
    return rot, tr


def rotation_matrix(axis, angle):
    """Rotation about ``axis`` by ``angle`` (right-hand rule)."""
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * (K @ K)


class ToroidalCoords(NamedTuple):
    r: np.ndarray
    theta: np.ndarray
    phi: np.ndarray


@dataclass(frozen=True, eq=False)
class SolidTorus:
    """Solid torus of revolution, core circle of radius ``major_radius``.

    In its own frame the core lies in the xy-plane centred at the origin;
    ``rotation``/``translation`` place that frame in space
    (``world = rotation @ local + translation``).
    """

    major_radius: float
    minor_radius: float
    rotation: np.ndarray = field(default=None)
    translation: np.ndarray = field(default=None)

    def __post_init__(self):
        A, R = float(self.major_radius), float(self.minor_radius)
        if not (np.isfinite(A) and np.isfinite(R)) or A <= 0:
            raise GeometryError("major_radius must be a positive finite number")
        if not 0 < R:
            raise GeometryError("minor_radius must be positive")
        if not R < A:
            raise GeometryError("minor_radius must be < major_radius")
        rot, tr = _rigid(self.rotation, self.translation)
        rot.setflags(write=False)
        tr.setflags(write=False)
        object.__setattr__(self, "major_radius", A)
        object.__setattr__(self, "minor_radius", R)
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", tr)

    @property
    def A(self):
        return self.major_radius

    @property
    def R(self):
        return self.minor_radius

    def to_local(self, p):
        return (np.asarray(p, dtype=float) - self.translation) @ self.rotation

    def to_world(self, q):
        return np.asarray(q, dtype=float) @ self.rotation.T + self.translation

    def placed(self, rotation=None, translation=None):
        """Compose a further rigid motion on top of the current placement."""
        rot, tr = _rigid(rotation, translation)
        return SolidTorus(self.A, self.R, rot @ self.rotation, rot @ self.translation + tr)

    def __repr__(self):
        return f"SolidTorus(major_radius={self.A}, minor_radius={self.R})"


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        if c.shape != (3,) or not np.all(np.isfinite(c)):
            raise GeometryError("ball center must be a finite 3-vector")
        if not float(self.radius) > 0:
            raise GeometryError("ball radius must be positive")
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))


@dataclass(frozen=True, eq=False)
class DisjointPair:
    """Two solid tori with disjoint closures."""

    first: SolidTorus
    second: SolidTorus
    n_probe: int = 10_000

    def __post_init__(self):
        gap = _probe_gap(self.first, self.second, self.n_probe)
        if gap <= 1e-9:
            raise GeometryError(f"tori of a DisjointPair overlap (probed gap {gap:.3g})")

    @property
    def members(self):
        return (self.first, self.second)


Domain = Union[SolidTorus, Ball, DisjointPair]


def _probe_gap(t1, t2, n_probe):
    # min over sampled core points of (core distance) minus tube radii
    s = np.linspace(0.0, TWO_PI, int(np.sqrt(n_probe)) + 1)[:-1]
    c1 = toroidal_to_cartesian(t1, ToroidalCoords(0 * s, s, 0 * s))
    c2 = toroidal_to_cartesian(t2, ToroidalCoords(0 * s, s, 0 * s))
    d = np.linalg.norm(c1[:, None, :] - c2[None, :, :], axis=-1).min()
    return d - t1.R - t2.R


# ---------------------------------------------------------------------------
# toroidal chart


def toroidal_to_cartesian(frame: SolidTorus, c: ToroidalCoords, *, check=True):
    r, theta, phi = (np.asarray(v, dtype=float) for v in c)
    if check and np.any(r > frame.R * (1 + BOUNDARY_TOL)):
        raise OutsideDomainError("r exceeds the tube radius")
    return frame.to_world(_local_point(frame.A, r, theta, phi))


def _local_point(A, r, theta, phi):
    # phi turns from the outward equator towards -z: this orientation makes
    # (1,1) curves link positively and j > 0 twists add helicity
    h = A + r * np.cos(phi)
    return np.stack(np.broadcast_arrays(h * np.cos(theta), h * np.sin(theta), -r * np.sin(phi)), axis=-1)


def _local_toroidal(frame, q):
    rho = np.hypot(q[..., 0], q[..., 1])
    theta = np.mod(np.arctan2(q[..., 1], q[..., 0]), TWO_PI)
    dr = rho - frame.A
    r = np.hypot(dr, q[..., 2])
    phi = np.mod(np.arctan2(-q[..., 2], dr), TWO_PI)
    return r, theta, phi


def cartesian_to_toroidal(frame: SolidTorus, p) -> ToroidalCoords:
    q = frame.to_local(p)
    r, theta, phi = _local_toroidal(frame, q)
    if np.any(r > frame.R * (1 + BOUNDARY_TOL) + BOUNDARY_TOL):
        raise OutsideDomainError("point lies outside the solid torus")
    return ToroidalCoords(r, theta, phi)


def toroidal_frame(frame: SolidTorus, c: ToroidalCoords):
    """Coordinate vectors (d/dr, d/dtheta, d/dphi) in world coordinates."""
    r, theta, phi = (np.asarray(v, dtype=float) for v in c)
    ct, st, cp, sp = np.cos(theta), np.sin(theta), np.cos(phi), np.sin(phi)
    h = frame.A + r * cp
    z = np.zeros_like(h)
    e_r = np.stack([cp * ct, cp * st, -sp], axis=-1)
    e_t = np.stack([-h * st, h * ct, z], axis=-1)
    e_p = np.stack([-r * sp * ct, -r * sp * st, -r * cp], axis=-1)
    R = frame.rotation
    return e_r @ R.T, e_t @ R.T, e_p @ R.T


# ---------------------------------------------------------------------------
# membership, volume, sampling


def domain_contains(d: Domain, p):
    p = np.asarray(p, dtype=float)
    if isinstance(d, SolidTorus):
        r, _, _ = _local_toroidal(d, d.to_local(p))
        return r <= d.R + BOUNDARY_TOL * max(1.0, d.R)
    if isinstance(d, Ball):
        return np.linalg.norm(p - d.center, axis=-1) <= d.radius + BOUNDARY_TOL * max(1.0, d.radius)
    if isinstance(d, DisjointPair):
        return domain_contains(d.first, p) | domain_contains(d.second, p)
    raise TypeError(f"unknown domain {d!r}")


def domain_volume(d: Domain) -> float:
    if isinstance(d, SolidTorus):
        return 2.0 * np.pi**2 * d.A * d.R**2
    if isinstance(d, Ball):
        return 4.0 * np.pi * d.radius**3 / 3.0
    if isinstance(d, DisjointPair):
        return domain_volume(d.first) + domain_volume(d.second)
    raise TypeError(f"unknown domain {d!r}")


def bounding_box(d: Domain):
    """Axis-aligned (lo, hi) corners enclosing the region."""
    if isinstance(d, Ball):
        return d.center - d.radius, d.center + d.radius
    if isinstance(d, SolidTorus):
        # core circle extent plus the tube radius in every direction
        u, v = d.rotation[:, 0], d.rotation[:, 1]
        half = d.A * np.hypot(u, v) + d.R
        return d.translation - half, d.translation + half
    if isinstance(d, DisjointPair):
        (a0, a1), (b0, b1) = bounding_box(d.first), bounding_box(d.second)
        return np.minimum(a0, b0), np.maximum(a1, b1)
    raise TypeError(f"unknown domain {d!r}")


def domain_diameter(d: Domain) -> float:
    lo, hi = bounding_box(d)
    return float(np.linalg.norm(hi - lo))


def sample_uniform(d: Domain, rng: np.random.Generator, size=None):
    """Uniform samples from the region; ``size=None`` returns one point."""
    n = 1 if size is None else int(size)
    pts = _sample(d, rng, n)
    return pts[0] if size is None else pts


def _sample(d, rng, n):
    if isinstance(d, SolidTorus):
        return _sample_torus(d, rng, n)
    if isinstance(d, Ball):
        v = rng.standard_normal((n, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        rad = d.radius * rng.random(n) ** (1.0 / 3.0)
        return d.center + v * rad[:, None]
    if isinstance(d, DisjointPair):
        w = domain_volume(d.first) / domain_volume(d)
        pick_first = rng.random(n) < w
        out = np.empty((n, 3))
        n1 = int(pick_first.sum())
        out[pick_first] = _sample_torus(d.first, rng, n1)
        out[~pick_first] = _sample_torus(d.second, rng, n - n1)
        return out
    raise TypeError(f"unknown domain {d!r}")


def _sample_torus(t, rng, n):
    # proposal density ~ r on the disk (r = R sqrt(u)), accepted with
    # probability (A + r cos phi)/(A + R) to reach the volume density
    A, R = t.A, t.R
    out = np.empty((n, 3))
    filled = 0
    while filled < n:
        m = max(64, int(1.1 * (n - filled) * (A + R) / A))
        u, theta, phi, acc = rng.random(m), TWO_PI * rng.random(m), TWO_PI * rng.random(m), rng.random(m)
        r = R * np.sqrt(u)
        keep = acc * (A + R) < A + r * np.cos(phi)
        k = min(int(keep.sum()), n - filled)
        idx = np.flatnonzero(keep)[:k]
        out[filled:filled + k] = toroidal_to_cartesian(
            t, ToroidalCoords(r[idx], theta[idx], phi[idx]), check=False
        )
        filled += k
    return out


def retract_inside(d: Domain, p, margin: float):
    """Move points lying within ``margin`` of the boundary inward so that a
    ball of radius ``margin`` around them fits in the region."""
    p = np.asarray(p, dtype=float)
    if isinstance(d, Ball):
        v = p - d.center
        dist = np.linalg.norm(v, axis=-1, keepdims=True)
        lim = d.radius - margin
        scale = np.where(dist > lim, lim / np.maximum(dist, 1e-300), 1.0)
        return d.center + v * scale
    if isinstance(d, SolidTorus):
        return _retract_torus(d, p, margin)
    if isinstance(d, DisjointPair):
        single = p.ndim == 1
        p = np.atleast_2d(p)
        in1 = np.asarray(domain_contains(d.first, p))
        out = p.copy()
        if in1.any():
            out[in1] = _retract_torus(d.first, p[in1], margin)
        if (~in1).any():
            out[~in1] = _retract_torus(d.second, p[~in1], margin)
        return out[0] if single else out
    raise TypeError(f"unknown domain {d!r}")


def _retract_torus(t, p, margin):
    r, theta, phi = cartesian_to_toroidal(t, p)
    r = np.minimum(r, t.R - margin)
    return toroidal_to_cartesian(t, ToroidalCoords(r, theta, phi))


# ---------------------------------------------------------------------------
# line/domain intersection


def _torus_line_roots(t, p0, u):
    """Real roots s of the torus quartic along the lines p0 + s*u (batched).

    Returns an (N, 4) array with NaN for complex roots.
    """
    q0 = t.to_local(p0)
    w = np.broadcast_to(np.asarray(u, dtype=float) @ t.rotation, q0.shape)
    A, R = t.A, t.R
    # |q|^2 = a s^2 + b s + c ; (|q|^2 + A^2 - R^2)^2 - 4A^2 (qx^2 + qy^2) = 0
    a = np.einsum("...i,...i", w, w)
    b = 2 * np.einsum("...i,...i", q0, w)
    c = np.einsum("...i,...i", q0, q0)
    k = A * A - R * R
    ax = w[..., 0] ** 2 + w[..., 1] ** 2
    bx = 2 * (q0[..., 0] * w[..., 0] + q0[..., 1] * w[..., 1])
    cx = q0[..., 0] ** 2 + q0[..., 1] ** 2
    c0 = c + k
    coeffs = np.stack(
        [
            a * a,
            2 * a * b,
            b * b + 2 * a * c0 - 4 * A * A * ax,
            2 * b * c0 - 4 * A * A * bx,
            c0 * c0 - 4 * A * A * cx,
        ],
        axis=-1,
    )
    coeffs = coeffs.reshape(-1, 5)
    lead = coeffs[:, :1]
    monic = coeffs[:, 1:] / lead
    comp = np.zeros((monic.shape[0], 4, 4))
    comp[:, 0, :] = -monic
    comp[:, 1, 0] = comp[:, 2, 1] = comp[:, 3, 2] = 1.0
    roots = np.linalg.eigvals(comp)
    real = np.abs(roots.imag) < 1e-6 * (1 + np.abs(roots.real))
    s = np.where(real, roots.real, np.nan)
    # two Newton polishes on the real candidates
    for _ in range(2):
        f = np.zeros_like(s)
        df = np.zeros_like(s)
        for j in range(5):
            df = df * s + f
            f = f * s + coeffs[:, j : j + 1]
        step = np.where(np.abs(df) > 1e-300, f / np.where(df == 0, 1, df), 0.0)
        s = s - step
    return np.sort(s, axis=1).reshape(q0.shape[:-1] + (4,))


def ray_segments(d: Domain, p0, u, max_segments=None):
    """Intervals of s > 0 with p0 + s*u inside ``d`` for a batch of rays.

    Returns ``(lo, hi)`` arrays of shape (N, K); unused slots have lo == hi.
    ``p0`` must lie in the closed region.
    """
    p0 = np.atleast_2d(np.asarray(p0, dtype=float))
    u = np.broadcast_to(np.asarray(u, dtype=float), p0.shape)
    if isinstance(d, Ball):
        v = p0 - d.center
        a = np.einsum("ij,ij->i", u, u)
        b = np.einsum("ij,ij->i", u, v)
        c = np.einsum("ij,ij->i", v, v) - d.radius**2
        disc = np.maximum(b * b - a * c, 0.0)
        hi = np.maximum((-b + np.sqrt(disc)) / a, 0.0)
        return np.zeros((len(p0), 1)), hi[:, None]
    if isinstance(d, SolidTorus):
        return _torus_ray_segments(d, p0, u)
    if isinstance(d, DisjointPair):
        lo1, hi1 = _torus_ray_segments(d.first, p0, u)
        lo2, hi2 = _torus_ray_segments(d.second, p0, u)
        return np.concatenate([lo1, lo2], axis=1), np.concatenate([hi1, hi2], axis=1)
    raise TypeError(f"unknown domain {d!r}")


def _torus_ray_segments(t, p0, u):
    roots = _torus_line_roots(t, p0, u)
    n = len(p0)
    pos = np.where(np.isfinite(roots) & (roots > 0), roots, np.inf)
    pos = np.sort(pos, axis=1)
    # breakpoints 0 < s1 < s2 ... ; a segment (b_i, b_{i+1}) is inside iff its midpoint is
    bps = np.concatenate([np.zeros((n, 1)), pos], axis=1)
    lo, hi = bps[:, :-1], bps[:, 1:]
    finite = np.isfinite(hi)
    mid = np.where(finite, 0.5 * (lo + hi), 0.0)
    pts = p0[:, None, :] + mid[..., None] * u[:, None, :]
    inside = domain_contains(t, pts) & finite & (hi > lo)
    lo = np.where(inside, lo, 0.0)
    hi = np.where(inside, hi, 0.0)
    return lo, hi


def vertical_extent(d: Domain, x):
    """Closed intervals of heights y3 > x3 with (x1, x2, y3) in ``d``."""
    x = np.asarray(x, dtype=float)
    if not np.all(domain_contains(d, x)):
        raise OutsideDomainError("vertical_extent needs a point inside the domain")
    single = x.ndim == 1
    lo, hi = ray_segments(d, np.atleast_2d(x), np.array([0.0, 0.0, 1.0]))
    x3 = np.atleast_2d(x)[:, 2:3]
    lo, hi = lo + x3, hi + x3
    if single:
        return [(float(a), float(b)) for a, b in sorted(zip(lo[0], hi[0])) if b - a > BOUNDARY_TOL]
    return lo, hi


# ---------------------------------------------------------------------------
# curves


class ParametricLoop:
    """Closed curve t -> point(t) on [0, 2pi) with tangent d point/dt.

    Either analytic (``point``/``tangent`` callables) or a closed polyline
    built with :meth:`from_polyline`.
    """

    def __init__(self, point: Callable, tangent: Callable, nodes=None, label=""):
        self._point = point
        self._tangent = tangent
        self.nodes = None if nodes is None else np.asarray(nodes, dtype=float)
        self.label = label

    def point(self, t):
        return self._point(np.asarray(t, dtype=float))

    def tangent(self, t):
        return self._tangent(np.asarray(t, dtype=float))

    @property
    def is_polyline(self):
        return self.nodes is not None

    @classmethod
    def from_polyline(cls, nodes, label=""):
        P = np.asarray(nodes, dtype=float)
        if P.ndim != 2 or P.shape[1] != 3 or len(P) < 3:
            raise GeometryError("a polyline loop needs at least 3 nodes in R^3")
        if np.allclose(P[0], P[-1]):
            P = P[:-1]
        n = len(P)
        seg = np.roll(P, -1, axis=0) - P
        if np.any(np.linalg.norm(seg, axis=1) == 0):
            raise GeometryError("repeated consecutive polyline nodes")
        dt = TWO_PI / n

        def split(t):
            u = np.mod(t, TWO_PI) / dt
            i = np.minimum(np.floor(u).astype(int), n - 1)
            return i, u - i

        def point(t):
            i, f = split(t)
            return P[i] + f[..., None] * seg[i]

        def tangent(t):
            i, _ = split(t)
            return seg[i] / dt

        return cls(point, tangent, nodes=P, label=label)

    def sample(self, n):
        """Nodes of the closed polyline with ``n`` segments (its own nodes for
        a polyline loop when ``n`` is None)."""
        if n is None and self.is_polyline:
            return self.nodes
        t = TWO_PI * np.arange(n) / n
        return self.point(t)

    def cover(self, m: int) -> "ParametricLoop":
        """The loop traversed ``m`` times."""
        m = int(m)
        if m < 1:
            raise GeometryError("cover multiplicity must be >= 1")
        if m == 1:
            return self
        nodes = None if self.nodes is None else np.tile(self.nodes, (m, 1))
        return ParametricLoop(
            lambda t: self._point(m * t), lambda t: m * self._tangent(m * t),
            nodes=nodes, label=f"{self.label}^{m}",
        )

    def reversed(self) -> "ParametricLoop":
        nodes = None if self.nodes is None else self.nodes[::-1].copy()
        return ParametricLoop(
            lambda t: self._point(TWO_PI - t), lambda t: -self._tangent(TWO_PI - t),
            nodes=nodes, label=f"-{self.label}",
        )

    def transformed(self, rotation=None, translation=None) -> "ParametricLoop":
        rot, tr = _rigid(rotation, translation)
        nodes = None if self.nodes is None else self.nodes @ rot.T + tr
        return ParametricLoop(
            lambda t: self._point(t) @ rot.T + tr, lambda t: self._tangent(t) @ rot.T,
            nodes=nodes, label=self.label,
        )

    def __repr__(self):
        kind = f"polyline[{len(self.nodes)}]" if self.is_polyline else "analytic"
        return f"ParametricLoop({self.label!r}, {kind})"


def circle_loop(center, radius, u_axis, v_axis, label="circle"):
    """t -> center + radius (cos t u + sin t v)."""
    c = np.asarray(center, dtype=float)
    u = np.asarray(u_axis, dtype=float)
    v = np.asarray(v_axis, dtype=float)

    def point(t):
        t = np.asarray(t)[..., None]
        return c + radius * (np.cos(t) * u + np.sin(t) * v)

    def tangent(t):
        t = np.asarray(t)[..., None]
        return radius * (-np.sin(t) * u + np.cos(t) * v)

    return ParametricLoop(point, tangent, label=label)


def hopf_pair():
    """Unit circle in the xy-plane about the origin and unit circle in the
    xz-plane about (1, 0, 0).

    Each circle runs counterclockwise about the positive normal of its
    coordinate plane (+z for xy, +y for zx); the pair links with Lk = +1.
    """
    a = circle_loop([0, 0, 0], 1.0, [1, 0, 0], [0, 1, 0], label="hopf_a")
    b = circle_loop([1, 0, 0], 1.0, [0, 0, 1], [1, 0, 0], label="hopf_b")
    return a, b


def torus_knot_loop(frame: SolidTorus, r0: float, p: int, q: int, phi0: float = 0.0) -> ParametricLoop:
    """Curve t -> (r0, p t, q t + phi0) in toroidal coordinates of ``frame``."""
    if not 0 < r0 < frame.R:
        raise GeometryError("r0 must satisfy 0 < r0 < minor_radius")
    p, q = int(p), int(q)
    A, rot = frame.A, frame.rotation

    def point(t):
        return toroidal_to_cartesian(frame, ToroidalCoords(r0, p * t, q * t + phi0))

    def tangent(t):
        th, ph = p * t, q * t + phi0
        h = A + r0 * np.cos(ph)
        dh = -r0 * np.sin(ph) * q
        loc = np.stack(
            np.broadcast_arrays(
                dh * np.cos(th) - h * np.sin(th) * p,
                dh * np.sin(th) + h * np.cos(th) * p,
                -r0 * np.cos(ph) * q,
            ),
            axis=-1,
        )
        return loc @ rot.T

    return ParametricLoop(point, tangent, label=f"T({p},{q})@r={r0}")


# ---------------------------------------------------------------------------
# spanning surfaces


@dataclass(frozen=True, eq=False)
class MeridianDisk:
    """Disk {(r, theta0, phi): r <= R}; orientation +1 means the normal points
    along increasing theta."""

    torus: SolidTorus
    theta0: float
    orientation: int = 1

    def __post_init__(self):
        if self.orientation not in (1, -1):
            raise GeometryError("orientation must be +1 or -1")

    def contains(self, p, tol=1e-9):
        r, theta, _ = _local_toroidal(self.torus, self.torus.to_local(p))
        dth = np.abs(np.angle(np.exp(1j * (theta - self.theta0))))
        return (r <= self.torus.R + tol) & ((dth < tol) | (r < tol))

    def normal(self):
        t0 = self.theta0
        return self.orientation * (self.torus.rotation @ np.array([-np.sin(t0), np.cos(t0), 0.0]))


@dataclass(frozen=True, eq=False)
class SurfacePatch:
    """Surface (u, v) in [0,1]^2 -> point; ``normal`` returns the oriented,
    area-weighted normal d point/du x d point/dv."""

    point: Callable
    normal: Callable


SpanningSurface = Union[MeridianDisk, SurfacePatch]


def meridian_disk(frame: SolidTorus, theta0: float, orientation: int = 1) -> MeridianDisk:
    return MeridianDisk(frame, float(theta0), int(orientation))
