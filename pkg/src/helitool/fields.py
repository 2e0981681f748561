"""Divergence-free vector fields, diffeomorphisms and flux."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .geometry import (
    TWO_PI,
    DisjointPair,
    Domain,
    GeometryError,
    MeridianDisk,
    OutsideDomainError,
    SolidTorus,
    SurfacePatch,
    ToroidalCoords,
    _local_point,
    _local_toroidal,
    domain_contains,
    domain_diameter,
)


class VectorField:
    """Pointwise evaluator V: R^3 -> R^3 attached to a domain.

    ``func`` maps an (N, 3) array to an (N, 3) array; calling the field also
    accepts a single point.
    """

    def __init__(self, func: Callable, domain: Domain, label: str = ""):
        self._func = func
        self.domain = domain
        self.label = label

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        if p.ndim == 1:
            return self._func(p[None, :])[0]
        flat = p.reshape(-1, 3)
        return self._func(flat).reshape(p.shape)

    eval = __call__

    def scaled(self, c: float) -> "VectorField":
        c = float(c)
        return VectorField(lambda p: c * self._func(p), self.domain, f"{c}*{self.label}")

    def __mul__(self, c):
        return self.scaled(c)

    __rmul__ = __mul__

    def __add__(self, other: "VectorField") -> "VectorField":
        if other.domain is not self.domain:
            raise GeometryError("fields live on different domains")
        f, g = self._func, other._func
        return VectorField(lambda p: f(p) + g(p), self.domain, f"({self.label}+{other.label})")

    def __repr__(self):
        return f"VectorField({self.label!r})"


def longitudinal_field(frame: SolidTorus, scale: float = 1.0) -> VectorField:
    """The rotation field d/dtheta, ``scale * (-y, x, 0)`` in the torus frame."""
    rot, tr = frame.rotation, frame.translation
    gen = scale * (rot @ np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]) @ rot.T)

    def func(p):
        return (p - tr) @ gen.T

    return VectorField(func, frame, label=f"longitudinal(scale={scale})")


def piecewise_field(pair: DisjointPair, first: VectorField, second: VectorField) -> VectorField:
    """Field on a two-tube domain built from one field per tube."""

    def func(p):
        in1 = domain_contains(pair.first, p)
        out = np.empty_like(p)
        if in1.any():
            out[in1] = first._func(p[in1])
        if (~in1).any():
            out[~in1] = second._func(p[~in1])
        return out

    return VectorField(func, pair, label=f"[{first.label} | {second.label}]")


# ---------------------------------------------------------------------------
# diffeomorphisms


class DiffeoWithJacobian:
    """Orientation-preserving map with analytic Jacobian and inverse."""

    def __init__(self, apply: Callable, jacobian: Callable, inverse_apply: Callable, domain: Domain, label=""):
        self._apply = apply
        self._jacobian = jacobian
        self._inverse = inverse_apply
        self.domain = domain
        self.label = label

    def apply(self, p):
        return self._apply(np.asarray(p, dtype=float))

    def jacobian(self, p):
        return self._jacobian(np.asarray(p, dtype=float))

    def inverse_apply(self, p):
        return self._inverse(np.asarray(p, dtype=float))

    def __matmul__(self, other: "DiffeoWithJacobian") -> "DiffeoWithJacobian":
        """Composition ``self @ other`` = self after other."""
        f, g = self, other
        return DiffeoWithJacobian(
            lambda p: f.apply(g.apply(p)),
            lambda p: f.jacobian(g.apply(p)) @ g.jacobian(p),
            lambda p: g.inverse_apply(f.inverse_apply(p)),
            g.domain,
            label=f"{f.label}o{g.label}",
        )

    def __repr__(self):
        return f"DiffeoWithJacobian({self.label!r})"


def identity_map(domain: Domain) -> DiffeoWithJacobian:
    return DiffeoWithJacobian(
        lambda p: p.copy(),
        lambda p: np.broadcast_to(np.eye(3), p.shape[:-1] + (3, 3)).copy(),
        lambda p: p.copy(),
        domain,
        label="id",
    )


def dehn_twist_map(frame: SolidTorus, j: int) -> DiffeoWithJacobian:
    """(r, theta, phi) -> (r, theta, phi + j*theta) on the solid torus."""
    j = int(j)
    A, R, rot = frame.A, frame.R, frame.rotation
    tol = 1e-9 * (A + R)

    def coords(p):
        q = frame.to_local(p)
        r, theta, phi = _local_toroidal(frame, q)
        if np.any(r > R + tol):
            raise OutsideDomainError("Dehn twist evaluated outside the solid torus")
        return r, theta, phi

    def shifted(p, sign):
        r, theta, phi = coords(p)
        # theta in [0, 2pi): the shift j*theta is continuous away from theta=0,
        # where it jumps by 2*pi*j and so leaves the point unchanged
        return frame.to_world(_local_point(A, r, theta, phi + sign * j * theta))

    def jacobian(p):
        r, theta, phi = coords(p)
        phi2 = phi + j * theta
        er, et, ep = _unit_frame(theta, phi)
        er2, et2, ep2 = _unit_frame(theta, phi2)
        h = A + r * np.cos(phi)
        h2 = A + r * np.cos(phi2)
        # J = M(q') T M(q)^-1 with M the chart differential and T the twist
        J = (
            er2[..., :, None] * er[..., None, :]
            + (h2 / h)[..., None, None] * et2[..., :, None] * et[..., None, :]
            + (j * r / h)[..., None, None] * ep2[..., :, None] * et[..., None, :]
            + ep2[..., :, None] * ep[..., None, :]
        )
        return rot @ J @ rot.T

    return DiffeoWithJacobian(
        lambda p: shifted(p, +1), jacobian, lambda p: shifted(p, -1), frame, label=f"twist({j})"
    )


def _unit_frame(theta, phi):
    ct, st, cp, sp = np.cos(theta), np.sin(theta), np.cos(phi), np.sin(phi)
    z = np.zeros_like(ct)
    er = np.stack([cp * ct, cp * st, -sp], axis=-1)
    et = np.stack([-st, ct, z], axis=-1)
    ep = np.stack([-sp * ct, -sp * st, -cp], axis=-1)
    return er, et, ep


def pushforward_density_field(f: DiffeoWithJacobian, V: VectorField) -> VectorField:
    """Field V' with V'(f(x)) = J(x) V(x) / det J(x)."""

    def func(y):
        x = f.inverse_apply(y)
        J = f.jacobian(x)
        v = np.einsum("...ij,...j->...i", J, V._func(x))
        return v / np.linalg.det(J)[..., None]

    return VectorField(func, V.domain, label=f"{f.label}_*{V.label}")


# ---------------------------------------------------------------------------
# finite differences


def default_fd_step(d: Domain) -> float:
    return 1e-5 * domain_diameter(d)


def _stencil(V, p, h):
    p = np.asarray(p, dtype=float)
    pts = p[..., None, :] + np.concatenate([h * np.eye(3), -h * np.eye(3)])
    if not np.all(domain_contains(V.domain, pts)):
        raise OutsideDomainError("finite-difference stencil leaves the domain")
    vals = V(pts)
    return (vals[..., :3, :] - vals[..., 3:, :]) / (2 * h)


def fd_jacobian(V: VectorField, p, h: float | None = None):
    """Central-difference Jacobian, entry [i, k] = dV_i/dx_k."""
    h = default_fd_step(V.domain) if h is None else h
    return np.swapaxes(_stencil(V, p, h), -1, -2)


def fd_divergence(V: VectorField, p, h: float | None = None):
    D = fd_jacobian(V, p, h)
    return np.trace(D, axis1=-2, axis2=-1)


def fd_curl(V: VectorField, p, h: float | None = None):
    D = fd_jacobian(V, p, h)
    return np.stack(
        [D[..., 2, 1] - D[..., 1, 2], D[..., 0, 2] - D[..., 2, 0], D[..., 1, 0] - D[..., 0, 1]], axis=-1
    )


# ---------------------------------------------------------------------------
# flux


def _gauss_legendre(n, a, b):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def flux(V: VectorField, S, order: int = 32) -> float:
    """Oriented flux of V through a spanning surface."""
    if isinstance(S, MeridianDisk):
        t = S.torus
        r, wr = _gauss_legendre(order, 0.0, t.R)
        n_phi = 2 * order
        phi = TWO_PI * np.arange(n_phi) / n_phi
        rr, pp = np.meshgrid(r, phi, indexing="ij")
        q = _local_point(t.A, rr, np.full_like(rr, S.theta0), pp)
        pts = t.to_world(q)
        vals = V(pts) @ S.normal()
        return float(np.einsum("ij,i->", vals * rr, wr) * TWO_PI / n_phi)
    if isinstance(S, SurfacePatch):
        u, w = _gauss_legendre(order, 0.0, 1.0)
        uu, vv = np.meshgrid(u, u, indexing="ij")
        pts = S.point(uu, vv)
        nrm = S.normal(uu, vv)
        vals = np.einsum("...i,...i", V(pts), nrm)
        return float(w @ vals @ w)
    raise TypeError(f"unsupported surface {S!r}")
