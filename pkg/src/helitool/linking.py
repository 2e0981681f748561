"""Linking numbers: Gauss integral, signed crossings, asymptotic linking."""

from __future__ import annotations

import numpy as np

from .geometry import ParametricLoop, rotation_matrix
from .integrate import curve_pair_quadrature

FOUR_PI = 4.0 * np.pi


class LinkingError(ValueError):
    pass


class LinkingSingularityError(LinkingError):
    """The two loops (nearly) intersect."""


class NonConvergenceError(LinkingError):
    """The Gauss integral is not close enough to an integer."""


class GenericityError(LinkingError):
    """No generic projection direction was found."""


def _scale(a, b, n):
    pts = np.concatenate([a.sample(n), b.sample(n)])
    return float(np.max(np.ptp(pts, axis=0)))


def gauss_linking(a: ParametricLoop, b: ParametricLoop, n: int = 256) -> float:
    """(1/4pi) double integral of a'(s) x b'(t) . (a(s) - b(t))/|a(s) - b(t)|^3."""
    s = 2 * np.pi * np.arange(n) / n
    gap = np.min(np.linalg.norm(a.point(s)[:, None, :] - b.point(s)[None, :, :], axis=-1))
    if gap < 1e-6 * _scale(a, b, n):
        raise LinkingSingularityError(f"loops come within {gap:.3g} of each other")

    def kernel(s, t):
        d = a.point(s) - b.point(t)
        cross = np.cross(a.tangent(s), b.tangent(t))
        return np.einsum("...k,...k", cross, d) / np.linalg.norm(d, axis=-1) ** 3

    return curve_pair_quadrature(a, b, kernel, n) / FOUR_PI


def linking_integer(a: ParametricLoop, b: ParametricLoop, n: int = 256, tol: float = 0.05) -> int:
    val = gauss_linking(a, b, n)
    k = int(round(val))
    if abs(val - k) >= tol:
        raise NonConvergenceError(f"Gauss integral {val:.6f} is not within {tol} of an integer; raise n")
    return k


def _segments_2d(P, basis):
    Q = P @ basis.T  # columns: u, v, height
    return Q, np.roll(Q, -1, axis=0) - Q


def _crossing_sum(Pa, Pb, d, tol=1e-10):
    """Sum of signed crossings between two closed polylines projected along d.

    Returns None when the projection is not generic.
    """
    d = d / np.linalg.norm(d)
    helper = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(d, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(d, e1)
    basis = np.stack([e1, e2, d])
    A0, dA = _segments_2d(Pa, basis)
    B0, dB = _segments_2d(Pb, basis)
    # solve A0 + s dA = B0 + t dB in the projection plane for all segment pairs
    ax, ay = dA[:, None, 0], dA[:, None, 1]
    bx, by = dB[None, :, 0], dB[None, :, 1]
    den = ax * by - ay * bx
    rx = B0[None, :, 0] - A0[:, None, 0]
    ry = B0[None, :, 1] - A0[:, None, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (rx * by - ry * bx) / den
        t = (rx * ay - ry * ax) / den
    parallel = np.abs(den) <= tol * np.abs(ax * ax + ay * ay) ** 0.5 * np.abs(bx * bx + by * by) ** 0.5
    near = (s > -tol) & (s < 1 + tol) & (t > -tol) & (t < 1 + tol)
    # touching collinear pieces or crossings through a vertex are degenerate
    if np.any(parallel & (np.abs(rx * ay - ry * ax) <= tol)):
        overlap = parallel & (np.abs(rx * ay - ry * ax) <= tol)
        if _collinear_overlap(A0, dA, B0, dB, overlap):
            return None
    hit = near & ~parallel
    edge = hit & ((s < tol) | (s > 1 - tol) | (t < tol) | (t > 1 - tol))
    if edge.any():
        return None
    i, j = np.nonzero(hit)
    if i.size == 0:
        return 0
    ha = A0[i, 2] + s[i, j] * dA[i, 2]
    hb = B0[j, 2] + t[i, j] * dB[j, 2]
    gap = ha - hb
    if np.any(np.abs(gap) < tol * (1 + np.abs(ha))):
        return None
    # sign of a crossing: (over x under) . d, viewer at +d
    orient = np.sign(den[i, j])  # sign of (dA x dB) . d
    sign = np.where(gap > 0, orient, -orient)
    return int(np.sum(sign))


def _collinear_overlap(A0, dA, B0, dB, mask):
    for i, j in zip(*np.nonzero(mask)):
        a0, a1 = A0[i, :2], A0[i, :2] + dA[i, :2]
        b0, b1 = B0[j, :2], B0[j, :2] + dB[j, :2]
        axis = a1 - a0
        L = axis @ axis
        if L == 0:
            continue
        pa = sorted([0.0, 1.0])
        pb = sorted([(b0 - a0) @ axis / L, (b1 - a0) @ axis / L])
        if pb[0] <= pa[1] and pa[0] <= pb[1]:
            return True
    return False


def signed_crossing_linking(
    a: ParametricLoop,
    b: ParametricLoop,
    direction=(0.0, 0.0, 1.0),
    n_segments: int = 512,
    retries: int = 3,
) -> int:
    """Linking number as half the signed crossing count of the projection.

    Analytic loops are sampled as closed polylines with ``n_segments``
    segments; polyline loops use their own nodes.  A non-generic projection
    is retried with a perturbed direction and doubled resolution.
    """
    d = np.asarray(direction, dtype=float)
    n = int(n_segments)
    # deterministic perturbation sequence
    tilts = [(np.array([1.0, 2.0, 3.0]), 1e-3), (np.array([-3.0, 1.0, 2.0]), 7e-3), (np.array([2.0, -3.0, 1.0]), 3e-2)]
    for attempt in range(retries + 1):
        Pa = a.nodes if a.is_polyline else a.sample(n)
        Pb = b.nodes if b.is_polyline else b.sample(n)
        total = _crossing_sum(Pa, Pb, d)
        if total is not None:
            if total % 2:
                raise GenericityError("odd crossing count between closed curves")
            return total // 2
        if attempt < retries:
            axis, angle = tilts[attempt % len(tilts)]
            d = rotation_matrix(np.cross(d, axis) if np.linalg.norm(np.cross(d, axis)) > 0 else axis, angle) @ d
            n *= 2
    raise GenericityError(f"no generic projection after {retries} retries")


def asymptotic_linking(a: ParametricLoop, b: ParametricLoop, p: int = 1, q: int = 1, n: int | None = None) -> float:
    """Linking of the p-fold cover of a with the q-fold cover of b, divided by
    the product of trajectory times 4 pi^2 p q (period-2pi orbits)."""
    p, q = int(p), int(q)
    n = 256 * max(p, q) if n is None else int(n)
    lk = linking_integer(a.cover(p), b.cover(q), n)
    return lk / (FOUR_PI * np.pi * p * q)
