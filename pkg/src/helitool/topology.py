"""Boundary-homology data of diffeomorphisms and the helicity change law.

A diffeomorphism f of a tubular domain acts on the homology of the boundary.
In an Alexander basis (cycles s_i bounding outside, t_i bounding inside the
domain) that action is block lower-triangular [[I, 0], [C, I]]; only the
block C = (c_ij) matters for helicity:

    Hel(f_* alpha) - Hel(alpha) = sum_ij c_ij Flux(alpha, tau_i) Flux(alpha, tau_j)

where tau_i is a spanning surface with boundary t_i.  C is symmetric when the
form degree parameter k is odd and skew-symmetric when k is even.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class BoundaryHomologyData:
    n: int
    k: int
    C: np.ndarray = field(default=None)

    def __post_init__(self):
        if int(self.n) < 0:
            raise ValueError("n must be >= 0")
        if int(self.k) < 1:
            raise ValueError("k must be >= 1")
        C = np.zeros((self.n, self.n)) if self.C is None else np.array(self.C, dtype=float, ndmin=2)
        if self.n == 0:
            C = np.zeros((0, 0))
        if C.shape != (self.n, self.n):
            raise ValueError(f"C must be {self.n}x{self.n}, got {C.shape}")
        C.setflags(write=False)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "C", C)

    @property
    def ambient_dimension(self):
        return 2 * self.k + 1

    def to_dict(self):
        return {"n": self.n, "k": self.k, "C": self.C.tolist()}

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - {"n", "k", "C"}
        if unknown:
            raise ValueError(f"unknown keys in boundary data: {sorted(unknown)}")
        return cls(int(d["n"]), int(d["k"]), np.array(d["C"], dtype=float).reshape(int(d["n"]), int(d["n"])))


@dataclass(frozen=True)
class MatrixCheck:
    ok: bool
    expected: str
    max_asymmetry: float
    message: str = ""

    def __bool__(self):
        return self.ok


def validate_boundary_matrix(d: BoundaryHomologyData) -> MatrixCheck:
    """Check C = C^T for odd k, C = -C^T for even k (reported, never raised)."""
    if d.k % 2:
        expected, defect = "symmetric", d.C - d.C.T
    else:
        expected, defect = "skew-symmetric", d.C + d.C.T
    worst = float(np.max(np.abs(defect))) if d.n else 0.0
    ok = worst <= SYMMETRY_TOL
    msg = "" if ok else f"k={d.k} requires a {expected} C; max defect {worst:.3g}"
    return MatrixCheck(ok, expected, worst, msg)


def dehn_twist_data(j: int) -> BoundaryHomologyData:
    """j Dehn twists of the solid torus: s -> s + j t, t -> t."""
    return BoundaryHomologyData(1, 1, np.array([[float(j)]]))


def delta_helicity(d: BoundaryHomologyData, flux) -> float:
    f = np.atleast_1d(np.asarray(flux, dtype=float))
    if f.shape != (d.n,):
        raise ValueError(f"flux vector has length {f.size}, expected {d.n}")
    # diagonal plus paired off-diagonal terms: exactly 0.0 for a skew C
    C = d.C
    total = float(np.sum(np.diag(C) * f * f))
    iu, ju = np.triu_indices(d.n, 1)
    total += float(np.sum((C[iu, ju] + C[ju, iu]) * f[iu] * f[ju]))
    return total


def is_helicity_preserving(d: BoundaryHomologyData) -> bool:
    check = validate_boundary_matrix(d)
    if not check.ok:
        raise ValueError(check.message)
    if d.k % 2 == 0:
        return True
    return bool(d.n == 0 or np.max(np.abs(d.C)) < SYMMETRY_TOL)


def cross_helicity_product(flux_a: float, flux_b: float, lk: int) -> float:
    return float(flux_a) * float(flux_b) * int(lk)


def linked_tube_helicity(hel_a: float, hel_b: float, lk: int, flux: float) -> float:
    """Total helicity of two equal-flux linked tubes."""
    return float(hel_a) + float(hel_b) + 2.0 * int(lk) * float(flux) ** 2


def _real_gcd(a, b, floor):
    a, b = max(a, b), min(a, b)
    while b > floor:
        a, b = b, math.fmod(a, b)
        if a - b <= floor:
            b = 0.0
    return a


def flux_lattice_constant(flux, rel_tol: float = 1e-9) -> float:
    """Largest F with every flux an integer multiple of F, 0 if none.

    Real-valued Euclid whose remainders count as zero below
    ``rel_tol * max|flux|``.  A candidate whose multiples exceed
    ``1/sqrt(rel_tol)`` is only an artefact of the tolerance and is rejected.
    """
    f = np.abs(np.atleast_1d(np.asarray(flux, dtype=float)))
    f = f[f > 0]
    if f.size == 0:
        return 0.0
    top = float(f.max())
    floor = rel_tol * top
    g = float(f[0])
    for x in f[1:]:
        g = _real_gcd(g, float(x), floor)
    if top / g > 1.0 / math.sqrt(rel_tol):
        return 0.0
    ratios = f / g
    if np.any(np.abs(ratios - np.round(ratios)) * g > 2 * floor * ratios):
        return 0.0
    return g


@dataclass(frozen=True)
class ResidualHelicity:
    value: float
    F: float
    reduced: bool


def residual_helicity_report(hel: float, flux, rel_tol: float = 1e-9) -> ResidualHelicity:
    F = flux_lattice_constant(flux, rel_tol)
    if F == 0.0:
        return ResidualHelicity(float(hel), 0.0, False)
    # fmod is exact; only the shift of a negative remainder can round up to F
    v = math.fmod(float(hel), F)
    if v < 0:
        v += F
    return ResidualHelicity(v if v < F else 0.0, F, True)


def residual_helicity(hel: float, flux, rel_tol: float = 1e-9) -> float:
    """Helicity modulo the flux lattice constant F; ``hel`` itself when F = 0
    (see :func:`residual_helicity_report` for the flag)."""
    return residual_helicity_report(hel, flux, rel_tol).value


@dataclass(frozen=True)
class KNMRule:
    k: int
    n: int
    m: int
    defined: bool
    identically_zero: bool


def knm_rules(k: int, n: int) -> KNMRule:
    """Dimension law m = 2n - 2k - 1 for helicity of (k+1)-forms on
    n-manifolds in R^m.  Swapping the two points negates the integral when k
    and n have opposite parity, so there it is identically zero."""
    k, n = int(k), int(n)
    m = 2 * n - 2 * k - 1
    return KNMRule(k, n, m, defined=(m >= 1 and n >= 1), identically_zero=((k + n) % 2 == 1))
