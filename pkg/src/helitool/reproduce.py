"""The reproduction suite: every acceptance criterion as a callable check.

Each ``check_*`` function runs one criterion and returns a
:class:`CheckResult` whose ``lines`` are human-readable pass/fail lines and
whose ``estimates`` hold every Monte Carlo number it produced (used to verify
that results do not depend on the worker count).  ``scale`` multiplies every
Monte Carlo sample budget; 1.0 gives the budgets the tolerances were set for.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .fields import (
    dehn_twist_map,
    fd_curl,
    flux,
    longitudinal_field,
    piecewise_field,
    pushforward_density_field,
)
from .helicity import (
    biot_savart_field,
    bs_selfadjoint_defect,
    cross_helicity,
    helicity_4d,
    helicity_6d,
    helicity_arnold,
)
from .integrate import MCConfig
from .linking import (
    asymptotic_linking,
    gauss_linking,
    linking_integer,
    signed_crossing_linking,
)
from .topology import (
    BoundaryHomologyData,
    cross_helicity_product,
    dehn_twist_data,
    delta_helicity,
    is_helicity_preserving,
    knm_rules,
    linked_tube_helicity,
    validate_boundary_matrix,
)

PI2_16 = math.pi**2 / 16


@dataclass
class CheckResult:
    name: str
    passed: bool = True
    lines: list = field(default_factory=list)
    estimates: dict = field(default_factory=dict)

    def record(self, label, ok, detail=""):
        ok = bool(ok)
        self.passed &= ok
        self.lines.append(f"[{'PASS' if ok else 'FAIL'}] {self.name}: {label}" + (f" ({detail})" if detail else ""))
        return ok


def torus_fields(A=1.0, R=0.5, j=1):
    """Longitudinal field on the torus and its pushforward under j Dehn twists."""
    t = geo.SolidTorus(A, R)
    base = longitudinal_field(t)
    return t, base, pushforward_density_field(dehn_twist_map(t, j), base)


def hopf_tubes(R=0.25):
    """Two solid tori around the cores of the standard Hopf pair, each
    carrying a unit-scale longitudinal field."""
    first = geo.SolidTorus(1.0, R)
    rot = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])  # columns e_z, e_x, e_y
    second = geo.SolidTorus(1.0, R, rot, [1.0, 0.0, 0.0])
    return geo.DisjointPair(first, second)


def _cfg(n, seed, workers, scale):
    return MCConfig(max(1000, int(n * scale)), seed=seed, n_workers=workers)


def _est(e):
    return f"{e.value:.5f} +/- {e.std_error:.5f}"


# ---------------------------------------------------------------------------
# individual criteria


def check_hopf_linking(**_):
    res = CheckResult("hopf-linking")
    a, b = geo.hopf_pair()
    t0 = time.perf_counter()
    g = gauss_linking(a, b, 256)
    dt = time.perf_counter() - t0
    c = signed_crossing_linking(a, b)
    res.record("crossing count is +/-1", abs(c) == 1, f"crossing={c}")
    res.record("Gauss integral matches crossing count", abs(g - c) < 1e-8, f"gauss={g:.12f}")
    res.record("runtime < 1 s", dt < 1.0, f"{dt:.3f} s")
    return res


def check_orbit_linking(**_):
    res = CheckResult("orbit-linking")
    t = geo.SolidTorus(1.0, 0.5)
    a, b = geo.torus_knot_loop(t, 0.2, 1, 1), geo.torus_knot_loop(t, 0.4, 1, 1)
    lk = linking_integer(a, b)
    res.record("(1,1) curves at r=0.2, 0.4 link once", lk == 1, f"lk={lk}")
    lk32 = linking_integer(a.cover(3), b.cover(2), 768)
    res.record("3-fold and 2-fold covers link 6 times", lk32 == 6, f"lk={lk32}")
    lam = asymptotic_linking(a, b, 3, 2)
    target = 1 / (4 * math.pi**2)
    res.record("asymptotic linking is 1/4pi^2", abs(lam - target) < 1e-6, f"{lam:.9f} vs {target:.9f}")
    return res


def check_flux(**_):
    res = CheckResult("flux")
    t = geo.SolidTorus(1.0, 0.5)
    F = flux(longitudinal_field(t), geo.meridian_disk(t, 0.0), order=32)
    res.record("meridian flux is pi/4", abs(F - math.pi / 4) < 1e-10, f"{F:.15f}")
    return res


def check_zero_helicity(workers=1, scale=1.0, seed=0, **_):
    res = CheckResult("zero-helicity")
    _, base, _ = torus_fields()
    e = helicity_6d(base, _cfg(2_000_000, seed, workers, scale)).estimate
    res.estimates["hel6d_longitudinal"] = e
    res.record("sigma < 0.02", e.std_error < 0.02, _est(e))
    res.record("|value| < 3 sigma", abs(e.value) < 3 * e.std_error, _est(e))
    return res


def check_twist_helicity(workers=1, scale=1.0, seed=0, **_):
    res = CheckResult("twist-helicity")
    for j, n in ((1, 4_000_000), (2, 4_000_000)):
        _, _, tw = torus_fields(j=j)
        e = helicity_6d(tw, _cfg(n, seed + j, workers, scale)).estimate
        res.estimates[f"hel6d_j{j}"] = e
        target = j * PI2_16
        if j == 1:
            res.record("j=1 sigma <= 0.02", e.std_error <= 0.02, _est(e))
        res.record(f"j={j} within 3 sigma of {target:.5f}", e.within(target), _est(e))
    return res


def check_delta_law(workers=1, scale=1.0, seed=0, **_):
    res = CheckResult("delta-law")
    for A, R, n in ((1.0, 0.5, 2_000_000), (2.0, 0.6, 2_000_000)):
        t, base, _ = torus_fields(A, R)
        h0 = helicity_6d(base, _cfg(n, seed + 10, workers, scale)).estimate
        res.estimates[f"A{A}_base"] = h0
        phi = flux(base, geo.meridian_disk(t, 0.0))
        for j in (1, 2):
            _, _, tw = torus_fields(A, R, j)
            h = helicity_6d(tw, _cfg(n, seed + 10 + j, workers, scale)).estimate
            res.estimates[f"A{A}_j{j}"] = h
            d = h - h0
            pred = delta_helicity(dehn_twist_data(j), [phi])
            res.record(
                f"A={A} R={R} j={j}: measured change vs j*Flux^2",
                abs(d.value - pred) < 3 * d.std_error,
                f"{_est(d)} vs {pred:.5f}",
            )
    return res


def check_method_equivalence(workers=1, scale=1.0, seed=0, **_):
    res = CheckResult("method-equivalence")
    _, base, tw = torus_fields()
    for name, V in (("longitudinal", base), ("twist-1", tw)):
        ref = helicity_6d(V, _cfg(2_000_000, seed + 20, workers, scale)).estimate
        e4 = helicity_4d(V, _cfg(400_000, seed + 21, workers, scale)).estimate
        ea = helicity_arnold(V, _cfg(32_000, seed + 22, workers, scale)).estimate
        res.estimates.update({f"{name}_6d": ref, f"{name}_4d": e4, f"{name}_arnold": ea})
        for label, e in (("4d", e4), ("arnold", ea)):
            d = e - ref
            res.record(f"{name}: {label} vs 6d within 3 sigma", abs(d.value) < 3 * d.std_error,
                       f"{_est(e)} vs {_est(ref)}")
            if name == "twist-1":
                rel = abs(e.value - ref.value) / abs(ref.value)
                res.record(f"{name}: {label} vs 6d within 2%", rel < 0.02, f"rel={rel:.4f}")
    return res


def check_biot_savart(**_):
    res = CheckResult("biot-savart")
    _, base, tw = torus_fields()
    t = base.domain
    rng = np.random.default_rng(7)
    c = geo.ToroidalCoords(rng.uniform(0.05, 0.35, 5), rng.uniform(0, 2 * np.pi, 5), rng.uniform(0, 2 * np.pi, 5))
    probes = geo.toroidal_to_cartesian(t, c)
    for name, V in (("longitudinal", base), ("twist-1", tw)):
        curl = fd_curl(biot_savart_field(V, (24, 48, 48)), probes, 1e-4)
        v = V(probes)
        rel = np.linalg.norm(curl - v, axis=1) / np.linalg.norm(v, axis=1)
        res.record(f"{name}: |curl BS(V) - V|/|V| < 1e-2 at 5 probes", np.all(rel < 1e-2), f"max {rel.max():.2e}")
    return res


def check_selfadjoint(workers=1, scale=1.0, seed=0, **_):
    res = CheckResult("self-adjoint")
    _, base, tw = torus_fields()
    e = bs_selfadjoint_defect(base, tw, _cfg(4_000, seed + 30, workers, scale))
    res.estimates["defect"] = e
    res.record("<V, BS W> - <BS V, W> within 3 sigma of 0", e.within(0.0), _est(e))
    return res


def check_cross_helicity(workers=1, scale=1.0, seed=0, **_):
    res = CheckResult("cross-helicity")
    pair = hopf_tubes()
    V1, V2 = longitudinal_field(pair.first), longitudinal_field(pair.second)
    f1 = flux(V1, geo.meridian_disk(pair.first, 0.0))
    f2 = flux(V2, geo.meridian_disk(pair.second, 0.0))
    a, b = geo.hopf_pair()
    lk = linking_integer(a, b)
    x = cross_helicity(V1, V2, _cfg(1_000_000, seed + 40, workers, scale))
    res.estimates["cross"] = x
    pred = cross_helicity_product(f1, f2, lk)
    rel = abs(x.value - pred) / abs(pred)
    res.record("cross term is Flux^2 Lk within 2%", rel < 0.02, f"{_est(x)} vs {pred:.6f}")
    full = helicity_6d(piecewise_field(pair, V1, V2), _cfg(2_000_000, seed + 41, workers, scale)).estimate
    res.estimates["two_tube"] = full
    pred2 = linked_tube_helicity(0.0, 0.0, lk, f1)
    res.record("two-tube helicity is 2 Flux^2 within 3 sigma", full.within(pred2), f"{_est(full)} vs {pred2:.6f}")
    return res


def check_structure_laws(**_):
    res = CheckResult("structure-laws")
    rng = np.random.default_rng(3)
    skew_ok = True
    for n in range(1, 7):
        M = rng.normal(size=(n, n))
        d = BoundaryHomologyData(n, 2, M - M.T)
        skew_ok &= all(delta_helicity(d, rng.normal(size=n) * 10) == 0.0 for _ in range(20))
    res.record("delta_helicity is exactly 0 for skew C", skew_ok)
    S = np.array([[0.0, 1.0], [-1.0, 0.0]])
    parity = (
        validate_boundary_matrix(BoundaryHomologyData(1, 1, [[3.0]])).ok
        and not validate_boundary_matrix(BoundaryHomologyData(2, 1, S)).ok
        and validate_boundary_matrix(BoundaryHomologyData(2, 2, S)).ok
        and not validate_boundary_matrix(BoundaryHomologyData(2, 2, [[1.0, 0.0], [0.0, 0.0]])).ok
        and validate_boundary_matrix(BoundaryHomologyData(2, 3, [[1.0, 2.0], [2.0, 0.0]])).ok
    )
    res.record("symmetric iff k odd, skew iff k even", parity)
    res.record("(n=2, k=1, C=0) preserves helicity", is_helicity_preserving(BoundaryHomologyData(2, 1, np.zeros((2, 2)))))
    table = {(1, 3): (3, True, False), (2, 5): (5, True, True), (0, 2): (3, True, False)}
    got = {kn: (r.m, r.defined, r.identically_zero) for kn in table for r in [knm_rules(*kn)]}
    res.record("knm_rules table", got == table, str(got))
    return res


CHECKS = {
    "hopf-linking": check_hopf_linking,
    "orbit-linking": check_orbit_linking,
    "flux": check_flux,
    "zero-helicity": check_zero_helicity,
    "twist-helicity": check_twist_helicity,
    "delta-law": check_delta_law,
    "method-equivalence": check_method_equivalence,
    "biot-savart": check_biot_savart,
    "self-adjoint": check_selfadjoint,
    "cross-helicity": check_cross_helicity,
    "structure-laws": check_structure_laws,
}

MC_CHECKS = ("zero-helicity", "twist-helicity", "delta-law", "method-equivalence", "self-adjoint", "cross-helicity")


def check_determinism(first: dict, workers=8, scale=1.0, seed=0, **_):
    """Rerun the Monte Carlo checks with ``workers`` threads and compare the
    estimates with ``first`` (name -> CheckResult from a 1-worker run)."""
    res = CheckResult("determinism")
    for name in MC_CHECKS:
        again = CHECKS[name](workers=workers, scale=scale, seed=seed)
        for key, e in first[name].estimates.items():
            e2 = again.estimates[key]
            same = (e.value, e.std_error, e.n_used, e.n_rejected) == (e2.value, e2.std_error, e2.n_used, e2.n_rejected)
            res.record(f"{name}/{key} identical at 1 and {workers} workers", same,
                       f"{e.value!r}" if same else f"{e.value!r} vs {e2.value!r}")
    return res


def run_suite(scale=1.0, seed=0, determinism=True, progress=None):
    results = {}
    for name, fn in CHECKS.items():
        results[name] = fn(workers=1, scale=scale, seed=seed)
        if progress:
            progress(results[name])
    if determinism:
        results["determinism"] = check_determinism(results, 8, scale, seed)
        if progress:
            progress(results["determinism"])
    return results
