"""Command-line interface driven by JSON scene files.

    helitool hel torus_twist1 --method 6d --samples 200000
    helitool lk hopf_pair
    helitool delta torus --twists 2
    helitool topo boundary.json
    helitool demo

A scene argument is either a path to a JSON file or the name of a bundled
scene (``torus``, ``torus_twist1``, ``hopf_pair``).  Reports are written to
stdout as JSON (default) or CSV.  Exit status: 0 success, 1 input error,
2 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from . import geometry as geo
from .fields import (
    dehn_twist_map,
    fd_curl,
    flux,
    longitudinal_field,
    piecewise_field,
    pushforward_density_field,
)
from .helicity import biot_savart_field, cross_helicity, helicity
from .integrate import Estimate, IntegrationError, MCConfig
from .linking import (
    GenericityError,
    NonConvergenceError,
    asymptotic_linking,
    gauss_linking,
    linking_integer,
    signed_crossing_linking,
)
from .topology import (
    BoundaryHomologyData,
    dehn_twist_data,
    delta_helicity,
    is_helicity_preserving,
    residual_helicity_report,
    validate_boundary_matrix,
)

BUILTIN_SCENES = ("torus", "torus_twist1", "hopf_pair")

COMPUTE_DEFAULTS = {
    "samples": 1_000_000,
    "seed": 0,
    "shards": 8,
    "eps": None,
    "quad": None,
    "n_segment": 16,
    "flux_order": 32,
    "lk_nodes": 256,
    "fd_step": 1e-4,
}
# per-command Biot-Savart orders used when ``quad`` is not given
BS_CHECK_QUAD = (24, 48, 48)
ARNOLD_QUAD = (4, 8, 16)


class SceneError(ValueError):
    """Malformed or inconsistent scene document."""


# ---------------------------------------------------------------------------
# scene parsing


@dataclass
class Scene:
    spec: dict
    domain: object
    field: object
    tubes: list  # [(SolidTorus, VectorField)] one per tube
    twists: int
    scale: float
    compute: dict


def _no_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise SceneError(f"duplicate key {k!r}")
        out[k] = v
    return out


def _keys(d, where, required=(), optional=()):
    if not isinstance(d, dict):
        raise SceneError(f"{where}: expected an object")
    unknown = sorted(set(d) - set(required) - set(optional))
    if unknown:
        raise SceneError(f"{where}: unknown key {unknown[0]!r}")
    missing = [k for k in required if k not in d]
    if missing:
        raise SceneError(f"{where}: missing key {missing[0]!r}")


def _number(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise SceneError(f"{where}: expected a finite number")
    return float(v)


def _integer(v, where, low=None):
    if isinstance(v, bool) or not isinstance(v, int):
        raise SceneError(f"{where}: expected an integer")
    if low is not None and v < low:
        raise SceneError(f"{where}: must be >= {low}")
    return v


def _torus(d, where):
    _keys(d, where, ("major_radius", "minor_radius"), ("type", "rotation", "translation"))
    if d.get("type", "solid_torus") != "solid_torus":
        raise SceneError(f"{where}.type: expected 'solid_torus'")
    A = _number(d["major_radius"], f"{where}.major_radius")
    R = _number(d["minor_radius"], f"{where}.minor_radius")
    if not 0 < R:
        raise SceneError("minor_radius must be positive")
    if not R < A:
        raise SceneError("minor_radius must be < major_radius")
    try:
        t = geo.SolidTorus(A, R, d.get("rotation"), d.get("translation"))
    except (geo.GeometryError, ValueError) as exc:
        raise SceneError(f"{where}: {exc}") from None
    spec = {"type": "solid_torus", "major_radius": A, "minor_radius": R,
            "rotation": t.rotation.tolist(), "translation": t.translation.tolist()}
    return t, spec


def _domain(d):
    _keys(d, "domain", ("type",), ("major_radius", "minor_radius", "rotation", "translation", "first", "second"))
    kind = d["type"]
    if kind == "solid_torus":
        t, spec = _torus(d, "domain")
        return t, [t], spec
    if kind == "disjoint_pair":
        _keys(d, "domain", ("type", "first", "second"))
        t1, s1 = _torus(d["first"], "domain.first")
        t2, s2 = _torus(d["second"], "domain.second")
        try:
            pair = geo.DisjointPair(t1, t2)
        except geo.GeometryError as exc:
            raise SceneError(f"domain: {exc}") from None
        return pair, [t1, t2], {"type": "disjoint_pair", "first": s1, "second": s2}
    raise SceneError(f"domain.type: unknown domain type {kind!r}")


def _field(d, tori):
    _keys(d, "field", ("type",), ("scale", "twists"))
    kind = d["type"]
    scale = _number(d.get("scale", 1.0), "field.scale")
    if kind == "longitudinal":
        if "twists" in d:
            raise SceneError("field.twists: only valid for type 'pushforward'")
        j = 0
    elif kind == "pushforward":
        if "twists" not in d:
            raise SceneError("field: missing key 'twists'")
        j = _integer(d["twists"], "field.twists")
    else:
        raise SceneError(f"field.type: unknown field type {kind!r}")
    tubes = []
    for t in tori:
        V = longitudinal_field(t, scale)
        if kind == "pushforward":
            V = pushforward_density_field(dehn_twist_map(t, j), V)
        tubes.append((t, V))
    spec = {"type": kind, "scale": scale}
    if kind == "pushforward":
        spec["twists"] = j
    return tubes, j, scale, spec


def _compute(d):
    d = {} if d is None else d
    _keys(d, "compute", (), tuple(COMPUTE_DEFAULTS))
    c = dict(COMPUTE_DEFAULTS)
    c.update(d)
    c["samples"] = _integer(c["samples"], "compute.samples", 1)
    c["seed"] = _integer(c["seed"], "compute.seed", 0)
    c["shards"] = _integer(c["shards"], "compute.shards", 1)
    c["n_segment"] = _integer(c["n_segment"], "compute.n_segment", 1)
    c["flux_order"] = _integer(c["flux_order"], "compute.flux_order", 1)
    c["lk_nodes"] = _integer(c["lk_nodes"], "compute.lk_nodes", 8)
    c["fd_step"] = _number(c["fd_step"], "compute.fd_step")
    if c["eps"] is not None:
        c["eps"] = _number(c["eps"], "compute.eps")
        if c["eps"] < 0:
            raise SceneError("compute.eps: must be >= 0")
    if c["quad"] is not None:
        q = c["quad"]
        if not isinstance(q, list) or len(q) != 3:
            raise SceneError("compute.quad: expected a list of three integers")
        c["quad"] = [_integer(v, "compute.quad", 1) for v in q]
    return c


def parse_scene(text: str) -> Scene:
    """Parse and validate a scene document (strict: unknown keys are errors)."""
    try:
        doc = json.loads(text, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise SceneError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    _keys(doc, "scene", ("domain", "field"), ("compute",))
    domain, tori, dspec = _domain(doc["domain"])
    tubes, j, scale, fspec = _field(doc["field"], tori)
    V = tubes[0][1] if len(tubes) == 1 else piecewise_field(domain, tubes[0][1], tubes[1][1])
    compute = _compute(doc.get("compute"))
    spec = {"domain": dspec, "field": fspec, "compute": compute}
    return Scene(spec, domain, V, tubes, j, scale, compute)


def load_scene(ref: str) -> Scene:
    """Load a scene from a file path or a bundled scene name."""
    name = ref[:-5] if ref.endswith(".json") else ref
    p = Path(ref)
    if p.is_file():
        text = p.read_text(encoding="utf-8")
    elif name in BUILTIN_SCENES:
        text = resources.files("helitool").joinpath("scenes", f"{name}.json").read_text(encoding="utf-8")
    else:
        raise SceneError(f"no scene file or bundled scene named {ref!r}")
    return parse_scene(text)


def apply_overrides(scene: Scene, args) -> Scene:
    c = dict(scene.compute)
    for key, attr in (("samples", "samples"), ("seed", "seed"), ("shards", "shards"), ("eps", "eps")):
        v = getattr(args, attr, None)
        if v is not None:
            c[key] = v
    if getattr(args, "quad", None) is not None:
        c["quad"] = list(args.quad)
    text = json.dumps({"domain": scene.spec["domain"], "field": scene.spec["field"], "compute": c})
    return parse_scene(text)


# ---------------------------------------------------------------------------
# helpers


def _mc(scene: Scene, seed_offset=0) -> MCConfig:
    c = scene.compute
    return MCConfig(c["samples"], c["seed"] + seed_offset, c["shards"], c["eps"])


def _est(e: Estimate) -> dict:
    return {"value": e.value, "std_error": e.std_error, "n_used": e.n_used, "n_rejected": e.n_rejected}


def _core_loop(t: geo.SolidTorus, sign=1.0):
    loop = geo.circle_loop(t.translation, t.A, t.rotation[:, 0], t.rotation[:, 1], label="core")
    return loop if sign > 0 else loop.reversed()


def scene_loops(scene: Scene):
    """Two closed orbits of the scene's field.

    On a two-tube scene these are the tube cores; on a single torus they are
    the orbits through r = 0.4 R and r = 0.8 R (torus curves of type (1, j)).
    """
    sign = 1.0 if scene.scale >= 0 else -1.0
    if len(scene.tubes) == 2:
        return tuple(_core_loop(t, sign) for t, _ in scene.tubes)
    t = scene.tubes[0][0]
    loops = [geo.torus_knot_loop(t, f * t.R, 1, scene.twists) for f in (0.4, 0.8)]
    return tuple(lp if sign > 0 else lp.reversed() for lp in loops)


def _quad(scene, default):
    q = scene.compute["quad"]
    return tuple(q) if q is not None else default


def _meridian_flux(scene, t, V):
    return flux(V, geo.meridian_disk(t, 0.0), scene.compute["flux_order"])


# ---------------------------------------------------------------------------
# commands


def cmd_lk(scene, args):
    a, b = scene_loops(scene)
    n = scene.compute["lk_nodes"]
    tol = 0.05 if args.tol is None else args.tol
    return {
        "gauss": gauss_linking(a, b, n),
        "linking_number": linking_integer(a, b, n, tol),
        "crossing": signed_crossing_linking(a, b),
    }


def cmd_asymlk(scene, args):
    a, b = scene_loops(scene)
    lam = asymptotic_linking(a, b, args.p, args.q)
    return {"p": args.p, "q": args.q, "asymptotic_linking": lam, "times_4pi2": lam * 4 * math.pi**2}


def cmd_hel(scene, args):
    method = {"6d": "six_d", "4d": "four_d"}.get(args.method, args.method)
    kw = {}
    if method == "four_d":
        kw["n_segment"] = scene.compute["n_segment"]
    elif method == "arnold":
        kw["orders"] = _quad(scene, ARNOLD_QUAD)
    rep = helicity(scene.field, method, _mc(scene), **kw)
    return {"method": method, "helicity": _est(rep.estimate)}


def cmd_bs_check(scene, args):
    V = scene.field
    h = scene.compute["fd_step"]
    rng = np.random.default_rng(scene.compute["seed"])
    probes = geo.retract_inside(V.domain, geo.sample_uniform(V.domain, rng, args.probes), 10 * h)
    curl = fd_curl(biot_savart_field(V, _quad(scene, BS_CHECK_QUAD)), probes, h)
    v = V(probes)
    rel = np.linalg.norm(curl - v, axis=1) / np.linalg.norm(v, axis=1)
    tol = 1e-2 if args.tol is None else args.tol
    return {
        "quad": list(_quad(scene, BS_CHECK_QUAD)),
        "fd_step": h,
        "probes": probes.tolist(),
        "relative_residuals": rel.tolist(),
        "max_relative_residual": float(rel.max()),
        "tol": tol,
        "passed": bool(rel.max() < tol),
    }


def _single_torus(scene, command):
    if len(scene.tubes) != 1:
        raise SceneError(f"{command} needs a single solid_torus scene")
    return scene.tubes[0][0]


def cmd_delta(scene, args):
    t = _single_torus(scene, "delta")
    j = args.twists if args.twists is not None else (scene.twists or 1)
    base = longitudinal_field(t, scene.scale)
    twisted = pushforward_density_field(dehn_twist_map(t, j), base)
    phi = _meridian_flux(scene, t, base)
    predicted = delta_helicity(dehn_twist_data(j), [phi])
    h0 = helicity(base, "six_d", _mc(scene)).estimate
    h1 = helicity(twisted, "six_d", _mc(scene, 1)).estimate
    d = h1 - h0
    tol = 3.0 if args.tol is None else args.tol
    z = abs(d.value - predicted) / d.std_error if d.std_error > 0 else math.inf
    return {
        "twists": j,
        "flux": phi,
        "predicted": predicted,
        "helicity_base": _est(h0),
        "helicity_twisted": _est(h1),
        "measured": _est(d),
        "n_sigma": z,
        "tol_sigma": tol,
        "passed": bool(z < tol),
    }


def cmd_xhel(scene, args):
    if len(scene.tubes) != 2:
        raise SceneError("xhel needs a disjoint_pair scene")
    (t1, V1), (t2, V2) = scene.tubes
    f1, f2 = _meridian_flux(scene, t1, V1), _meridian_flux(scene, t2, V2)
    a, b = scene_loops(scene)
    lk = linking_integer(a, b, scene.compute["lk_nodes"])
    x = cross_helicity(V1, V2, _mc(scene))
    predicted = f1 * f2 * lk
    tol = 0.02 if args.tol is None else args.tol
    rel = abs(x.value - predicted) / abs(predicted) if predicted else abs(x.value)
    return {
        "flux_first": f1,
        "flux_second": f2,
        "tube_linking": lk,
        "predicted": predicted,
        "cross_helicity": _est(x),
        "relative_error": rel,
        "tol": tol,
        "passed": bool(rel < tol),
    }


def parse_topology(text: str):
    try:
        doc = json.loads(text, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise SceneError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    _keys(doc, "topology", ("boundary", "flux"), ("helicity", "rel_tol"))
    try:
        data = BoundaryHomologyData.from_dict(doc["boundary"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneError(f"boundary: {exc}") from None
    fl = doc["flux"]
    if not isinstance(fl, list):
        raise SceneError("flux: expected a list of numbers")
    fl = [_number(v, "flux") for v in fl]
    if len(fl) != data.n:
        raise SceneError(f"flux: expected {data.n} entries, got {len(fl)}")
    hel = None if doc.get("helicity") is None else _number(doc["helicity"], "helicity")
    rel_tol = _number(doc.get("rel_tol", 1e-9), "rel_tol")
    return data, fl, hel, rel_tol


def cmd_topo(path, args):
    data, fl, hel, rel_tol = parse_topology(Path(path).read_text(encoding="utf-8"))
    check = validate_boundary_matrix(data)
    out = {
        "boundary": data.to_dict(),
        "flux": fl,
        "matrix_valid": check.ok,
        "expected_symmetry": check.expected,
        "max_asymmetry": check.max_asymmetry,
        "message": check.message,
        "delta_helicity": delta_helicity(data, fl),
        "helicity_preserving": is_helicity_preserving(data) if check.ok else None,
    }
    if hel is not None:
        r = residual_helicity_report(hel, fl, rel_tol)
        out["residual_helicity"] = {"value": r.value, "F": r.F, "reduced": r.reduced}
    return out


def cmd_demo(args):
    from .reproduce import run_suite

    def progress(res):
        for line in res.lines:
            print(line, flush=True)

    results = run_suite(scale=args.scale, seed=args.seed or 0, determinism=not args.no_determinism,
                        progress=progress)
    n_pass = sum(r.passed for r in results.values())
    print(f"{n_pass}/{len(results)} checks passed")
    return 0 if n_pass == len(results) else 2


SCENE_COMMANDS = {
    "lk": cmd_lk,
    "asymlk": cmd_asymlk,
    "hel": cmd_hel,
    "bs-check": cmd_bs_check,
    "delta": cmd_delta,
    "xhel": cmd_xhel,
}


# ---------------------------------------------------------------------------
# output


def _flatten(prefix, obj, rows):
    if isinstance(obj, dict) and set(obj) == {"value", "std_error", "n_used", "n_rejected"}:
        rows.append([prefix, obj["value"], obj["std_error"], obj["n_used"], obj["n_rejected"]])
    elif isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, rows)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append([prefix, obj, "", "", ""])


def format_report(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    rows = []
    _flatten("", report["results"], rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["quantity", "value", "std_error", "n_used", "n_rejected"])
    w.writerow(["command", report["command"], "", "", ""])
    w.writerow(["version", report["version"], "", "", ""])
    w.writerows(rows)
    return buf.getvalue()


def _quad_arg(text):
    try:
        q = [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("expected three comma-separated integers NR,NT,NP") from None
    if len(q) != 3 or min(q) < 1:
        raise argparse.ArgumentTypeError("expected three positive integers NR,NT,NP")
    return q


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors (exit 1); 2 is reserved for non-convergence
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--samples", type=int, help="Monte Carlo sample count")
    common.add_argument("--seed", type=int, help="root random seed")
    common.add_argument("--shards", type=int, help="number of independent random substreams")
    common.add_argument("--eps", type=float, help="pair cutoff distance for the 6D kernel")
    common.add_argument("--quad", type=_quad_arg, help="Biot-Savart orders NR,NT,NP")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--tol", type=float, help="pass threshold (meaning depends on the command)")

    p = _Parser(prog="helitool", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"helitool {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    help_ = {
        "lk": "linking number of two field orbits (or tube cores)",
        "asymlk": "asymptotic linking of two orbits",
        "hel": "helicity of the scene field",
        "bs-check": "curl of the Biot-Savart potential against the field",
        "delta": "helicity change under Dehn twists, predicted and measured",
        "xhel": "cross-helicity of a two-tube scene",
    }
    for name, text in help_.items():
        sp = sub.add_parser(name, parents=[common], help=text)
        sp.add_argument("scene", help="scene file or bundled scene name")
        if name == "hel":
            sp.add_argument("--method", choices=("6d", "4d", "arnold", "six_d", "four_d"), default="6d")
        if name == "delta":
            sp.add_argument("--twists", type=int)
        if name == "asymlk":
            sp.add_argument("--p", type=int, default=1)
            sp.add_argument("--q", type=int, default=1)
        if name == "bs-check":
            sp.add_argument("--probes", type=int, default=5)
    tp = sub.add_parser("topo", parents=[common], help="evaluate boundary-homology data and fluxes")
    tp.add_argument("file", help="JSON file with keys boundary, flux and optionally helicity, rel_tol")
    dp = sub.add_parser("demo", parents=[common], help="run the reproduction suite")
    dp.add_argument("--scale", type=float, default=1.0, help="multiply every Monte Carlo budget")
    dp.add_argument("--no-determinism", action="store_true", help="skip the multi-worker rerun")
    return p


def _options(args):
    skip = {"command", "scene", "file", "format"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


def run(command, scene, args) -> dict:
    """Execute a command on a parsed scene and return the report dict."""
    t0 = time.perf_counter()
    results = SCENE_COMMANDS[command](scene, args)
    results["wall_time"] = time.perf_counter() - t0
    return {
        "command": command,
        "inputs": {"scene": scene.spec, "options": _options(args)},
        "results": results,
        "version": __version__,
    }


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "demo":
            return cmd_demo(args)
        if args.command == "topo":
            t0 = time.perf_counter()
            results = cmd_topo(args.file, args)
            results["wall_time"] = time.perf_counter() - t0
            report = {"command": "topo", "inputs": {"file": args.file, "options": _options(args)},
                      "results": results, "version": __version__}
        else:
            scene = apply_overrides(load_scene(args.scene), args)
            report = run(args.command, scene, args)
    except (NonConvergenceError, GenericityError, IntegrationError) as exc:
        print(f"helitool: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (SceneError, ValueError, TypeError, OSError) as exc:
        print(f"helitool: input error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(format_report(report, args.format))
    return 0


if __name__ == "__main__":
    sys.exit(main())
