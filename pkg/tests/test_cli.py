import json
import math
import os
import subprocess
import sys

import pytest

from helitool.cli import SceneError, format_report, load_scene, main, parse_scene

MINIMAL = '{"domain": {"type": "solid_torus", "major_radius": 1.0, "minor_radius": 0.5}, "field": {"type": "longitudinal"}}'


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def results(text):
    return json.loads(text)["results"]


def test_parse_minimal():
    s = parse_scene(MINIMAL)
    assert s.compute["samples"] == 1_000_000 and s.compute["seed"] == 0 and s.twists == 0
    assert s.spec["field"] == {"type": "longitudinal", "scale": 1.0}


def test_parse_twist_scene():
    s = parse_scene(MINIMAL.replace('{"type": "longitudinal"}', '{"type": "pushforward", "twists": 1}'))
    assert s.twists == 1 and "twist(1)" in s.field.label


@pytest.mark.parametrize(
    "text, message",
    [
        (MINIMAL.replace("0.5", "1.5"), "minor_radius must be < major_radius"),
        (MINIMAL.replace('"field"', '"feild"'), "unknown key 'feild'"),
        (MINIMAL.replace('"longitudinal"}', '"longitudinal", "colour": 1}'), "field: unknown key 'colour'"),
        (MINIMAL[:-1] + ', "compute": {"samples": -5}}', "compute.samples"),
        (MINIMAL[:-1] + ', "compute": {"samples": 10, "samples": 20}}', "duplicate key"),
        ('{"domain": {\n "type": }', "line 2, column 10"),
    ],
)
def test_parse_errors(text, message):
    with pytest.raises(SceneError, match=message):
        parse_scene(text)


def test_builtin_scenes():
    for name in ("torus", "torus_twist1", "hopf_pair", "torus.json"):
        load_scene(name)
    with pytest.raises(SceneError):
        load_scene("no_such_scene")


def test_lk_hopf(capsys):
    code, out, _ = run_cli(capsys, "lk", "hopf_pair")
    r = results(out)
    assert code == 0 and r["linking_number"] == 1 and r["crossing"] == 1


def test_asymlk(capsys):
    code, out, _ = run_cli(capsys, "asymlk", "torus_twist1", "--p", "3", "--q", "2")
    assert code == 0 and results(out)["times_4pi2"] == pytest.approx(1.0)


def test_hel_reports_estimate(capsys):
    code, out, _ = run_cli(capsys, "hel", "torus_twist1", "--samples", "20000", "--method", "6d")
    h = results(out)["helicity"]
    assert code == 0 and set(h) == {"value", "std_error", "n_used", "n_rejected"}
    assert abs(h["value"] - math.pi**2 / 16) < 5 * h["std_error"]


def test_delta_command(capsys):
    code, out, _ = run_cli(capsys, "delta", "torus", "--twists", "2", "--samples", "20000")
    r = results(out)
    assert code == 0 and r["predicted"] == pytest.approx(math.pi**2 / 8)
    assert set(r["measured"]) == {"value", "std_error", "n_used", "n_rejected"}


def test_xhel_needs_pair(capsys):
    code, _, err = run_cli(capsys, "xhel", "torus", "--samples", "1000")
    assert code == 1 and "disjoint_pair" in err


def test_xhel(capsys):
    code, out, _ = run_cli(capsys, "xhel", "hopf_pair", "--samples", "50000")
    r = results(out)
    assert code == 0 and r["tube_linking"] == 1
    assert r["predicted"] == pytest.approx((math.pi / 16) ** 2)


def test_bs_check(capsys):
    code, out, _ = run_cli(capsys, "bs-check", "torus", "--quad", "8,16,16", "--probes", "2")
    r = results(out)
    assert code == 0 and r["passed"] and len(r["relative_residuals"]) == 2


def _strip_time(text):
    d = json.loads(text)
    d["results"].pop("wall_time")
    return json.dumps(d, sort_keys=True)


def test_reports_deterministic(capsys, monkeypatch):
    args = ("hel", "torus_twist1", "--samples", "20000", "--seed", "11")
    _, a, _ = run_cli(capsys, *args)
    monkeypatch.setenv("HELITOOL_THREADS", "4")
    _, b, _ = run_cli(capsys, *args)
    assert _strip_time(a) == _strip_time(b)
    _, c, _ = run_cli(capsys, *args[:-1], "12")
    assert _strip_time(a) != _strip_time(c)


def test_csv_format(capsys):
    code, out, _ = run_cli(capsys, "hel", "torus", "--samples", "2000", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "quantity,value,std_error,n_used,n_rejected"
    assert any(line.startswith("helicity,") and line.endswith(",2000,0") for line in lines)


def test_input_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(MINIMAL.replace("0.5", "2.0"))
    code, _, err = run_cli(capsys, "hel", str(bad))
    assert code == 1 and "minor_radius must be < major_radius" in err
    with pytest.raises(SystemExit) as exc:
        main(["hel", "torus", "--method", "9d"])
    assert exc.value.code == 1


def test_nonconvergence_exit_code(capsys, tmp_path):
    scene = tmp_path / "s.json"
    scene.write_text(MINIMAL.replace('{"type": "longitudinal"}', '{"type": "pushforward", "twists": 7}')[:-1]
                     + ', "compute": {"lk_nodes": 8}}')
    code, _, err = run_cli(capsys, "lk", str(scene))
    assert code == 2 and "numerical" in err


def test_topo(capsys, tmp_path):
    f = tmp_path / "b.json"
    f.write_text(json.dumps({"boundary": {"n": 1, "k": 1, "C": [[2]]}, "flux": [0.5], "helicity": 7.3}))
    code, out, _ = run_cli(capsys, "topo", str(f))
    r = results(out)
    assert code == 0 and r["delta_helicity"] == 0.5 and r["helicity_preserving"] is False
    assert r["residual_helicity"]["value"] == pytest.approx(0.3)
    f.write_text(json.dumps({"boundary": {"n": 2, "k": 1, "C": [[0, 1], [-1, 0]]}, "flux": [1, 2]}))
    code, out, _ = run_cli(capsys, "topo", str(f))
    r = results(out)
    assert code == 0 and not r["matrix_valid"] and r["helicity_preserving"] is None
    f.write_text(json.dumps({"boundary": {"n": 2, "k": 1, "C": [[0, 0], [0, 0]]}, "flux": [1]}))
    assert run_cli(capsys, "topo", str(f))[0] == 1


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "helitool", "lk", "hopf_pair", "--format", "csv"],
                       capture_output=True, text=True, env=os.environ | {"PYTHONWARNINGS": "ignore"})
    assert p.returncode == 0 and "linking_number,1" in p.stdout
