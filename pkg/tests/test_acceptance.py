"""Acceptance criteria, each run at its stated budget and tolerance.

Every criterion prints one summary line (``PASS``/``FAIL``) followed by its
individual checks, so the outcome is visible in ``pytest -v`` output.
"""

import pytest

from helitool import reproduce

CRITERIA = [
    (1, "Hopf linking: Gauss integral vs signed crossings", "hopf-linking"),
    (2, "nested-orbit linking, covers and asymptotic linking", "orbit-linking"),
    (3, "meridian flux of the longitudinal field", "flux"),
    (4, "zero helicity of the longitudinal field", "zero-helicity"),
    (5, "helicity after one and two Dehn twists", "twist-helicity"),
    (6, "measured helicity change vs the flux formula", "delta-law"),
    (7, "four-dimensional and Arnol'd forms vs the 6D integral", "method-equivalence"),
    (8, "Biot-Savart potential is a primitive", "biot-savart"),
    (9, "Biot-Savart self-adjointness", "self-adjoint"),
    (10, "cross-helicity of Hopf-linked tubes", "cross-helicity"),
    (11, "parity and structure laws", "structure-laws"),
]

_cache = {}


def _run(name):
    if name not in _cache:
        _cache[name] = reproduce.CHECKS[name](workers=1)
    return _cache[name]


def _report(capsys, number, title, res):
    with capsys.disabled():
        print(f"\n[{'PASS' if res.passed else 'FAIL'}] criterion {number}: {title}")
        for line in res.lines:
            print("    " + line)


@pytest.mark.parametrize("number, title, name", CRITERIA, ids=[c[2] for c in CRITERIA])
def test_criterion(capsys, number, title, name):
    res = _run(name)
    _report(capsys, number, title, res)
    assert res.passed, "\n".join(res.lines)


def test_determinism(capsys):
    first = {name: _run(name) for name in reproduce.MC_CHECKS}
    res = reproduce.check_determinism(first, workers=8)
    _report(capsys, 12, "Monte Carlo values identical at 1 and 8 workers", res)
    assert res.passed, "\n".join(res.lines)
