import numpy as np
import pytest

from helitool import geometry as geo
from helitool.linking import (
    LinkingSingularityError,
    NonConvergenceError,
    asymptotic_linking,
    gauss_linking,
    linking_integer,
    signed_crossing_linking,
)


def test_hopf():
    a, b = geo.hopf_pair()
    assert gauss_linking(a, b) == pytest.approx(1.0, abs=1e-12)
    assert gauss_linking(b, a) == pytest.approx(1.0, abs=1e-12)
    assert gauss_linking(a.reversed(), b) == pytest.approx(-1.0, abs=1e-12)
    assert signed_crossing_linking(a, b) == 1
    assert signed_crossing_linking(b, a) == 1
    assert signed_crossing_linking(a, b.reversed()) == -1


@pytest.mark.parametrize("direction", [(0, 0, 1), (1, 0, 0), (0, 1, 0), (0.3, -0.5, 0.8), (0, 0, -1)])
def test_crossing_independent_of_direction(direction):
    a, b = geo.hopf_pair()
    assert signed_crossing_linking(a, b, direction) == 1


def test_rigid_motion_invariance():
    a, b = geo.hopf_pair()
    R = geo.rotation_matrix([1.0, -2.0, 0.3], 0.9)
    a2, b2 = a.transformed(R, [3, 1, 0]), b.transformed(R, [3, 1, 0])
    assert gauss_linking(a2, b2) == pytest.approx(1.0, abs=1e-12)
    assert signed_crossing_linking(a2, b2) == 1


def test_unlinked_circles():
    a = geo.circle_loop([0, 0, 0], 1.0, [1, 0, 0], [0, 1, 0])
    b = geo.circle_loop([0, 0, 1.0], 0.5, [1, 0, 0], [0, 1, 0])
    far = geo.circle_loop([5, 0, 0], 1.0, [1, 0, 0], [0, 0, 1])
    assert abs(gauss_linking(a, b)) < 1e-12
    assert signed_crossing_linking(a, b, (1, 0, 0)) == 0
    assert linking_integer(a, far) == 0


def test_polyline_hopf():
    s = 2 * np.pi * np.arange(24) / 24
    a = geo.ParametricLoop.from_polyline(np.stack([np.cos(s), np.sin(s), 0 * s], axis=1))
    b = geo.ParametricLoop.from_polyline(np.stack([1 + np.sin(s), 0 * s, np.cos(s)], axis=1))
    assert signed_crossing_linking(a, b) == 1


def test_torus_curves(torus):
    a, b = geo.torus_knot_loop(torus, 0.2, 1, 1), geo.torus_knot_loop(torus, 0.4, 1, 1)
    assert linking_integer(a, b) == 1
    assert signed_crossing_linking(a, b) == 1
    assert linking_integer(a.cover(3), b.cover(2), 768) == 6
    c, d = geo.torus_knot_loop(torus, 0.2, 1, 2), geo.torus_knot_loop(torus, 0.4, 1, 2)
    assert linking_integer(c, d) == 2
    assert asymptotic_linking(a, b) * 4 * np.pi**2 == pytest.approx(1.0, abs=1e-9)
    assert asymptotic_linking(a, b, 3, 2) * 4 * np.pi**2 == pytest.approx(1.0, abs=1e-9)


def test_errors():
    a, b = geo.hopf_pair()
    with pytest.raises(LinkingSingularityError):
        gauss_linking(a, a)
    # a (1,1) pair this close needs more nodes than 8
    t = geo.SolidTorus(1.0, 0.5)
    with pytest.raises(NonConvergenceError):
        linking_integer(geo.torus_knot_loop(t, 0.3, 1, 5), geo.torus_knot_loop(t, 0.31, 1, 5), n=16)
