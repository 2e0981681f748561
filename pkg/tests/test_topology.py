import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from helitool.topology import (
    BoundaryHomologyData,
    cross_helicity_product,
    dehn_twist_data,
    delta_helicity,
    flux_lattice_constant,
    is_helicity_preserving,
    knm_rules,
    linked_tube_helicity,
    residual_helicity,
    residual_helicity_report,
    validate_boundary_matrix,
)

SKEW = [[0.0, 1.0], [-1.0, 0.0]]
finite = st.floats(-100, 100, allow_nan=False)


def test_validate_examples():
    assert validate_boundary_matrix(BoundaryHomologyData(1, 1, [[3.0]])).ok
    bad = validate_boundary_matrix(BoundaryHomologyData(2, 1, SKEW))
    assert not bad.ok and bad.max_asymmetry == 2.0 and "symmetric" in bad.message
    assert validate_boundary_matrix(BoundaryHomologyData(2, 2, SKEW)).ok


def test_data_validation():
    with pytest.raises(ValueError):
        BoundaryHomologyData(2, 0, np.zeros((2, 2)))
    with pytest.raises(ValueError):
        BoundaryHomologyData(2, 1, np.zeros((3, 3)))
    d = BoundaryHomologyData.from_dict({"n": 2, "k": 2, "C": SKEW})
    assert d.ambient_dimension == 5 and BoundaryHomologyData.from_dict(d.to_dict()).to_dict() == d.to_dict()
    with pytest.raises(ValueError):
        BoundaryHomologyData.from_dict({"n": 1, "k": 1, "C": [[1]], "extra": 0})


def test_dehn_twist_examples():
    assert dehn_twist_data(0).C.tolist() == [[0.0]] and is_helicity_preserving(dehn_twist_data(0))
    assert delta_helicity(dehn_twist_data(1), [math.pi / 4]) == pytest.approx(math.pi**2 / 16)
    assert delta_helicity(dehn_twist_data(-2), [1.5]) == -2 * 1.5**2
    assert not is_helicity_preserving(BoundaryHomologyData(1, 1, [[1.0]]))
    assert is_helicity_preserving(BoundaryHomologyData(2, 1, np.zeros((2, 2))))
    assert is_helicity_preserving(BoundaryHomologyData(2, 2, [[0.0, 5.0], [-5.0, 0.0]]))
    with pytest.raises(ValueError):
        is_helicity_preserving(BoundaryHomologyData(2, 1, SKEW))
    with pytest.raises(ValueError):
        delta_helicity(dehn_twist_data(1), [1.0, 2.0])


def test_products():
    assert cross_helicity_product(math.pi / 4, math.pi / 4, 1) == pytest.approx(math.pi**2 / 16)
    assert cross_helicity_product(2.0, 2.0, 0) == 0
    assert linked_tube_helicity(0, 0, 1, 0.5) == 0.5
    assert linked_tube_helicity(0, 0, 0, 3.0) == 0


def test_residual_examples():
    assert residual_helicity(7.3, [2.0]) == pytest.approx(1.3)
    assert flux_lattice_constant([2.0, 4.0, 6.0]) == pytest.approx(2.0)
    assert flux_lattice_constant([1.0, math.sqrt(2)]) == 0.0
    assert flux_lattice_constant([0.0, 0.0]) == 0.0
    r = residual_helicity_report(5.0, [1.0, math.sqrt(2)])
    assert (r.value, r.F, r.reduced) == (5.0, 0.0, False)
    assert residual_helicity(-0.5, [2.0]) == pytest.approx(1.5)


def test_knm_examples():
    r = knm_rules(1, 3)
    assert (r.m, r.defined, r.identically_zero) == (3, True, False)
    r = knm_rules(2, 5)
    assert (r.m, r.defined, r.identically_zero) == (5, True, True)
    r = knm_rules(0, 2)
    assert (r.m, r.defined, r.identically_zero) == (3, True, False)
    assert not knm_rules(3, 3).defined


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: st.tuples(
    arrays(float, (n, n), elements=finite), arrays(float, n, elements=finite))))
def test_skew_gives_zero_exactly(mf):
    M, f = mf
    assert delta_helicity(BoundaryHomologyData(len(f), 2, M - M.T), f) == 0.0


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.tuples(
    arrays(float, (n, n), elements=st.integers(-9, 9).map(float)),
    arrays(float, n, elements=st.integers(-50, 50).map(float)),
    st.integers(-4, 4))))
def test_quadratic_form(args):
    M, f, c = args
    d = BoundaryHomologyData(len(f), 1, M + M.T)
    assert delta_helicity(d, c * f) == c * c * delta_helicity(d, f)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: arrays(float, (n, n), elements=st.sampled_from([0.0, 0.0, 1.0, -2.0]))),
       st.integers(0, 2**32 - 1))
def test_preserving_iff_delta_zero(M, seed):
    d = BoundaryHomologyData(len(M), 1, M + M.T)
    rng = np.random.default_rng(seed)
    zero = all(delta_helicity(d, rng.normal(size=len(M))) == 0.0 for _ in range(100))
    assert is_helicity_preserving(d) == zero


@settings(max_examples=200, deadline=None)
@given(st.floats(-1e3, 1e3), st.lists(st.integers(1, 20), min_size=1, max_size=4), st.floats(0.1, 10))
def test_residual_in_range(hel, ks, F0):
    r = residual_helicity_report(hel, [k * F0 for k in ks])
    assert r.reduced and 0.0 <= r.value < r.F
