import numpy as np
import pytest
from sklearn.base import clone

from helitool import geometry as geo
from helitool.estimators import BiotSavartTransformer, HelicityEstimator, LinkingNumber
from helitool.helicity import biot_savart
from helitool.integrate import MCConfig
from helitool.helicity import helicity_6d


def test_params_roundtrip():
    est = HelicityEstimator(method="4d", n_samples=1000)
    assert est.get_params()["method"] == "4d"
    est.set_params(seed=7)
    c = clone(est)
    assert c.get_params() == est.get_params() and not hasattr(c, "helicity_")


def test_fit_matches_functional_api(twisted):
    est = HelicityEstimator(n_samples=5000, seed=3).fit(twisted)
    ref = helicity_6d(twisted, MCConfig(5000, seed=3)).estimate
    assert (est.helicity_, est.std_error_, est.n_used_) == (ref.value, ref.std_error, ref.n_used)
    assert est.report_.method == "six_d"


def test_fit_validation(twisted):
    with pytest.raises(ValueError):
        HelicityEstimator(method="nope", n_samples=100).fit(twisted)
    with pytest.raises(TypeError):
        HelicityEstimator().fit(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        HelicityEstimator(method="arnold", n_samples=100, orders=(4, 8)).fit(twisted)


def test_transformer(twisted, torus):
    p = np.array([[1.1, 0.0, 0.1], [0.0, -0.9, 0.0]])
    out = BiotSavartTransformer(orders=(6, 8, 8)).fit(twisted).transform(p)
    np.testing.assert_array_equal(out, biot_savart(twisted, p, (6, 8, 8)))
    with pytest.raises(ValueError):
        BiotSavartTransformer().fit(twisted).transform(np.zeros((2, 2)))
    with pytest.raises(Exception):
        BiotSavartTransformer().transform(p)


def test_linking_number():
    pair = geo.hopf_pair()
    assert LinkingNumber().fit(pair).linking_number_ == 1
    assert LinkingNumber(method="crossing").fit(pair).linking_number_ == 1
