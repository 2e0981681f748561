"""Estimator-style wrappers so the integrals compose with sklearn tooling.

``HelicityEstimator().fit(field)`` computes the helicity of a vector field;
``BiotSavartTransformer().fit(field).transform(points)`` evaluates its vector
potential.  Hyper-parameters follow the usual ``get_params``/``set_params``
protocol.
"""

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_field, check_orders, check_points, check_seed
from .helicity import biot_savart, helicity_4d, helicity_6d, helicity_arnold
from .integrate import MCConfig
from .linking import gauss_linking, linking_integer, signed_crossing_linking

METHODS = ("six_d", "four_d", "arnold")


class HelicityEstimator(BaseEstimator):
    """Monte Carlo helicity of a divergence-free field.

    Parameters
    ----------
    method : {"six_d", "four_d", "arnold"}
    n_samples, seed, n_shards, eps_cutoff : Monte Carlo settings, see
        :class:`helitool.integrate.MCConfig`.
    n_segment : int
        Gauss-Legendre nodes per vertical chord (``four_d`` only).
    orders : tuple of 3 ints
        Biot-Savart ray quadrature orders (``arnold`` only).

    Attributes
    ----------
    helicity_, std_error_ : float
    report_ : HelicityReport
    """

    def __init__(self, method="six_d", n_samples=1_000_000, seed=0, n_shards=8, eps_cutoff=None,
                 n_segment=16, orders=(4, 8, 16)):
        self.method = method
        self.n_samples = n_samples
        self.seed = seed
        self.n_shards = n_shards
        self.eps_cutoff = eps_cutoff
        self.n_segment = n_segment
        self.orders = orders

    def _config(self):
        return MCConfig(int(self.n_samples), check_seed(self.seed), int(self.n_shards), self.eps_cutoff)

    def fit(self, field, y=None):
        V = check_field(field)
        method = {"6d": "six_d", "4d": "four_d"}.get(self.method, self.method)
        if method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        cfg = self._config()
        if method == "six_d":
            rep = helicity_6d(V, cfg)
        elif method == "four_d":
            rep = helicity_4d(V, cfg, int(self.n_segment))
        else:
            rep = helicity_arnold(V, cfg, check_orders(self.orders))
        self.report_ = rep
        self.helicity_ = rep.estimate.value
        self.std_error_ = rep.estimate.std_error
        self.n_used_ = rep.estimate.n_used
        self.n_rejected_ = rep.estimate.n_rejected
        return self


class BiotSavartTransformer(TransformerMixin, BaseEstimator):
    """Maps points (N, 3) to the Biot-Savart vector potential of a field."""

    def __init__(self, orders=(24, 48, 48), delta=0.0):
        self.orders = orders
        self.delta = delta

    def fit(self, field, y=None):
        self.field_ = check_field(field)
        self.orders_ = check_orders(self.orders)
        return self

    def transform(self, X):
        check_is_fitted(self, "field_")
        return biot_savart(self.field_, check_points(X), self.orders_, float(self.delta))


class LinkingNumber(BaseEstimator):
    """Linking number of a pair of loops, by Gauss integral or crossings."""

    def __init__(self, method="gauss", n=256, direction=(0.0, 0.0, 1.0), tol=0.05):
        self.method = method
        self.n = n
        self.direction = direction
        self.tol = tol

    def fit(self, loops, y=None):
        a, b = loops
        if self.method == "gauss":
            self.value_ = gauss_linking(a, b, int(self.n))
            self.linking_number_ = linking_integer(a, b, int(self.n), float(self.tol))
        elif self.method == "crossing":
            self.linking_number_ = signed_crossing_linking(a, b, self.direction)
            self.value_ = float(self.linking_number_)
        else:
            raise ValueError(f"unknown method {self.method!r}")
        return self
