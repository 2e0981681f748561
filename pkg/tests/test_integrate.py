import math
import threading

import numpy as np
import pytest

from helitool import geometry as geo
from helitool.integrate import (
    THREADS_ENV,
    Estimate,
    MCConfig,
    NonFiniteIntegrandError,
    curve_pair_quadrature,
    gauss_legendre,
    mc_pair,
    mc_volume,
    toroidal_quadrature,
)


def test_config_validation():
    for bad in (dict(n_samples=0), dict(n_shards=0), dict(eps_cutoff=-1.0), dict(seed=-1), dict(chunk_size=0)):
        with pytest.raises(ValueError):
            MCConfig(**bad)
    assert MCConfig(10, n_shards=3).per_shard == 4
    assert MCConfig(n_workers=3).workers() == 3


def test_env_workers(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "2")
    assert MCConfig().workers() == 2


def test_volume_exact_for_constant(torus):
    e = mc_volume(torus, lambda x: np.ones(len(x)), MCConfig(10_000, n_shards=4))
    assert e.value == pytest.approx(geo.domain_volume(torus), rel=1e-14)
    assert e.std_error == 0.0 and e.n_used == 10_000


def test_volume_of_polynomial(torus):
    # integral of rho^2 over the torus is 2 pi^2 A R^2 (A^2 + 3 R^2 / 4)
    e = mc_volume(torus, lambda x: x[:, 0] ** 2 + x[:, 1] ** 2, MCConfig(400_000, seed=3))
    exact = 2 * np.pi**2 * 0.25 * (1 + 0.75 * 0.25)
    assert e.within(exact, 4)


def test_pair_integral_product(torus):
    ball = geo.Ball([0, 0, 5.0], 1.0)
    e = mc_pair(torus, ball, lambda x, y: np.ones(len(x)), MCConfig(1000))
    assert e.value == pytest.approx(geo.domain_volume(torus) * geo.domain_volume(ball))


def test_pair_cutoff_counts_rejections(torus):
    e = mc_pair(torus, torus, lambda x, y: np.ones(len(x)), MCConfig(20_000, eps_cutoff=0.3))
    assert e.n_used == 20_000 and e.n_rejected > 0
    assert e.value < geo.domain_volume(torus) ** 2


def test_determinism_across_workers(torus):
    f = lambda x: np.sin(x[:, 0]) * x[:, 2]
    runs = [mc_volume(torus, f, MCConfig(50_000, seed=9, n_shards=5, chunk_size=3000, n_workers=w)) for w in (1, 2, 8)]
    assert runs[0] == runs[1] == runs[2]
    assert mc_volume(torus, f, MCConfig(50_000, seed=10, n_shards=5)) != runs[0]


def test_nonfinite_integrand(torus):
    with pytest.raises(NonFiniteIntegrandError):
        mc_volume(torus, lambda x: np.full(len(x), np.nan), MCConfig(100))


def test_estimate_arithmetic():
    d = Estimate(3.0, 0.3, 10) - Estimate(1.0, 0.4, 20, 1)
    assert (d.value, d.std_error, d.n_used, d.n_rejected) == (2.0, pytest.approx(0.5), 30, 1)
    assert d.within(3.4) and not d.within(3.6)
    assert d.to_dict()["value"] == 2.0


def test_gauss_legendre():
    x, w = gauss_legendre(5, 0.0, 2.0)
    assert w @ x**9 == pytest.approx(2.0**10 / 10)


def test_curve_pair_quadrature_spectral():
    a, b = geo.hopf_pair()
    val = curve_pair_quadrature(a, b, lambda s, t: np.exp(np.cos(s)) * np.cos(t) ** 2, 32)
    # integral of e^{cos s} is 2 pi I0(1); of cos^2 is pi
    assert val == pytest.approx(2 * np.pi * 1.2660658777520082 * np.pi, rel=1e-13)


def test_toroidal_quadrature(torus):
    val = toroidal_quadrature(torus, lambda x: np.ones(x.shape[:-1]))
    assert val == pytest.approx(geo.domain_volume(torus), rel=1e-12)


def test_toroidal_moment(torus):
    val = toroidal_quadrature(torus, lambda x: x[..., 0] ** 2 + x[..., 1] ** 2)
    assert val == pytest.approx(np.pi**2 / 2 * 1.1875, abs=1e-8)


def test_unbiased_on_polynomials(torus):
    rng = np.random.default_rng(21)
    hits = 0
    for i in range(20):
        c = rng.normal(size=4)
        f = lambda x, c=c: c[0] + c[1] * x[..., 0] ** 2 + c[2] * x[..., 2] ** 2 + c[3] * x[..., 0] * x[..., 1]
        exact = toroidal_quadrature(torus, f, (16, 32, 32))
        hits += mc_volume(torus, f, MCConfig(20_000, seed=i)).within(exact, 4)
    assert hits >= 19
