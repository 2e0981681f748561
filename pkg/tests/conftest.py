import numpy as np
import pytest

from helitool import geometry as geo
from helitool.fields import dehn_twist_map, longitudinal_field, pushforward_density_field


@pytest.fixture
def torus():
    return geo.SolidTorus(1.0, 0.5)


@pytest.fixture
def base(torus):
    return longitudinal_field(torus)


@pytest.fixture
def twisted(torus, base):
    return pushforward_density_field(dehn_twist_map(torus, 1), base)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def interior_points(t, rng, n, rmax=0.8):
    c = geo.ToroidalCoords(
        t.R * rmax * np.sqrt(rng.uniform(size=n)), rng.uniform(0, 2 * np.pi, n), rng.uniform(0, 2 * np.pi, n)
    )
    return geo.toroidal_to_cartesian(t, c)
