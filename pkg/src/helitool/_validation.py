"""Input checking shared by the estimator classes and the CLI."""

import numpy as np
from sklearn.utils.validation import check_array

from .fields import VectorField
from .geometry import Ball, DisjointPair, SolidTorus


def check_points(X):
    """Return ``X`` as a finite float array of shape (N, 3)."""
    X = check_array(np.atleast_2d(X), dtype=np.float64, ensure_all_finite=True)
    if X.shape[1] != 3:
        raise ValueError(f"points must have 3 coordinates, got shape {X.shape}")
    return X


def check_field(V):
    if not isinstance(V, VectorField):
        raise TypeError(f"expected a VectorField, got {type(V).__name__}")
    if not isinstance(V.domain, (SolidTorus, Ball, DisjointPair)):
        raise TypeError(f"unsupported domain {V.domain!r}")
    return V


def check_orders(orders, n=3):
    orders = tuple(int(o) for o in orders)
    if len(orders) != n or min(orders) < 1:
        raise ValueError(f"orders must be {n} positive integers, got {orders}")
    return orders


def check_seed(seed):
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    return seed
