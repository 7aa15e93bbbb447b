"""Shared helpers for the test suite."""

import numpy as np

from qsass.linalg import dense_bfgs_oracle
from qsass.store import CurvaturePairStore


def make_random_store(rng, dim, n_pairs, c=1.0, capacity=None, scale=1.0,
                      min_cos=0.0):
    """Store filled with ``n_pairs`` random pairs of acceptable curvature.

    ``min_cos`` floors the angle cosine between the members of a pair;
    pairs that barely clear the curvature threshold give the inverse a
    condition number beyond what float64 round trips can support.
    """
    if capacity is None:
        capacity = max(n_pairs, 1)
    store = CurvaturePairStore(dim, capacity, c=c)
    if n_pairs > 0 and store.capacity == 0:
        raise ValueError(f"a dim-{dim} store admits no pairs after the "
                         f"capacity clamp; cannot insert {n_pairs}")
    inserted = 0
    while inserted < n_pairs:
        s = scale * rng.standard_normal(dim)
        y = scale * rng.standard_normal(dim)
        cos = s @ y / (np.linalg.norm(s) * np.linalg.norm(y))
        if cos <= min_cos:
            continue
        if store.try_insert(s, y):
            inserted += 1
    return store


def dense_b(store):
    """Dense reconstruction of the approximation the store represents."""
    return dense_bfgs_oracle(store.s_list, store.y_list, store.c, n=store.dim)
