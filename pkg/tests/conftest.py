import itertools
import math

import numpy as np
import pytest

from pmlab.banach import Couple, NormSpec

P_CHOICES = [1.0, 2.0, math.inf, 1.5, 3.0]


def brute_norm(weights, p, v):
    """Weighted p-norm written out longhand, independent of numpy.linalg."""
    terms = [abs(w * x) for w, x in zip(weights, v)]
    if math.isinf(p):
        return max(terms)
    return sum(t ** p for t in terms) ** (1.0 / p)


def brute_sign_sup(weights, p, rows):
    """Max over every sign vector (no symmetry reduction)."""
    rows = [np.asarray(r, dtype=float) for r in rows]
    if not rows:
        return 0.0
    best = 0.0
    for eps in itertools.product((-1.0, 1.0), repeat=len(rows)):
        s = sum(e * r for e, r in zip(eps, rows))
        best = max(best, brute_norm(weights, p, s))
    return best


def random_spec(rng, dim, p=None):
    p = P_CHOICES[rng.integers(len(P_CHOICES))] if p is None else p
    return NormSpec(dim, p, tuple(np.exp(rng.uniform(-1.0, 1.0, dim))))


def random_couple(rng, dim=None, equal_p=False):
    dim = int(rng.integers(1, 4)) if dim is None else dim
    n0 = random_spec(rng, dim)
    n1 = random_spec(rng, dim, n0.p if equal_p else None)
    return Couple(n0, n1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
