import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from pmlab.banach import (Couple, NormSpec, complex_reference_norm, dual_norm,
                          intersection_norm, norm_eval, norm_subgradient, sum_norm)
from pmlab.errors import DimensionError, DomainError, UnsupportedError

from conftest import brute_norm, random_couple


@pytest.mark.parametrize("spec, v, expected", [
    (NormSpec(2, 2, (1, 1)), (3, 4), 5.0),
    (NormSpec(2, 1, (1, 2)), (1, 1), 3.0),
    (NormSpec(2, "inf", (1, 1)), (-2, 1), 2.0),
])
def test_norm_eval_examples(spec, v, expected):
    assert norm_eval(spec, v) == expected


def test_norm_eval_errors():
    n = NormSpec(2, 2, (1, 1))
    with pytest.raises(DimensionError):
        norm_eval(n, [1, 2, 3])
    with pytest.raises(DomainError):
        norm_eval(n, [1, np.nan])
    with pytest.raises(DomainError):
        NormSpec(2, 0.5, (1, 1))
    with pytest.raises(DomainError):
        NormSpec(2, 2, (1, 0))
    with pytest.raises(DimensionError):
        NormSpec(2, 2, (1,))


def test_inf_is_explicit():
    assert math.isinf(NormSpec(1, "inf", (1,)).p)
    assert NormSpec(1, "inf", (1,)).to_dict()["p"] == "inf"


specs = st.builds(
    lambda d, p, w: NormSpec(d, p, tuple(w[:d])),
    st.integers(1, 4), st.sampled_from([1.0, 2.0, math.inf, 1.5, 3.0]),
    st.lists(st.floats(0.1, 10), min_size=4, max_size=4))
vecs = hnp.arrays(np.float64, 4, elements=st.floats(-100, 100, allow_nan=False))


@settings(max_examples=200, deadline=None)
@given(n=specs, u=vecs, v=vecs, c=st.floats(-5, 5).filter(lambda x: x == 0 or abs(x) > 1e-6))
def test_norm_axioms(n, u, v, c):
    u, v = u[:n.dim], v[:n.dim]
    nu, nv = norm_eval(n, u), norm_eval(n, v)
    assert norm_eval(n, u + v) <= (nu + nv) * (1 + 1e-12) + 1e-300
    assert norm_eval(n, c * u) == pytest.approx(abs(c) * nu, rel=1e-12, abs=1e-300)
    assert (nu == 0) == (not np.any(u))
    assert nu == pytest.approx(brute_norm(n.weights, n.p, u), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(n=specs, v=vecs, shrink=hnp.arrays(np.float64, 4, elements=st.floats(0, 1)))
def test_lattice_property(n, v, shrink):
    v = v[:n.dim]
    assert norm_eval(n, shrink[:n.dim] * v) <= norm_eval(n, v) * (1 + 1e-12)


@settings(max_examples=100, deadline=None)
@given(n=specs, v=vecs)
def test_subgradient_is_norming(n, v):
    v = v[:n.dim]
    g = norm_subgradient(n, v)
    if np.any(v):
        assert g @ v == pytest.approx(norm_eval(n, v), rel=1e-10)
        assert dual_norm(n, g) <= 1 + 1e-10


def test_sum_norm_examples():
    same = Couple(NormSpec(2, 2, (1, 1)), NormSpec(2, 2, (1, 1)))
    assert sum_norm(same, [3, 4]).value == pytest.approx(5.0, abs=1e-9)
    c = Couple(NormSpec(1, 1, (1,)), NormSpec(1, 1, (3,)))
    # oracle: grid over splits v0 + v1 = 2
    grid = np.linspace(-4, 6, 100001)
    oracle = np.min(np.abs(grid) + 3 * np.abs(2 - grid))
    assert oracle == pytest.approx(2.0, abs=1e-9)
    assert sum_norm(c, [2]).value == pytest.approx(oracle, abs=1e-9)
    assert sum_norm(c, [0]).value == 0.0


def _cvx_sum_norm(cvxpy, c, v):
    x = cvxpy.Variable(c.dim)

    def nm(n, y):
        return cvxpy.norm(cvxpy.multiply(n.w, y), n.p)

    prob = cvxpy.Problem(cvxpy.Minimize(nm(c.n0, x) + nm(c.n1, v - x)))
    prob.solve()
    return prob.value


def test_sum_norm_against_convex_solver(rng):
    cvxpy = pytest.importorskip("cvxpy")
    for _ in range(60):
        c = random_couple(rng)
        v = rng.normal(size=c.dim)
        est = sum_norm(c, v)
        ref = _cvx_sum_norm(cvxpy, c, v)
        assert est.lower <= ref + 1e-6 * max(ref, 1)
        assert est.value <= ref + 1e-6 * max(ref, 1)
        assert est.value - est.lower <= 1e-6 * est.value
        v0, v1 = est.certificate
        assert np.allclose(v0 + v1, v, atol=1e-12)
        assert est.value == pytest.approx(norm_eval(c.n0, v0) + norm_eval(c.n1, v1), rel=1e-12)


def test_sum_norm_bounds(rng):
    for _ in range(50):
        c = random_couple(rng)
        v = rng.normal(size=c.dim)
        s = sum_norm(c, v).value
        assert s <= min(norm_eval(c.n0, v), norm_eval(c.n1, v)) + 1e-12
        assert s <= intersection_norm(c, v) + 1e-12


def test_intersection_examples():
    assert intersection_norm(Couple(NormSpec(2, 2, (1, 1)), NormSpec(2, 2, (1, 1))), [3, 4]) == 5
    c = Couple(NormSpec(1, 1, (1,)), NormSpec(1, 1, (3,)))
    assert intersection_norm(c, [2]) == 6
    assert intersection_norm(c, [0]) == 0


def test_complex_reference_examples():
    c = Couple(NormSpec(1, 1, (1,)), NormSpec(1, 1, (4,)))
    # oracle: Calderon product inf{lam : |v| <= lam f0^(1-t) f1^t, w0 f0 <= 1, w1 f1 <= 1}
    f0 = np.linspace(1e-3, 1.0, 2001)[:, None]
    f1 = np.linspace(1e-3, 0.25, 2001)[None, :]
    oracle = np.min(1.0 / (f0 ** 0.5 * f1 ** 0.5))
    assert oracle == pytest.approx(2.0, rel=1e-12)
    assert complex_reference_norm(c, 0.5, [1]) == pytest.approx(2.0, rel=1e-14)
    assert complex_reference_norm(c, 0.5, [0]) == 0.0
    eq = Couple(NormSpec(2, 2, (1, 3)), NormSpec(2, 2, (1, 3)))
    for theta in (0.1, 0.5, 0.9):
        assert complex_reference_norm(eq, theta, [1, 2]) == pytest.approx(norm_eval(eq.n0, [1, 2]))


def test_complex_reference_errors():
    with pytest.raises(UnsupportedError):
        complex_reference_norm(Couple(NormSpec(1, 1, (1,)), NormSpec(1, 2, (1,))), 0.5, [1])
    c = Couple(NormSpec(1, 1, (1,)), NormSpec(1, 1, (4,)))
    for theta in (0.0, 1.0, -0.2):
        with pytest.raises(DomainError):
            complex_reference_norm(c, theta, [1])


def test_complex_reference_monotone_in_theta(rng):
    for _ in range(20):
        d = int(rng.integers(1, 4))
        w0 = np.exp(rng.uniform(-1, 1, d))
        w1 = w0 * np.exp(rng.uniform(0, 1, d))
        c = Couple(NormSpec(d, 2, tuple(w0)), NormSpec(d, 2, tuple(w1)))
        v = rng.normal(size=d)
        vals = [complex_reference_norm(c, t, v) for t in np.linspace(0.05, 0.95, 19)]
        assert all(b >= a * (1 - 1e-14) for a, b in zip(vals, vals[1:]))


def test_json_round_trip():
    c = Couple(NormSpec(2, "inf", (1, 2)), NormSpec(2, 1.5, (0.5, 3)))
    text = json.dumps(c.to_dict())
    assert Couple.from_dict(json.loads(text)) == c
    with pytest.raises(DomainError):
        NormSpec.from_dict({"dim": 1})
