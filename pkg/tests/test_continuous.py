import itertools
import json
import math

import numpy as np
import pytest
from scipy import integrate

from pmlab.banach import Couple, NormSpec, norm_eval
from pmlab.continuous import (StepFunction, cell_weights, grid, integral_full,
                              j_seminorm_continuous, pm_norm_continuous, restricted_sup,
                              tail_supremum)
from pmlab.errors import DimensionError, DomainError
from pmlab.solver import SolverCfg

from conftest import brute_norm, brute_sign_sup, random_couple

ABS = Couple(NormSpec(1, 1, (1,)), NormSpec(1, 1, (1,)))
FAST = SolverCfg(iters=300, restarts=2)


def random_step(rng, dim, ncells=None, span=3.0):
    ncells = int(rng.integers(1, 7)) if ncells is None else ncells
    bp = np.sort(rng.uniform(-span, span, ncells + 1))
    bp = np.unique(np.round(bp, 6))
    vals = rng.normal(size=(bp.size - 1, dim))
    vals[rng.random(bp.size - 1) < 0.15] = 0.0
    return StepFunction(bp, vals)


def quad_weights(theta, bp):
    return np.array([[integrate.quad(lambda t: math.exp((j - theta) * t), lo, hi,
                                     epsabs=0, epsrel=1e-13)[0]
                      for lo, hi in zip(bp[:-1], bp[1:])] for j in (0, 1)])


def oracle_seminorm(c, theta, u):
    W = quad_weights(theta, u.breakpoints)
    return max(brute_sign_sup(c.spec(j).weights, c.spec(j).p,
                              [W[j, k] * u.values[k] for k in range(u.ncells)])
               for j in (0, 1))


def test_example_unit_cell():
    u = StepFunction.indicator(0.0, 1.0, [1.0])
    expected = max(2 * (1 - math.exp(-0.5)), 2 * (math.exp(0.5) - 1))
    assert j_seminorm_continuous(ABS, 0.5, u).value == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(1.29744, abs=1e-5)
    assert j_seminorm_continuous(ABS, 0.5, StepFunction.zero(1)).value == 0.0


def test_refined_phi_converges_from_below():
    # phi oscillating inside the cell on finer grids never beats the box value
    u = StepFunction.indicator(0.0, 1.0, [1.0])
    box = j_seminorm_continuous(ABS, 0.5, u).value
    best = []
    for m in (1, 2, 4, 8):
        sub = np.linspace(0.0, 1.0, m + 1)
        W = cell_weights(0.5, sub)
        best.append(max(abs(np.dot(eps, W[j])) for j in (0, 1)
                        for eps in itertools.product((-1, 1), repeat=m)))
    assert all(b <= box * (1 + 1e-14) for b in best)
    assert best[-1] == pytest.approx(box, rel=1e-14)


def test_cell_weights_match_quadrature(rng):
    for _ in range(20):
        theta = rng.uniform(0.05, 0.95)
        bp = np.sort(rng.uniform(-5, 5, 6))
        assert np.allclose(cell_weights(theta, bp), quad_weights(theta, bp), rtol=1e-12, atol=0)
        assert np.all(cell_weights(theta, bp) > 0)


def test_matches_oracle(rng):
    for _ in range(60):
        c = random_couple(rng)
        theta = rng.uniform(0.1, 0.9)
        u = random_step(rng, c.dim)
        assert j_seminorm_continuous(c, theta, u).value == pytest.approx(
            oracle_seminorm(c, theta, u), rel=1e-10, abs=0)


def test_refinement_invariance(rng):
    for _ in range(40):
        c = random_couple(rng)
        theta = rng.uniform(0.1, 0.9)
        u = random_step(rng, c.dim)
        cuts = rng.uniform(u.breakpoints[0], u.breakpoints[-1], 3)
        v = u.split_at(cuts)
        assert v.ncells >= u.ncells
        assert j_seminorm_continuous(c, theta, v).value == pytest.approx(
            j_seminorm_continuous(c, theta, u).value, rel=1e-12)


def test_nested_cells_monotone(rng):
    for _ in range(60):
        c = random_couple(rng)
        u = random_step(rng, c.dim)
        V = [k for k in range(u.ncells) if rng.random() < 0.7]
        U = [k for k in V if rng.random() < 0.6]
        for j in (0, 1):
            assert restricted_sup(c, 0.4, u, j, U) <= restricted_sup(c, 0.4, u, j, V) * (1 + 1e-12)
        assert (j_seminorm_continuous(c, 0.4, u, U).value
                <= j_seminorm_continuous(c, 0.4, u, V).value * (1 + 1e-12))


def test_integral_full_examples_and_bounds(rng):
    v = np.array([2.0])
    assert np.array_equal(integral_full(ABS, 0.5, StepFunction.indicator(0, 1, v)).total, v)
    u = StepFunction([-1.0, 0.0, 1.0], [[1.0], [-1.0]])
    assert not np.any(integral_full(ABS, 0.5, u).total)
    for _ in range(60):
        c = random_couple(rng)
        u = random_step(rng, c.dim, 6)
        chk = integral_full(c, rng.uniform(0.1, 0.9), u)
        assert chk.ratios["total_sum"] <= 2 * (1 + 1e-9)
        assert chk.ratios["negative_A0"] <= 1 + 1e-9
        assert chk.ratios["positive_A1"] <= 1 + 1e-9
        assert np.allclose(chk.negative + chk.positive, chk.total, rtol=0, atol=1e-12)


def test_tail_supremum(rng):
    for _ in range(30):
        c = random_couple(rng)
        theta = rng.uniform(0.1, 0.9)
        u = random_step(rng, c.dim)
        full = [restricted_sup(c, theta, u, j, range(u.ncells)) for j in (0, 1)]
        assert tail_supremum(c, theta, u, 0.0) == pytest.approx(tuple(full), rel=1e-12)
        radius = np.max(np.abs(u.breakpoints))
        curve = [tail_supremum(c, theta, u, R) for R in np.linspace(0, radius, 12)]
        for j in (0, 1):
            seq = [t[j] for t in curve]
            assert all(b <= a * (1 + 1e-12) for a, b in zip(seq, seq[1:]))
        assert tail_supremum(c, theta, u, radius) == (0.0, 0.0)
        assert tail_supremum(c, theta, u, radius + 1) == (0.0, 0.0)
    with pytest.raises(DomainError):
        tail_supremum(ABS, 0.5, StepFunction.zero(1), -1.0)


def test_pm_examples():
    a = np.array([3.0, 4.0])
    c = Couple(NormSpec(2, 2, (1, 1)), NormSpec(2, 2, (1, 1)))
    # u = a 1_[0,1) is feasible; its seminorm exceeds ||a|| = 5 by the factor
    # (e^{1-theta} - 1) / (1 - theta), and a one-cell u on [0, h) approaches 5 as h -> 0
    direct = j_seminorm_continuous(c, 0.4, StepFunction.indicator(0, 1, a)).value
    assert direct == pytest.approx(5 * math.expm1(0.6) / 0.6, rel=1e-14)
    prev = math.inf
    for cpu in (1, 2, 8, 64):
        up, low = pm_norm_continuous(c, 0.4, a, support_R=1.0, cells_per_unit=cpu,
                                     solver=SolverCfg(iters=0, restarts=1))
        h = 1.0 / cpu
        assert up.value <= direct * (1 + 1e-12)
        assert up.value <= 5 * math.expm1(0.6 * h) / (0.6 * h) * (1 + 1e-12)
        assert 5 <= up.value <= prev
        assert low.value >= 2.5
        prev = up.value
    assert prev == pytest.approx(5, rel=1e-2)
    up, low = pm_norm_continuous(c, 0.4, [0, 0], solver=FAST)
    assert up.value == low.value == 0.0
    c1 = Couple(NormSpec(1, 1, (1,)), NormSpec(1, 1, (4,)))
    up, low = pm_norm_continuous(c1, 0.5, [1.0], solver=FAST)
    assert low.value >= 2 - 1e-12 and low.value <= up.value


def test_pm_certificate_and_grid_refinement(rng):
    for _ in range(3):
        c = random_couple(rng, dim=2)
        a = rng.normal(size=2)
        prev, init = math.inf, None
        for cpu in (1, 2, 4):
            up, low = pm_norm_continuous(c, 0.5, a, support_R=1.0, cells_per_unit=cpu,
                                         solver=FAST, init=init)
            assert np.allclose(up.certificate.integral(), a, rtol=0, atol=1e-12)
            assert j_seminorm_continuous(c, 0.5, up.certificate).value == up.value
            assert up.value <= prev + 1e-9
            assert low.value <= up.value * (1 + 1e-9)
            prev, init = up.value, up.certificate


def test_step_function_validation_and_json():
    with pytest.raises(DomainError):
        StepFunction([0.0, 0.0], [[1.0]])
    with pytest.raises(DimensionError):
        StepFunction([0.0, 1.0, 2.0], [[1.0]])
    with pytest.raises(DomainError):
        grid(0.0, 2)
    with pytest.raises(DomainError):
        cell_weights(1.0, [0, 1])
    u = StepFunction([-1.0, 0.5, 2.0], [[1.0, 2.0], [3.0, -4.0]])
    d = json.loads(json.dumps(u.to_dict()))
    back = StepFunction.from_dict(d)
    assert np.array_equal(back.breakpoints, u.breakpoints)
    assert np.array_equal(back.values, u.values)
    assert list(grid(1.0, 2)) == [-1.0, -0.5, 0.0, 0.5, 1.0]
    assert norm_eval(NormSpec(2, 1, (1, 1)), u.integral()) == pytest.approx(abs(1.5 + 4.5) + abs(3 - 6))
