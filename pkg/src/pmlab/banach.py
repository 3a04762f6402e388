"""Weighted l^p norms on R^d and couples of them."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import optimize

from .errors import DimensionError, DomainError, UnsupportedError

EXACT = "exact"
UPPER = "certified-upper"
LOWER = "certified-lower"


@dataclass(frozen=True)
class NormEstimate:
    """A computed norm value together with what witnesses it.

    ``kind`` says whether ``value`` is the exact quantity or a certified
    one-sided bound. ``lower`` optionally carries a matching certified
    lower bound (for upper estimates).
    """

    value: float
    kind: str
    certificate: Any = None
    lower: float | None = None
    details: dict = field(default_factory=dict)


def _as_p(p) -> float:
    if isinstance(p, str):
        if p.strip().lower() in ("inf", "infinity", "∞"):
            return math.inf
        raise DomainError(f"unrecognised exponent {p!r}")
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise DomainError(f"exponent must satisfy p >= 1, got {p}")
    return p


@dataclass(frozen=True)
class NormSpec:
    """Weighted l^p norm ``(sum_i (w_i |v_i|)^p)^(1/p)``; ``p`` may be ``math.inf``."""

    dim: int
    p: float
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "p", _as_p(self.p))
        w = tuple(float(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError(f"dim must be a positive integer, got {self.dim}")
        if len(w) != self.dim:
            raise DimensionError(f"expected {self.dim} weights, got {len(w)}")
        if not all(math.isfinite(x) and x > 0 for x in w):
            raise DomainError("weights must be finite and strictly positive")

    @classmethod
    def uniform(cls, dim: int, p=2.0, weight: float = 1.0) -> "NormSpec":
        return cls(dim, p, (weight,) * dim)

    @property
    def w(self) -> np.ndarray:
        return np.asarray(self.weights)

    @property
    def dual_exponent(self) -> float:
        if math.isinf(self.p):
            return 1.0
        if self.p == 1.0:
            return math.inf
        return self.p / (self.p - 1.0)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "p": "inf" if math.isinf(self.p) else self.p,
                "weights": list(self.weights)}

    @classmethod
    def from_dict(cls, d: dict) -> "NormSpec":
        try:
            return cls(int(d["dim"]), d["p"], tuple(d["weights"]))
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed NormSpec: {d!r}") from exc


@dataclass(frozen=True)
class Couple:
    n0: NormSpec
    n1: NormSpec

    def __post_init__(self):
        if self.n0.dim != self.n1.dim:
            raise DimensionError(f"couple dimensions differ: {self.n0.dim} vs {self.n1.dim}")

    @property
    def dim(self) -> int:
        return self.n0.dim

    def spec(self, j: int) -> NormSpec:
        return self.n0 if j == 0 else self.n1

    @property
    def equal_p(self) -> bool:
        return self.n0.p == self.n1.p

    def to_dict(self) -> dict:
        return {"n0": self.n0.to_dict(), "n1": self.n1.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "Couple":
        try:
            return cls(NormSpec.from_dict(d["n0"]), NormSpec.from_dict(d["n1"]))
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed Couple: {d!r}") from exc


def as_vector(v, dim: int) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != dim:
        raise DimensionError(f"expected a vector of length {dim}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise DomainError("vector entries must be finite")
    return v


def _scaled_norm(y: np.ndarray, p: float) -> float:
    # factor out the largest entry so tiny vectors do not underflow in |y|^p
    m = float(np.max(np.abs(y), initial=0.0))
    if m == 0.0 or math.isinf(p) or p == 1.0:
        return float(np.linalg.norm(y, ord=p)) if y.size else 0.0
    return m * float(np.linalg.norm(y / m, ord=p))


def norm_eval(n: NormSpec, v) -> float:
    v = as_vector(v, n.dim)
    return _scaled_norm(n.w * v, n.p)


def dual_norm(n: NormSpec, f) -> float:
    """Norm of the functional ``v -> <f, v>`` with respect to ``n``."""
    f = as_vector(f, n.dim)
    return _scaled_norm(f / n.w, n.dual_exponent)


def norm_subgradient(n: NormSpec, v) -> np.ndarray:
    """An element ``g`` of the subdifferential: ``<g, v> = ||v||`` and ``||g||_* <= 1``."""
    v = np.asarray(v, dtype=np.float64)
    y = n.w * v
    g = np.zeros_like(y)
    if not np.any(y):
        return g
    if math.isinf(n.p):
        i = int(np.argmax(np.abs(y)))
        g[i] = n.w[i] * np.sign(y[i])
    elif n.p == 1.0:
        g = n.w * np.sign(y)
    else:
        scale = _scaled_norm(y, n.p)
        g = n.w * np.sign(y) * (np.abs(y) / scale) ** (n.p - 1.0)
    return g


def intersection_norm(c: Couple, v) -> float:
    return max(norm_eval(c.n0, v), norm_eval(c.n1, v))


def _split_cost(c: Couple, v: np.ndarray, v0: np.ndarray) -> float:
    return norm_eval(c.n0, v0) + norm_eval(c.n1, v - v0)


def _dual_lower(c: Couple, v: np.ndarray, f: np.ndarray) -> float:
    scale = max(dual_norm(c.n0, f), dual_norm(c.n1, f))
    if scale == 0.0:
        return 0.0
    return max(0.0, float(f @ v) / scale)


def _sum_norm_lp(c: Couple, v: np.ndarray):
    # variables: x (= v0, d entries), then auxiliaries per norm
    # p=1 : t_i >= +/- w_i y_i, cost sum t_i ; p=inf : s >= +/- w_i y_i, cost s
    d = c.dim
    cols = d
    blocks = []
    for j, spec in enumerate((c.n0, c.n1)):
        naux = d if spec.p == 1.0 else 1
        blocks.append((spec, cols, naux))
        cols += naux
    cost = np.zeros(cols)
    a_ub, b_ub = [], []
    for j, (spec, start, naux) in enumerate(blocks):
        cost[start:start + naux] = 1.0
        for i in range(d):
            t_col = start + (i if naux == d else 0)
            for s in (1.0, -1.0):
                row = np.zeros(cols)
                # y = x (j=0) or y = v - x (j=1);  s*w_i*y_i - t <= 0
                coef = s * spec.w[i] * (1.0 if j == 0 else -1.0)
                row[i] = coef
                row[t_col] = -1.0
                a_ub.append(row)
                b_ub.append(0.0 if j == 0 else -s * spec.w[i] * v[i])
    bounds = [(None, None)] * d + [(0, None)] * (cols - d)
    res = optimize.linprog(cost, A_ub=np.array(a_ub), b_ub=np.array(b_ub),
                           bounds=bounds, method="highs")
    v0 = res.x[:d] if res.status == 0 else np.zeros(d)
    # dual: maximise <f, v> over the intersection of the two dual balls
    # variables f (d) and |f| splits g (d); ||f/w||_q <= 1 for each spec
    dcols = 2 * d
    dcost = np.concatenate([-v, np.zeros(d)])
    da, db = [], []
    for i in range(d):
        for s in (1.0, -1.0):
            row = np.zeros(dcols)
            row[i] = s
            row[d + i] = -1.0
            da.append(row)
            db.append(0.0)
    for spec in (c.n0, c.n1):
        if math.isinf(spec.p):  # dual is weighted l^1
            row = np.zeros(dcols)
            row[d:] = 1.0 / spec.w
            da.append(row)
            db.append(1.0)
        else:  # dual is weighted l^inf
            for i in range(d):
                row = np.zeros(dcols)
                row[d + i] = 1.0 / spec.w[i]
                da.append(row)
                db.append(1.0)
    dres = optimize.linprog(dcost, A_ub=np.array(da), b_ub=np.array(db),
                            bounds=[(None, None)] * d + [(0, None)] * d, method="highs")
    f = dres.x[:d] if dres.status == 0 else np.zeros(d)
    return v0, [f]


def _slsqp(fun, x0, jac, bounds, constraints):
    with warnings.catch_warnings():
        # SLSQP clips iterates to the bounds and says so; the clip is harmless
        warnings.filterwarnings("ignore", "Values in x were outside bounds", RuntimeWarning)
        return optimize.minimize(fun, x0, jac=jac, method="SLSQP", bounds=bounds,
                                 constraints=constraints,
                                 options={"ftol": 1e-15, "maxiter": 500})


def _split_vars(z: np.ndarray, d: int) -> np.ndarray:
    return z[:d] + z[d:2 * d]


def _sum_norm_primal(c: Couple, v: np.ndarray, x0: np.ndarray) -> np.ndarray:
    """Epigraph form of ``min ||x||_0 + ||v - x||_1`` solved by SLSQP.

    Each weighted residual is split as ``a - b`` with ``a, b >= 0``, which
    makes p = 1 and p = inf linear and leaves finite p nonsmooth only at 0.
    Variables: ``x``, then ``(a, b)`` per side, then the two epigraph heights.
    """
    d = c.dim
    n = 5 * d + 2
    off = (d, 3 * d)
    aeq = np.zeros((2 * d, n))
    beq = np.zeros(2 * d)
    for j, spec in enumerate((c.n0, c.n1)):
        sgn = 1.0 if j == 0 else -1.0
        for i in range(d):
            row = aeq[j * d + i]
            row[i] = sgn * spec.w[i]
            row[off[j] + i], row[off[j] + d + i] = -1.0, 1.0
            beq[j * d + i] = 0.0 if j == 0 else -spec.w[i] * v[i]
    cons = [{"type": "eq", "fun": lambda z: aeq @ z - beq, "jac": lambda z: aeq}]
    for j, spec in enumerate((c.n0, c.n1)):
        t, o = 5 * d + j, off[j]
        if spec.p == 1.0 or math.isinf(spec.p):
            rows = np.zeros((1 if spec.p == 1.0 else d, n))
            rows[:, t] = 1.0
            for i in range(d):
                k = 0 if spec.p == 1.0 else i
                rows[k, o + i] = rows[k, o + d + i] = -1.0
            cons.append({"type": "ineq", "fun": lambda z, R=rows: R @ z,
                         "jac": lambda z, R=rows: R})
            continue

        def fun(z, o=o, t=t, p=spec.p):
            return z[t] - _scaled_norm(_split_vars(z[o:], d), p)

        def jac(z, o=o, t=t, p=spec.p):
            g = np.zeros(n)
            g[t] = 1.0
            y = _split_vars(z[o:], d)
            nm = _scaled_norm(y, p)
            if nm > 0:
                g[o:o + d] = g[o + d:o + 2 * d] = -(y / nm) ** (p - 1.0)
            return g

        cons.append({"type": "ineq", "fun": fun, "jac": jac})
    z0 = np.zeros(n)
    z0[:d] = x0
    for j, spec in enumerate((c.n0, c.n1)):
        y = x0 if j == 0 else v - x0
        wy = spec.w * y
        z0[off[j]:off[j] + d] = np.maximum(wy, 0.0)
        z0[off[j] + d:off[j] + 2 * d] = np.maximum(-wy, 0.0)
        z0[5 * d + j] = norm_eval(spec, y)
    cost = np.zeros(n)
    cost[5 * d:] = 1.0
    res = _slsqp(lambda z: cost @ z, z0, lambda z: cost,
                 [(None, None)] * d + [(0.0, None)] * (4 * d + 2), cons)
    return res.x[:d] if np.all(np.isfinite(res.x)) else x0


def _sum_norm_dual(c: Couple, v: np.ndarray, f0: np.ndarray) -> np.ndarray:
    """``max <f, v>`` over the intersection of the two dual balls, by SLSQP.

    ``f = g - h`` with ``g, h >= 0``; constraints act on ``g + h`` so that
    dual exponents 1 and inf are linear and finite ones are smooth.
    """
    d = c.dim
    hi = np.full(d, np.inf)
    lin_a, lin_b, cons = [], [], []
    for spec in (c.n0, c.n1):
        q, w = spec.dual_exponent, spec.w
        if math.isinf(q):
            hi = np.minimum(hi, w)
        elif q == 1.0:
            lin_a.append(np.concatenate([1.0 / w, 1.0 / w]))
            lin_b.append(1.0)
        else:
            def fun(z, q=q, w=w):
                return 1.0 - np.sum((_split_vars(z, d) / w) ** q)

            def jac(z, q=q, w=w):
                g = -q * (_split_vars(z, d) / w) ** (q - 1.0) / w
                return np.concatenate([g, g])

            cons.append({"type": "ineq", "fun": fun, "jac": jac})
    if lin_a:
        A, b = np.array(lin_a), np.array(lin_b)
        cons.append({"type": "ineq", "fun": lambda z: b - A @ z, "jac": lambda z: -A})
    bounds = [(0.0, None if math.isinf(h) else float(h)) for h in np.concatenate([hi, hi])]
    obj = np.concatenate([-v, v])
    z0 = np.concatenate([np.maximum(f0, 0.0), np.maximum(-f0, 0.0)])
    res = _slsqp(lambda z: obj @ z, z0, lambda z: obj, bounds, cons)
    return res.x[:d] - res.x[d:] if np.all(np.isfinite(res.x)) else f0


def _sum_norm_nlp(c: Couple, v: np.ndarray):
    cands = [_sum_norm_primal(c, v, x0) for x0 in (np.zeros_like(v), v.copy(), 0.5 * v)]
    cands += [np.zeros_like(v), v.copy()]  # trivial splits are always candidates
    v0 = min(cands, key=lambda x: _split_cost(c, v, x))
    g0, g1 = norm_subgradient(c.n0, v0), norm_subgradient(c.n1, v - v0)
    # at an accurate primal split the gradient of a smooth side is dual optimal
    duals = [g0, g1, 0.5 * (g0 + g1), _sum_norm_dual(c, v, np.zeros_like(v))]
    return v0, duals


def sum_norm(c: Couple, v, tol: float = 1e-9) -> NormEstimate:
    """Norm of ``v`` in the sum space: ``inf ||v0||_0 + ||v1||_1`` over ``v0 + v1 = v``.

    Returns the value of the best decomposition found (certificate
    ``(v0, v1)``) with a duality lower bound in ``lower``. The p = 1 / p = 1
    case is solved coordinatewise, other p in {1, inf} combinations by
    linear programming, and everything else by SLSQP on the primal epigraph
    and on the dual.
    """
    v = as_vector(v, c.dim)
    if not np.any(v):
        zero = np.zeros_like(v)
        return NormEstimate(0.0, EXACT, (zero, zero), lower=0.0)
    p0, p1 = c.n0.p, c.n1.p
    if p0 == p1 and (np.all(c.n0.w <= c.n1.w) or np.all(c.n1.w <= c.n0.w)):
        # nested balls: the smaller norm is exact by the triangle inequality
        j = 0 if np.all(c.n0.w <= c.n1.w) else 1
        val = norm_eval(c.spec(j), v)
        zero = np.zeros_like(v)
        cert = (v.copy(), zero) if j == 0 else (zero, v.copy())
        return NormEstimate(val, EXACT, cert, lower=val, details={"gap": 0.0})
    if p0 == 1.0 and p1 == 1.0:
        v0 = np.where(c.n0.w <= c.n1.w, v, 0.0)
        duals = [np.minimum(c.n0.w, c.n1.w) * np.sign(v)]
    elif p0 in (1.0, math.inf) and p1 in (1.0, math.inf):
        v0, duals = _sum_norm_lp(c, v)
    else:
        v0, duals = _sum_norm_nlp(c, v)
    v1 = v - v0
    upper = _split_cost(c, v, v0)
    lower = max(_dual_lower(c, v, f) for f in duals)
    if upper - lower > tol:
        # re-solve the dual from the best candidate, scaled into both balls
        f0 = max(duals, key=lambda f: _dual_lower(c, v, f))
        scale = max(dual_norm(c.n0, f0), dual_norm(c.n1, f0))
        if scale > 0:
            lower = max(lower, _dual_lower(c, v, _sum_norm_dual(c, v, f0 / scale)))
    lower = min(lower, upper)
    kind = EXACT if upper - lower <= tol else UPPER
    return NormEstimate(upper, kind, (v0, v1), lower=lower,
                        details={"gap": upper - lower})


def reference_weights(c: Couple, theta: float) -> np.ndarray:
    return c.n0.w ** (1.0 - theta) * c.n1.w ** theta


def complex_reference_norm(c: Couple, theta: float, v) -> float:
    """Closed-form complex interpolation norm for an equal-p weighted couple.

    For ``l^p(w0)`` and ``l^p(w1)`` this is ``l^p`` with weight
    ``w0^(1-theta) * w1^theta``.
    """
    if not c.equal_p:
        raise UnsupportedError("reference norm needs both spaces to share the exponent p")
    if not 0.0 < theta < 1.0:
        raise DomainError(f"theta must lie in (0, 1), got {theta}")
    v = as_vector(v, c.dim)
    return float(np.linalg.norm(reference_weights(c, theta) * v, ord=c.n0.p))
