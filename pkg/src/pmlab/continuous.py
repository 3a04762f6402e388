"""Step functions, the continuous J seminorm, and <A0, A1>_{theta,(0)}.

On a cell ``[t_{k-1}, t_k)`` the set ``{ int e^{(j-theta)t} phi(t) dt : |phi| <= 1 }``
is exactly the interval ``[-W_jk, W_jk]`` with ``W_jk = int_cell e^{(j-theta)t} dt``.
The supremum over ``phi`` therefore reduces to a sign-vertex maximum with
one sign per cell, which is computed exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .banach import EXACT, UPPER, Couple, NormEstimate, as_vector, norm_eval, sum_norm
from .discrete import check_theta, pm_lower, within
from .errors import BoundViolation, DimensionError, DomainError
from .solver import SolverCfg, default_starts, j_sup, minimize_representation
from .uc import ENUMERATION_CAP, signed_sup


@dataclass(frozen=True, eq=False)
class StepFunction:
    """``u = values[k]`` on ``[breakpoints[k], breakpoints[k+1])``, zero elsewhere."""

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=np.float64).reshape(-1)
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise DimensionError(f"values must be a 2-D array, got shape {vals.shape}")
        m = vals.shape[0]
        if m == 0 and bp.size <= 1:
            pass
        elif bp.size != m + 1:
            raise DimensionError(f"{m} cells need {m + 1} breakpoints, got {bp.size}")
        if not (np.all(np.isfinite(bp)) and np.all(np.isfinite(vals))):
            raise DomainError("breakpoints and values must be finite")
        if np.any(np.diff(bp) <= 0):
            raise DomainError("breakpoints must be strictly increasing")
        bp.flags.writeable = False
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zero(cls, dim: int) -> "StepFunction":
        return cls(np.zeros(0), np.zeros((0, dim)))

    @classmethod
    def indicator(cls, lo: float, hi: float, v) -> "StepFunction":
        return cls([lo, hi], np.asarray(v, dtype=np.float64)[None, :])

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def ncells(self) -> int:
        return self.values.shape[0]

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    def integral(self) -> np.ndarray:
        if self.ncells == 0:
            return np.zeros(self.dim)
        return self.lengths @ self.values

    def split_at(self, points) -> "StepFunction":
        """Same function on a partition refined by the given points."""
        if self.ncells == 0:
            return self
        lo, hi = self.breakpoints[0], self.breakpoints[-1]
        extra = [t for t in np.asarray(points, dtype=np.float64).ravel() if lo < t < hi]
        bp = np.union1d(self.breakpoints, extra)
        owner = np.searchsorted(self.breakpoints, bp[:-1], side="right") - 1
        return StepFunction(bp, self.values[owner])

    def value_at(self, t: float) -> np.ndarray:
        k = np.searchsorted(self.breakpoints, t, side="right") - 1
        if self.ncells == 0 or k < 0 or k >= self.ncells:
            return np.zeros(self.dim)
        return self.values[k]

    def __sub__(self, other: "StepFunction") -> "StepFunction":
        bp = np.union1d(self.breakpoints, other.breakpoints)
        if bp.size < 2:
            return StepFunction.zero(self.dim)
        vals = np.stack([self.value_at(t) - other.value_at(t) for t in bp[:-1]])
        return StepFunction(bp, vals)

    def to_dict(self) -> dict:
        return {"breakpoints": [float(t) for t in self.breakpoints],
                "values": [[float(x) for x in row] for row in self.values]}

    @classmethod
    def from_dict(cls, d: dict, dim: int | None = None) -> "StepFunction":
        try:
            vals = np.asarray(d["values"], dtype=np.float64)
            bp = np.asarray(d["breakpoints"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed StepFunction: {d!r}") from exc
        if vals.size == 0:
            vals = np.zeros((0, dim or 1))
        return cls(bp, vals)


def cell_weights(theta: float, breakpoints) -> np.ndarray:
    """``W[j, k] = int_{t_{k-1}}^{t_k} e^{(j-theta) t} dt`` in closed form."""
    check_theta(theta)
    bp = np.asarray(breakpoints, dtype=np.float64)
    out = np.zeros((2, max(bp.size - 1, 0)))
    for j in (0, 1):
        rate = j - theta
        out[j] = np.exp(rate * bp[:-1]) * np.expm1(rate * np.diff(bp)) / rate
    return out


def j_seminorm_continuous(c: Couple, theta: float, u: StepFunction, cell_subset=None,
                          threads: int | None = None) -> NormEstimate:
    """``max_j sup_phi || int e^{(j-theta)t} phi(t) u(t) dt ||_{A_j}``, exactly.

    ``cell_subset`` (cell indices) restricts the integral to those cells.
    The certificate is the maximising sign per cell.
    """
    if u.dim != c.dim:
        raise DimensionError(f"function dim {u.dim} does not match couple dim {c.dim}")
    if u.ncells == 0:
        check_theta(theta)
        return NormEstimate(0.0, EXACT, {}, details={"j": 0})
    W = cell_weights(theta, u.breakpoints)
    subset = None if cell_subset is None else {int(k) for k in cell_subset}
    val, j, nz, signs = j_sup(c, W, np.asarray(u.values), subset, threads=threads)
    return NormEstimate(val, EXACT, {int(k): int(e) for k, e in zip(nz, signs)},
                        details={"j": j})


def restricted_sup(c: Couple, theta: float, u: StepFunction, j: int, cells,
                   cap: int = ENUMERATION_CAP) -> float:
    """Supremum for a single ``j`` over the given cells only."""
    cells = [k for k in cells if np.any(u.values[k])]
    if not cells:
        return 0.0
    W = cell_weights(theta, u.breakpoints)
    rows = W[j, cells, None] * u.values[cells]
    return signed_sup(c.spec(j), rows, cap=cap)[0]


def tail_supremum(c: Couple, theta: float, u: StepFunction, R: float) -> tuple[float, float]:
    """Per-j supremum of the integral restricted to ``|t| >= R``."""
    if R < 0:
        raise DomainError(f"R must be non-negative, got {R}")
    check_theta(theta)
    if u.ncells == 0:
        return 0.0, 0.0
    v = u.split_at([-R, R])
    bp = v.breakpoints
    cells = [k for k in range(v.ncells) if bp[k + 1] <= -R or bp[k] >= R]
    return tuple(restricted_sup(c, theta, v, j, cells) for j in (0, 1))


@dataclass(frozen=True)
class IntegralCheck:
    total: np.ndarray
    negative: np.ndarray
    positive: np.ndarray
    seminorm: float
    ratios: dict


def integral_full(c: Couple, theta: float, u: StepFunction) -> IntegralCheck:
    """Integrate ``u`` and check the three half-line and sum-space bounds.

    ``||int_{-inf}^0 u||_{A0}``, ``||int_0^inf u||_{A1}`` are each at most
    ``||u||_J`` and ``||int u||_{A0+A1} <= 2 ||u||_J``.
    """
    if u.dim != c.dim:
        raise DimensionError(f"function dim {u.dim} does not match couple dim {c.dim}")
    v = u.split_at([0.0])
    total = v.integral()
    if v.ncells:
        left = v.breakpoints[1:] <= 0.0
        negative = v.lengths[left] @ v.values[left]
        positive = v.lengths[~left] @ v.values[~left]
    else:
        negative = positive = np.zeros(u.dim)
    jn = j_seminorm_continuous(c, theta, u).value
    lhs = {
        "negative_A0": norm_eval(c.n0, negative),
        "positive_A1": norm_eval(c.n1, positive),
        "total_sum": sum_norm(c, total).value,
    }
    limits = {"negative_A0": jn, "positive_A1": jn, "total_sum": 2.0 * jn}
    for key, val in lhs.items():
        if not within(val, limits[key]):
            raise BoundViolation(f"{key}: {val} exceeds {limits[key]}")
    ratios = {k: (val / jn if jn > 0 else 0.0) for k, val in lhs.items()}
    return IntegralCheck(total, negative, positive, jn, ratios)


def grid(support_R: float, cells_per_unit: int) -> np.ndarray:
    """Breakpoints ``k / cells_per_unit`` covering ``[-support_R, support_R]``; 0 is one of them."""
    if not support_R > 0:
        raise DomainError(f"support_R must be positive, got {support_R}")
    if int(cells_per_unit) != cells_per_unit or cells_per_unit < 1:
        raise DomainError(f"cells_per_unit must be a positive integer, got {cells_per_unit}")
    half = math.ceil(support_R * cells_per_unit - 1e-12)
    return np.arange(-half, half + 1, dtype=np.float64) / cells_per_unit


def _embed(u: StepFunction, bp: np.ndarray):
    """Values of ``u`` on the partition ``bp`` when ``bp`` refines u's partition, else None."""
    if u.ncells == 0:
        return np.zeros((len(bp) - 1, u.dim))
    if u.breakpoints[0] < bp[0] or u.breakpoints[-1] > bp[-1]:
        return None
    if not np.all(np.isin(u.breakpoints, bp)):
        return None
    return np.stack([u.value_at(t) for t in bp[:-1]])


def pm_norm_continuous(c: Couple, theta: float, a, support_R: float = 2.0,
                       cells_per_unit: int = 2, solver: SolverCfg | None = None,
                       init: StepFunction | None = None, threads: int | None = None):
    """Certified bracket ``(upper, lower)`` for ``||a||_{<A0,A1>_{theta,(0)}}``.

    The search runs over step functions on ``grid(support_R, cells_per_unit)``
    with ``int u = a``. ``init`` is always kept as a candidate certificate
    and also seeds the descent when the grid refines its partition.
    """
    solver = solver or SolverCfg()
    check_theta(theta)
    a = as_vector(a, c.dim)
    bp = grid(support_R, cells_per_unit)
    lower = pm_lower(c, theta, a)
    if not np.any(a):
        return (NormEstimate(0.0, UPPER, StepFunction.zero(c.dim), details={"gap": 0.0}),
                lower)

    lengths = np.diff(bp)
    mids = 0.5 * (bp[:-1] + bp[1:])
    ref = int(np.searchsorted(bp, 0.0))
    starts = default_starts(lengths, mids, ref, a, solver.restarts, solver.seed)
    if init is not None:
        embedded = _embed(init, bp)
        if embedded is not None:
            starts.append(embedded)
    _, X, start = minimize_representation(c, cell_weights(theta, bp), lengths, ref, a,
                                          starts, solver.iters, solver.step0, threads)
    cert = StepFunction(bp, X)
    value = j_seminorm_continuous(c, theta, cert).value
    if init is not None:
        init_val = j_seminorm_continuous(c, theta, init).value
        if init_val <= value:
            cert, value = init, init_val
    est = NormEstimate(value, UPPER, cert,
                       details={"gap": value - lower.value, "start": start,
                                "residual": float(np.abs(cert.integral() - a).max())})
    return est, lower
