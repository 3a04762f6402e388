"""Projected subgradient search for cheap representations.

Both plus-minus norms minimise a J-type norm

    F(X) = max_j sup_eps || sum_k eps_k coef[j, k] X_k ||_{A_j}

over row arrays ``X`` subject to ``sum_k length_k X_k = a``. The
constraint is eliminated by solving for one reference row, and the
returned value is always an exact evaluation at the returned ``X``, so
it is a valid upper bound however the descent went.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .banach import Couple, norm_subgradient
from .errors import DomainError, EnumerationCapError
from .uc import ENUMERATION_CAP, signed_sup


@dataclass(frozen=True)
class SolverCfg:
    window: int = 4
    iters: int = 2000
    step0: float = 0.5
    restarts: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.window < 0 or self.iters < 0 or self.restarts < 1 or self.step0 <= 0:
            raise DomainError(f"invalid solver configuration {self}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SolverCfg":
        known = {k: d[k] for k in ("window", "iters", "step0", "restarts", "seed") if k in d}
        try:
            return cls(**{k: (float(v) if k == "step0" else int(v)) for k, v in known.items()})
        except (TypeError, ValueError) as exc:
            raise DomainError(f"malformed SolverCfg: {d!r}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def j_sup(c: Couple, coefs: np.ndarray, X: np.ndarray, subset=None, *,
          cap: int = ENUMERATION_CAP, threads: int | None = None):
    """Evaluate ``F(X)``; returns ``(value, j, rows_used, signs)``.

    Ties between ``j = 0`` and ``j = 1`` resolve to ``j = 0``.
    """
    nz = np.flatnonzero(np.any(X != 0.0, axis=1))
    if subset is not None:
        nz = np.array([k for k in nz if k in subset], dtype=np.int64)
    best = (0.0, 0, nz, -np.ones(len(nz)))
    if len(nz) == 0:
        return best
    for j in (0, 1):
        rows = coefs[j, nz, None] * X[nz]
        val, signs, _ = signed_sup(c.spec(j), rows, cap=cap, threads=threads)
        if j == 0 or val > best[0]:
            best = (val, j, nz, signs)
    return best


def _fast_sup(c: Couple, coefs, X, cap):
    # any maximiser gives a subgradient, so skip the lexicographic tie-break
    nz = np.flatnonzero(np.any(X != 0.0, axis=1))
    if len(nz) > cap:
        raise EnumerationCapError(f"support of size {len(nz)} exceeds enumeration cap {cap}")
    best = (0.0, 0, nz, -np.ones(len(nz)))
    for j in (0, 1):
        if len(nz) == 0:
            break
        spec = c.spec(j)
        val, signs = kernels.zonotope_max(coefs[j, nz, None] * X[nz] * spec.w, spec.p)
        if j == 0 or val > best[0]:
            best = (val, j, nz, signs)
    return best


def _subgradient(c: Couple, coefs, X, cap=ENUMERATION_CAP):
    val, j, nz, signs = _fast_sup(c, coefs, X, cap)
    G = np.zeros_like(X)
    if len(nz) == 0:
        return val, G
    y = (signs * coefs[j, nz]) @ X[nz]
    g = norm_subgradient(c.spec(j), y)
    G[nz] = (signs * coefs[j, nz])[:, None] * g[None, :]
    return val, G


def _descend(c, coefs, lengths, ref, a, X0, iters, step0):
    X = X0.copy()
    free = np.ones(len(lengths), dtype=bool)
    free[ref] = False
    ratio = lengths[free] / lengths[ref]

    def fix(X):
        X[ref] = (a - lengths[free] @ X[free]) / lengths[ref]
        return X

    X = fix(X)
    best_val, _ = _subgradient(c, coefs, X)
    best_X = X.copy()
    scale = max(best_val, 1e-300)
    for t in range(1, iters + 1):
        val, G = _subgradient(c, coefs, X)
        if val < best_val:
            best_val, best_X = val, X.copy()
        grad = G[free] - ratio[:, None] * G[ref][None, :]
        gnorm = np.linalg.norm(grad)
        if gnorm == 0.0:
            break
        X[free] -= (step0 * scale / np.sqrt(t)) * grad / gnorm
        X = fix(X)
    val, _ = _subgradient(c, coefs, X)
    if val < best_val:
        best_val, best_X = val, X.copy()
    return best_val, best_X


def default_starts(lengths: np.ndarray, positions: np.ndarray, ref: int, a: np.ndarray,
                   restarts: int, seed: int) -> list[np.ndarray]:
    """Single-term start, geometric splittings, then seeded random perturbations."""
    m = len(lengths)
    single = np.zeros((m, len(a)))
    single[ref] = a / lengths[ref]
    starts = [single]
    for decay in (1.0, 0.5):
        w = np.exp(-decay * np.abs(positions))
        starts.append(np.outer(w / (w @ lengths), a))
    rng = np.random.default_rng(seed)
    scale = np.abs(a).max() / max(lengths.sum(), 1e-300)
    while len(starts) < restarts:
        starts.append(starts[len(starts) % 3] + scale * rng.standard_normal((m, len(a))))
    return starts[:restarts]


def minimize_representation(c: Couple, coefs: np.ndarray, lengths: np.ndarray, ref: int,
                            a: np.ndarray, starts: list[np.ndarray], iters: int,
                            step0: float, threads: int | None = None):
    """Run one descent per start and return ``(value, X, start_index)`` of the best."""
    lengths = np.asarray(lengths, dtype=np.float64)

    coefs = np.ascontiguousarray(coefs, dtype=np.float64)
    compiled = kernels.descend is not None and (
        len(lengths) <= kernels.DESCEND_MAX_ROWS or c.dim == 2)
    w = np.ascontiguousarray(np.stack([c.n0.w, c.n1.w]))
    a = np.ascontiguousarray(a, dtype=np.float64)

    def run(X0):
        if compiled:
            return kernels.descend(coefs, lengths, ref, a, np.ascontiguousarray(X0, dtype=np.float64),
                                   iters, step0, w, c.n0.p, c.n1.p)
        return _descend(c, coefs, lengths, ref, a, X0, iters, step0)

    if threads and threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(X0) for X0 in starts]
    best = min(range(len(results)), key=lambda i: (results[i][0], i))
    return results[best][0], results[best][1], best
