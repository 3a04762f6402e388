"""Finitely supported two-sided sequences and unconditional-series norms.

For real scalars ``lambda -> ||sum_n lambda_n a_n||`` is convex on the box
``[-1, 1]^support``, so its supremum is attained at a sign vector and the
norm is computed exactly by vertex enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from . import kernels
from .banach import EXACT, LOWER, NormEstimate, NormSpec, as_vector
from .errors import DimensionError, DomainError, EnumerationCapError

ENUMERATION_CAP = 22


@dataclass(frozen=True, eq=False)
class FiniteSeq:
    """A sequence ``{a_n}`` with ``a_n = 0`` whenever ``|n| > window``.

    ``terms`` maps indices to vectors; absent indices are zero.
    """

    window: int
    dim: int
    terms: Mapping[int, np.ndarray]

    def __post_init__(self):
        if int(self.window) != self.window or self.window < 0:
            raise DomainError(f"window must be a non-negative integer, got {self.window}")
        clean = {}
        for n, v in self.terms.items():
            n = int(n)
            if abs(n) > self.window:
                raise DomainError(f"index {n} outside window {self.window}")
            arr = as_vector(v, self.dim).copy()
            arr.flags.writeable = False
            clean[n] = arr
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    @classmethod
    def zeros(cls, window: int, dim: int) -> "FiniteSeq":
        return cls(window, dim, {})

    @classmethod
    def from_array(cls, window: int, arr) -> "FiniteSeq":
        """Build from a ``(2*window+1, dim)`` array whose row ``k`` is index ``k - window``."""
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != 2 * window + 1:
            raise DimensionError(f"expected {2 * window + 1} rows, got shape {arr.shape}")
        return cls(window, arr.shape[1], {k - window: arr[k] for k in range(arr.shape[0])})

    def to_array(self) -> np.ndarray:
        out = np.zeros((2 * self.window + 1, self.dim))
        for n, v in self.terms.items():
            out[n + self.window] = v
        return out

    def __getitem__(self, n: int) -> np.ndarray:
        v = self.terms.get(int(n))
        return np.zeros(self.dim) if v is None else v

    def support(self) -> list[int]:
        """Indices carrying a nonzero vector, in increasing order."""
        return [n for n, v in self.terms.items() if np.any(v)]

    def total(self) -> np.ndarray:
        out = np.zeros(self.dim)
        for v in self.terms.values():
            out = out + v
        return out

    def padded(self, window: int) -> "FiniteSeq":
        if window < self.window:
            raise DomainError("cannot shrink the window by padding")
        return FiniteSeq(window, self.dim, self.terms)

    def restricted(self, subset: Iterable[int]) -> "FiniteSeq":
        keep = {int(n) for n in subset}
        return FiniteSeq(self.window, self.dim, {n: v for n, v in self.terms.items() if n in keep})

    def scaled(self, c: float) -> "FiniteSeq":
        return FiniteSeq(self.window, self.dim, {n: c * v for n, v in self.terms.items()})

    def _combine(self, other: "FiniteSeq", sign: float) -> "FiniteSeq":
        if other.dim != self.dim:
            raise DimensionError("sequence dimensions differ")
        window = max(self.window, other.window)
        idx = set(self.terms) | set(other.terms)
        return FiniteSeq(window, self.dim, {n: self[n] + sign * other[n] for n in idx})

    def __add__(self, other: "FiniteSeq") -> "FiniteSeq":
        return self._combine(other, 1.0)

    def __sub__(self, other: "FiniteSeq") -> "FiniteSeq":
        return self._combine(other, -1.0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteSeq) or other.dim != self.dim:
            return NotImplemented
        idx = set(self.terms) | set(other.terms)
        return all(np.array_equal(self[n], other[n]) for n in idx)

    def to_dict(self) -> dict:
        return {"window": self.window,
                "terms": {str(n): [float(x) for x in v] for n, v in self.terms.items()}}

    @classmethod
    def from_dict(cls, d: dict, dim: int | None = None) -> "FiniteSeq":
        try:
            terms = {int(k): np.asarray(v, dtype=np.float64) for k, v in d["terms"].items()}
            window = int(d.get("window", max((abs(n) for n in terms), default=0)))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise DomainError(f"malformed FiniteSeq: {d!r}") from exc
        if dim is None:
            if not terms:
                raise DomainError("cannot infer dimension of an empty sequence")
            dim = len(next(iter(terms.values())))
        return cls(window, dim, terms)


@dataclass(frozen=True)
class SignPattern:
    """Signs (+1 / -1) assigned to the support indices of a sequence."""

    assignment: Mapping[int, int]

    def __post_init__(self):
        object.__setattr__(self, "assignment",
                           {int(k): int(v) for k, v in sorted(self.assignment.items())})
        if any(v not in (-1, 1) for v in self.assignment.values()):
            raise DomainError("sign pattern entries must be +1 or -1")

    def to_dict(self) -> dict:
        return {str(k): v for k, v in self.assignment.items()}


def _coordinate_ascent(rows: np.ndarray, p: float, rng: np.random.Generator,
                       restarts: int = 64):
    m = rows.shape[0]
    best_val, best = -1.0, None
    for _ in range(restarts):
        signs = rng.choice([-1.0, 1.0], size=m)
        s = signs @ rows
        val = float(np.linalg.norm(s, ord=p))
        improved = True
        while improved:
            improved = False
            for k in range(m):
                t = s - 2.0 * signs[k] * rows[k]
                tv = float(np.linalg.norm(t, ord=p))
                if tv > val * (1 + 1e-15):
                    signs[k] = -signs[k]
                    s, val, improved = t, tv, True
        if val > best_val:
            best_val, best = val, signs.copy()
    if best[0] > 0:  # canonical representative, first sign -1
        best = -best
    return kernels.signed_norm(rows, best, p), best


def signed_sup(n: NormSpec, rows, *, cap: int = ENUMERATION_CAP,
               allow_sampling: bool = False, threads: int | None = None, seed: int = 0):
    """Maximise ``||sum_k eps_k rows_k||_n`` over sign vectors.

    Returns ``(value, signs, exact)``; rows must be unweighted vectors.
    """
    rows = np.asarray(rows, dtype=np.float64).reshape(-1, n.dim)
    weighted = rows * n.w[None, :]
    if rows.shape[0] > cap:
        if not allow_sampling:
            raise EnumerationCapError(
                f"support of size {rows.shape[0]} exceeds enumeration cap {cap}")
        val, signs = _coordinate_ascent(weighted, n.p, np.random.default_rng(seed))
        return val, signs, False
    val, signs = kernels.vertex_max(weighted, n.p, threads=threads)
    return val, signs, True


def uc_norm(n: NormSpec, s: FiniteSeq, subset: Iterable[int] | None = None, *,
            cap: int = ENUMERATION_CAP, allow_sampling: bool = False,
            threads: int | None = None, seed: int = 0) -> NormEstimate:
    """``sup ||sum_n lambda_n a_n||`` over ``|lambda_n| <= 1``, optionally restricted to ``subset``."""
    if s.dim != n.dim:
        raise DimensionError(f"sequence dim {s.dim} does not match norm dim {n.dim}")
    idx = s.support()
    if subset is not None:
        subset = {int(k) for k in subset}
        if any(abs(k) > s.window for k in subset):
            raise DomainError("subset must lie inside the sequence window")
        idx = [k for k in idx if k in subset]
    if not idx:
        return NormEstimate(0.0, EXACT, SignPattern({}))
    rows = np.stack([s[k] for k in idx])
    val, signs, exact = signed_sup(n, rows, cap=cap, allow_sampling=allow_sampling,
                                   threads=threads, seed=seed)
    pattern = SignPattern({k: int(e) for k, e in zip(idx, signs)})
    return NormEstimate(val, EXACT if exact else LOWER, pattern)


def tail_functional(n: NormSpec, s: FiniteSeq, **kw) -> np.ndarray:
    """``(Ta)_N`` for ``N = 0 .. window + 1``: the UC norm of the tail ``|n| >= N``."""
    out = np.zeros(s.window + 2)
    support = s.support()
    for N in range(s.window + 2):
        tail = [k for k in support if abs(k) >= N]
        out[N] = uc_norm(n, s, tail, **kw).value if tail else 0.0
    return out
