"""Exact maximisation of ``||sum_k eps_k v_k||_p`` over sign vectors.

The compiled extension is used when it was built; setting
``PMLAB_PURE_PYTHON=1`` before import forces the numpy fallback.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

if os.environ.get("PMLAB_PURE_PYTHON", "") not in ("", "0"):
    from . import _fallback as _impl
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _fallback as _impl
        BACKEND = "python"

# Compiled projected-subgradient loop (None with the numpy backend).
descend = getattr(_impl, "descend", None)
# The compiled loop enumerates all sign patterns each step, or sweeps the
# circle when the vectors are planar; in higher dimension with more rows than
# this the numpy zonotope search per step is cheaper.
DESCEND_MAX_ROWS = 11

# Chunks have a fixed size so that float accumulation (and therefore tie
# resolution) does not depend on the number of worker threads.
CHUNK_BITS = 12
TIE_RTOL = 1e-12


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("PMLAB_THREADS", "1")))
    except ValueError:
        return 1


def pattern_signs(index: int, m: int) -> np.ndarray:
    """Decode pattern ``index`` into an array of ``m`` signs."""
    bits = (index >> np.arange(m - 1, -1, -1)) & 1
    signs = np.where(bits == 1, 1.0, -1.0)
    signs[0] = -1.0
    return signs


def signed_norm(rows: np.ndarray, signs: np.ndarray, p: float) -> float:
    s = signs @ rows
    return float(np.linalg.norm(s, ord=p)) if s.size else 0.0


def vertex_max(rows, p, threads=None, impl=None):
    """Return ``(value, signs)`` maximising the p-norm of a signed row sum.

    ``rows`` are already scaled by the norm weights. The reported sign
    vector is the lexicographically smallest maximiser (-1 < +1), and the
    value is its direct re-evaluation. Rows of zeros should be removed by
    the caller; they only inflate the enumeration.
    """
    impl = impl or _impl
    rows = np.ascontiguousarray(rows, dtype=np.float64)
    m = rows.shape[0]
    if m == 0:
        return 0.0, np.zeros(0)
    total = 1 << (m - 1)
    size = 1 << CHUNK_BITS
    if total <= size:
        best = impl.sign_max(rows, p, 0, total)
        idx = impl.sign_first(rows, p, 0, total, best - TIE_RTOL * max(best, 1e-300))
        signs = pattern_signs(idx, m)
        return signed_norm(rows, signs, p), signs
    bounds = [(lo, min(total, lo + size)) for lo in range(0, total, size)]
    threads = threads or default_threads()

    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            maxima = list(pool.map(lambda b: impl.sign_max(rows, p, b[0], b[1]), bounds))
    else:
        maxima = [impl.sign_max(rows, p, lo, hi) for lo, hi in bounds]

    best = max(maxima)
    threshold = best - TIE_RTOL * max(best, 1e-300)
    for (lo, hi), chunk_max in zip(bounds, maxima):
        if chunk_max >= threshold:
            idx = impl.sign_first(rows, p, lo, hi, threshold)
            if idx >= 0:
                break
    signs = pattern_signs(idx, m)
    return signed_norm(rows, signs, p), signs


# Above this many free rows at an arrangement vertex the candidate set is no
# longer small and zonotope_max falls back to full enumeration.
_FREE_CAP = 10


def _arrangement_signs(C: np.ndarray) -> np.ndarray | None:
    """Sign vectors of all cells of the central arrangement ``{u : C u = 0}``.

    ``C`` has full column rank ``r <= 3``. The result is a superset of the
    zonotope vertex patterns; ``None`` means the candidate set would be too
    large (many rows through one arrangement vertex).
    """
    m, r = C.shape
    if r == 1:
        return np.where(C[:, 0] >= 0, 1.0, -1.0)[None, :]
    if r == 2:
        normal = np.arctan2(C[:, 1], C[:, 0]) + 0.5 * np.pi
        crit = np.sort(np.concatenate([normal, normal + np.pi]) % (2 * np.pi))
        mids = 0.5 * (crit + np.roll(crit, -1))
        mids[-1] += np.pi  # arc wrapping through 2 pi
        U = np.stack([np.cos(mids), np.sin(mids)])
        D = C @ U
        return np.where(D >= 0, 1.0, -1.0).T
    scale = np.linalg.norm(C, axis=1)
    K, L = np.triu_indices(m, 1)
    X = np.cross(C[K], C[L])
    nx = np.linalg.norm(X, axis=1)
    keep = nx > 1e-12 * scale[K] * scale[L]
    K, L, X, nx = K[keep], L[keep], X[keep], nx[keep]
    if K.size == 0:
        return None
    D = X @ C.T
    near = np.abs(D) <= 1e-9 * scale[None, :] * nx[:, None]
    base = np.where(D >= 0, 1.0, -1.0)
    generic = near.sum(axis=1) == 2  # only rows k and l pass through the vertex
    out = []
    for a in (-1.0, 1.0):
        for b in (-1.0, 1.0):
            block = base[generic].copy()
            idx = np.arange(block.shape[0])
            block[idx, K[generic]] = a
            block[idx, L[generic]] = b
            out.append(block)
    for i in np.flatnonzero(~generic):
        free = np.flatnonzero(near[i])
        if free.size > _FREE_CAP:
            return None
        combos = np.array(list(itertools.product((-1.0, 1.0), repeat=free.size)))
        block = np.repeat(base[i][None, :], len(combos), axis=0)
        block[:, free] = combos
        out.append(block)
    E = np.concatenate(out)
    return np.concatenate([E, -E])


def zonotope_max(rows, p):
    """Value and a maximising sign vector, via the zonotope's vertices.

    Faster than ``vertex_max`` for many rows in low dimension, but it does
    not apply the lexicographic tie-break, so it is meant for iterative
    solvers whose results are re-evaluated with ``vertex_max``.
    """
    rows = np.ascontiguousarray(rows, dtype=np.float64)
    m, d = rows.shape
    if m <= 10 or d > 3:
        return vertex_max(rows, p)
    # sign structure depends only on the row configuration within its span
    _, sv, vt = np.linalg.svd(rows, full_matrices=False)
    rank = int(np.sum(sv > 1e-12 * sv[0])) if sv.size and sv[0] > 0 else 0
    if rank == 0:
        return 0.0, -np.ones(m)
    E = _arrangement_signs(rows @ vt[:rank].T)
    if E is None:
        return vertex_max(rows, p)
    vals = np.linalg.norm(E @ rows, ord=p, axis=1) if not math.isinf(p) else np.max(
        np.abs(E @ rows), axis=1)
    i = int(np.argmax(vals))
    signs = E[i] if E[i, 0] < 0 else -E[i]
    return signed_norm(rows, signs, p), signs
