"""Pure numpy implementation of the sign-vertex kernels.

Same pattern encoding and contract as the compiled ``_kernels`` module.
"""

import numpy as np

_BLOCK = 1 << 14


def _signed_norms(rows, p, lo, hi):
    m = rows.shape[0]
    idx = np.arange(lo, hi, dtype=np.int64)
    shifts = np.arange(m - 2, -1, -1, dtype=np.int64)  # row k>=1 uses bit m-1-k
    bits = (idx[:, None] >> shifts[None, :]) & 1
    sums = -rows[0] + (2.0 * bits - 1.0) @ rows[1:]
    if np.isinf(p):
        return np.max(np.abs(sums), axis=1)
    if p == 1.0:
        return np.sum(np.abs(sums), axis=1)
    if p == 2.0:
        return np.sqrt(np.sum(sums * sums, axis=1))
    return np.sum(np.abs(sums) ** p, axis=1) ** (1.0 / p)


def sign_max(rows, p, lo, hi):
    rows = np.ascontiguousarray(rows, dtype=np.float64)
    best = -1.0
    for start in range(lo, hi, _BLOCK):
        vals = _signed_norms(rows, p, start, min(hi, start + _BLOCK))
        best = max(best, float(vals.max()))
    return best


def sign_first(rows, p, lo, hi, threshold):
    rows = np.ascontiguousarray(rows, dtype=np.float64)
    for start in range(lo, hi, _BLOCK):
        vals = _signed_norms(rows, p, start, min(hi, start + _BLOCK))
        hit = np.flatnonzero(vals >= threshold)
        if hit.size:
            return start + int(hit[0])
    return -1
