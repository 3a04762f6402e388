# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sign-vertex enumeration.

Pattern ``i`` in ``[0, 2**(m-1))`` fixes the first row's sign to -1 and
gives row ``k >= 1`` the sign +1 when bit ``m-1-k`` of ``i`` is set.
Numeric order of ``i`` is lexicographic order of the sign tuple with
-1 < +1.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, pow, atan2, fmod, INFINITY, M_PI
from libc.stdlib cimport malloc, free, qsort

cnp.import_array()


cdef inline double _pnorm(const double* s, Py_ssize_t d, double p) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0, x
    if p == INFINITY:
        for i in range(d):
            x = fabs(s[i])
            if x > acc:
                acc = x
        return acc
    if p == 1.0:
        for i in range(d):
            acc += fabs(s[i])
        return acc
    if p == 2.0:
        for i in range(d):
            acc += s[i] * s[i]
        return sqrt(acc)
    for i in range(d):
        acc += pow(fabs(s[i]), p)
    return pow(acc, 1.0 / p)


cdef inline void _start(const double[:, ::1] rows, long long lo, double* s) noexcept nogil:
    cdef Py_ssize_t m = rows.shape[0], d = rows.shape[1], k, i
    cdef double sign
    for i in range(d):
        s[i] = -rows[0, i]
    for k in range(1, m):
        sign = 1.0 if (lo >> (m - 1 - k)) & 1 else -1.0
        for i in range(d):
            s[i] += sign * rows[k, i]


cdef inline void _step(const double[:, ::1] rows, long long idx, double* s) noexcept nogil:
    # advance pattern idx -> idx + 1: trailing ones clear, next zero sets
    cdef Py_ssize_t m = rows.shape[0], d = rows.shape[1], i, k
    cdef int b = 0
    while (idx >> b) & 1:
        k = m - 1 - b
        for i in range(d):
            s[i] -= 2.0 * rows[k, i]
        b += 1
    k = m - 1 - b
    for i in range(d):
        s[i] += 2.0 * rows[k, i]


def sign_max(const double[:, ::1] rows, double p, long long lo, long long hi):
    """Largest p-norm of the signed row sum over patterns ``lo <= i < hi``."""
    cdef Py_ssize_t d = rows.shape[1]
    cdef double best = -1.0, val
    cdef long long i
    cdef double* s = <double*> malloc(max(d, 1) * sizeof(double))
    if s == NULL:
        raise MemoryError()
    try:
        with nogil:
            _start(rows, lo, s)
            i = lo
            while True:
                val = _pnorm(s, d, p)
                if val > best:
                    best = val
                if i + 1 >= hi:
                    break
                _step(rows, i, s)
                i += 1
    finally:
        free(s)
    return best


def sign_first(const double[:, ::1] rows, double p, long long lo, long long hi,
               double threshold):
    """First pattern in ``[lo, hi)`` whose norm reaches ``threshold``, else -1."""
    cdef Py_ssize_t d = rows.shape[1]
    cdef long long i, found = -1
    cdef double* s = <double*> malloc(max(d, 1) * sizeof(double))
    if s == NULL:
        raise MemoryError()
    try:
        with nogil:
            _start(rows, lo, s)
            i = lo
            while True:
                if _pnorm(s, d, p) >= threshold:
                    found = i
                    break
                if i + 1 >= hi:
                    break
                _step(rows, i, s)
                i += 1
    finally:
        free(s)
    return found


cdef inline double _sgn(double x) noexcept nogil:
    return 1.0 if x > 0 else (-1.0 if x < 0 else 0.0)

# Rows above which the compiled subgradient sweeps the circle (d = 2)
# instead of enumerating every sign pattern.
cdef enum:
    SWEEP_ROWS = 11


cdef struct _Crit:
    double angle
    Py_ssize_t row


cdef int _crit_cmp(const void* x, const void* y) noexcept nogil:
    cdef double a = (<const _Crit*> x).angle, b = (<const _Crit*> y).angle
    return -1 if a < b else (1 if a > b else 0)


cdef double _sweep2(const double* rows, Py_ssize_t mz, double p, double* eps,
                    _Crit* crit) noexcept nogil:
    """Max of ``||sum eps_k rows_k||`` in the plane over zonotope vertex signs.

    The sign of ``<rows_k, u>`` flips when ``u`` crosses one of two angles per
    row; walking once around the circle visits every vertex pattern.
    """
    cdef Py_ssize_t q, n = 2 * mz, i, best_i = -1
    cdef double a0, phi, val, best, s0, s1, sg
    for q in range(mz):
        a0 = atan2(rows[2 * q + 1], rows[2 * q])
        crit[2 * q].angle = fmod(a0 + 0.5 * M_PI + 4 * M_PI, 2 * M_PI)
        crit[2 * q].row = q
        crit[2 * q + 1].angle = fmod(a0 + 1.5 * M_PI + 4 * M_PI, 2 * M_PI)
        crit[2 * q + 1].row = q
    qsort(crit, n, sizeof(_Crit), _crit_cmp)
    # start just before the first critical angle (inside the wrapping arc)
    phi = 0.5 * (crit[n - 1].angle - 2 * M_PI + crit[0].angle)
    s0 = 0.0
    s1 = 0.0
    for q in range(mz):
        sg = rows[2 * q] * _cos(phi) + rows[2 * q + 1] * _sin(phi)
        eps[q] = 1.0 if sg >= 0 else -1.0
        s0 += eps[q] * rows[2 * q]
        s1 += eps[q] * rows[2 * q + 1]
    best = _norm2(s0, s1, p)
    for i in range(n):
        q = crit[i].row
        s0 -= 2.0 * eps[q] * rows[2 * q]
        s1 -= 2.0 * eps[q] * rows[2 * q + 1]
        eps[q] = -eps[q]
        val = _norm2(s0, s1, p)
        if val > best:
            best, best_i = val, i
    # replay the flips to recover the maximising pattern (eps is back at the start)
    for i in range(best_i + 1):
        q = crit[i].row
        eps[q] = -eps[q]
    return best


cdef inline double _norm2(double x, double y, double p) noexcept nogil:
    cdef double s[2]
    s[0] = x
    s[1] = y
    return _pnorm(s, 2, p)


cdef extern from "math.h" nogil:
    double _cos "cos"(double)
    double _sin "sin"(double)


cdef double _j_subgradient(const double[:, ::1] coefs, const double[:, ::1] X,
                           const double[:, ::1] w, const double* p, double* rows,
                           Py_ssize_t* nz, double* s, double* bests, double* G,
                           _Crit* crit) noexcept nogil:
    """Value of ``max_j sup_eps ||sum eps_k coef[j,k] X_k||_j`` and a subgradient in ``G``.

    Ties go to the first pattern in counting order and to ``j = 0``; zero
    rows get a zero subgradient block.
    """
    cdef Py_ssize_t m = X.shape[0], d = X.shape[1], k, i, b, q, mz = 0
    cdef long long idx, total, best_idx
    cdef double val, best, best_j = -1.0
    cdef int j, jbest = 0
    cdef double* z = s + d
    for k in range(m * d):
        G[k] = 0.0
    for k in range(m):
        for i in range(d):
            if X[k, i] != 0.0:
                nz[mz] = k
                mz += 1
                break
    if mz == 0:
        return 0.0
    total = (<long long> 1) << (mz - 1)
    if d == 2 and mz > SWEEP_ROWS:
        for j in range(2):
            for q in range(mz):
                k = nz[q]
                for i in range(d):
                    rows[q * d + i] = coefs[j, k] * w[j, i] * X[k, i]
            val = _sweep2(rows, mz, p[j], z, crit)
            if j == 0 or val > best_j:
                best_j, jbest = val, j
                for q in range(mz):
                    bests[1 + q] = z[q]
        return _finish(coefs, X, w, p, nz, mz, jbest, s, bests, G, best_j)
    for j in range(2):
        for q in range(mz):
            k = nz[q]
            for i in range(d):
                rows[q * d + i] = coefs[j, k] * w[j, i] * X[k, i]
        # pattern 0: every sign -1
        for i in range(d):
            s[i] = 0.0
            for q in range(mz):
                s[i] -= rows[q * d + i]
        best, best_idx, idx = _pnorm(s, d, p[j]), 0, 0
        while idx + 1 < total:
            b = 0
            while (idx >> b) & 1:
                for i in range(d):
                    s[i] -= 2.0 * rows[(mz - 1 - b) * d + i]
                b += 1
            for i in range(d):
                s[i] += 2.0 * rows[(mz - 1 - b) * d + i]
            idx += 1
            val = _pnorm(s, d, p[j])
            if val > best:
                best, best_idx = val, idx
        if j == 0 or best > best_j:
            best_j, jbest = best, j
            bests[0] = <double> best_idx
    best_idx = <long long> bests[0]
    for q in range(mz):
        bests[1 + q] = -1.0 if q == 0 else (1.0 if (best_idx >> (mz - 1 - q)) & 1 else -1.0)
    return _finish(coefs, X, w, p, nz, mz, jbest, s, bests, G, best_j)


cdef double _finish(const double[:, ::1] coefs, const double[:, ::1] X,
                    const double[:, ::1] w, const double* p, Py_ssize_t* nz, Py_ssize_t mz,
                    int jbest, double* s, double* bests, double* G,
                    double best_j) noexcept nogil:
    # rebuild the maximising sum for j = jbest (signs in bests[1:]) and its norming functional
    cdef Py_ssize_t d = X.shape[1], k, i, b, q
    cdef double nrm
    cdef double* z = s + d
    for i in range(d):
        z[i] = 0.0
    for q in range(mz):
        k = nz[q]
        for i in range(d):
            z[i] += bests[1 + q] * coefs[jbest, k] * w[jbest, i] * X[k, i]
    nrm = _pnorm(z, d, p[jbest])
    # s <- h with <h, z> = ||z||, then scale by the weights
    for i in range(d):
        s[i] = 0.0
    if nrm > 0:
        if p[jbest] == INFINITY:
            b = 0
            for i in range(d):
                if fabs(z[i]) > fabs(z[b]):
                    b = i
            s[b] = _sgn(z[b])
        elif p[jbest] == 1.0:
            for i in range(d):
                s[i] = _sgn(z[i])
        else:
            for i in range(d):
                s[i] = _sgn(z[i]) * pow(fabs(z[i]) / nrm, p[jbest] - 1.0)
    for q in range(mz):
        k = nz[q]
        for i in range(d):
            G[k * d + i] = bests[1 + q] * coefs[jbest, k] * w[jbest, i] * s[i]
    return best_j


def descend(const double[:, ::1] coefs, const double[::1] lengths, Py_ssize_t ref,
            const double[::1] a, const double[:, ::1] X0, long iters, double step0,
            const double[:, ::1] w, double p0, double p1):
    """Compiled twin of the Python projected-subgradient loop; returns ``(value, X)``."""
    cdef Py_ssize_t m = X0.shape[0], d = X0.shape[1], k, i
    cdef long t
    cdef double p[2]
    cdef double val, best_val, scale, gnorm, step, acc
    p[0] = p0
    p[1] = p1
    X_arr = np.array(X0, dtype=np.float64, copy=True)
    best_arr = np.empty_like(X_arr)
    cdef double[:, ::1] X = X_arr
    cdef double[:, ::1] best_X = best_arr
    cdef double* rows = <double*> malloc(m * d * sizeof(double))
    cdef double* G = <double*> malloc(m * d * sizeof(double))
    cdef double* grad = <double*> malloc(m * d * sizeof(double))
    cdef double* s = <double*> malloc((d + max(d, m)) * sizeof(double))
    cdef _Crit* crit = <_Crit*> malloc(2 * m * sizeof(_Crit))
    cdef double* bests = <double*> malloc((m + 1) * sizeof(double))
    cdef Py_ssize_t* nz = <Py_ssize_t*> malloc(m * sizeof(Py_ssize_t))
    if not (rows and G and grad and s and bests and nz and crit):
        free(rows); free(G); free(grad); free(s); free(bests); free(nz); free(crit)
        raise MemoryError()
    try:
        with nogil:
            _fix(X, lengths, ref, a)
            best_val = _j_subgradient(coefs, X, w, p, rows, nz, s, bests, G, crit)
            best_X[:, :] = X
            scale = best_val if best_val > 1e-300 else 1e-300
            for t in range(1, iters + 1):
                val = _j_subgradient(coefs, X, w, p, rows, nz, s, bests, G, crit)
                if val < best_val:
                    best_val = val
                    best_X[:, :] = X
                gnorm = 0.0
                for k in range(m):
                    for i in range(d):
                        if k == ref:
                            grad[k * d + i] = 0.0
                        else:
                            grad[k * d + i] = (G[k * d + i]
                                               - lengths[k] / lengths[ref] * G[ref * d + i])
                            gnorm += grad[k * d + i] * grad[k * d + i]
                if gnorm == 0.0:
                    break
                gnorm = sqrt(gnorm)
                step = step0 * scale / sqrt(<double> t)
                for k in range(m):
                    if k != ref:
                        for i in range(d):
                            X[k, i] -= step * grad[k * d + i] / gnorm
                _fix(X, lengths, ref, a)
            val = _j_subgradient(coefs, X, w, p, rows, nz, s, bests, G, crit)
            if val < best_val:
                best_val = val
                best_X[:, :] = X
    finally:
        free(rows); free(G); free(grad); free(s); free(bests); free(nz); free(crit)
    return best_val, best_arr


cdef void _fix(double[:, ::1] X, const double[::1] lengths, Py_ssize_t ref,
               const double[::1] a) noexcept nogil:
    cdef Py_ssize_t m = X.shape[0], d = X.shape[1], k, i
    cdef double acc
    for i in range(d):
        acc = a[i]
        for k in range(m):
            if k != ref:
                acc -= lengths[k] * X[k, i]
        X[ref, i] = acc / lengths[ref]
