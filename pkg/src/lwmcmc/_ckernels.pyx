# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops.

Every function here has a twin with identical semantics in ``_pykernels``;
``lwmcmc._backend`` picks one at import time.
"""

import numpy as np

from libc.math cimport log, M_PI

# Target codes shared with lwmcmc.targets
cdef enum:
    STD_NORMAL = 0
    INDIRECT_OBS = 1


cdef inline void _grad(int kind, const double[::1] params, const double* x,
                       double* g, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t i
    cdef double z, th, r, s2, gap
    if kind == STD_NORMAL:
        for i in range(d):
            g[i] = -x[i]
    else:
        z = x[0]
        th = x[1]
        s2 = params[1] * params[1]
        r = params[0] - th * z
        gap = z - th
        g[0] = th * r / s2 - gap
        g[1] = z * r / s2 + gap


cdef inline double _logp(int kind, const double[::1] params, const double* x,
                         Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0
    cdef double r, gap, s2
    if kind == STD_NORMAL:
        for i in range(d):
            acc += x[i] * x[i]
        return -0.5 * acc
    s2 = params[1] * params[1]
    r = params[0] - x[1] * x[0]
    gap = x[0] - x[1]
    return -(r * r) / (2.0 * s2) - 0.5 * (gap * gap)


def leapfrog_path(int kind, const double[::1] params, const double[::1] x0,
                  const double[::1] p0, double delta, Py_ssize_t steps,
                  const double[:, ::1] winv):
    """Integrate ``steps`` position-Verlet steps from ``(x0, p0)``.

    Returns positions, momenta (both ``(steps + 1, d)``) and the log density
    at every position; row 0 is the starting point.
    """
    cdef Py_ssize_t d = x0.shape[0]
    cdef Py_ssize_t t, i, k
    cdef double half = 0.5 * delta
    cdef double acc

    pos_arr = np.empty((steps + 1, d), dtype=np.float64)
    mom_arr = np.empty((steps + 1, d), dtype=np.float64)
    logp_arr = np.empty(steps + 1, dtype=np.float64)
    cdef double[:, ::1] pos = pos_arr
    cdef double[:, ::1] mom = mom_arr
    cdef double[::1] logp = logp_arr
    xh_arr = np.empty(d, dtype=np.float64)
    g_arr = np.empty(d, dtype=np.float64)
    cdef double[::1] xh = xh_arr
    cdef double[::1] g = g_arr

    with nogil:
        for i in range(d):
            pos[0, i] = x0[i]
            mom[0, i] = p0[i]
        logp[0] = _logp(kind, params, &pos[0, 0], d)
        for t in range(steps):
            for i in range(d):
                acc = 0.0
                for k in range(d):
                    acc = acc + winv[i, k] * mom[t, k]
                xh[i] = pos[t, i] + half * acc
            _grad(kind, params, &xh[0], &g[0], d)
            for i in range(d):
                mom[t + 1, i] = mom[t, i] + delta * g[i]
            for i in range(d):
                acc = 0.0
                for k in range(d):
                    acc = acc + winv[i, k] * mom[t + 1, k]
                pos[t + 1, i] = xh[i] + half * acc
            logp[t + 1] = _logp(kind, params, &pos[t + 1, 0], d)
    return pos_arr, mom_arr, logp_arr


def pairwise_gauss_logsum(const double[:, ::1] pts, double lam):
    """For each row i: sum over j != i of log N(pts[j] - pts[i]; 0, lam^2 I)."""
    cdef Py_ssize_t m = pts.shape[0]
    cdef Py_ssize_t d = pts.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double sq, diff
    cdef double inv = 1.0 / (2.0 * lam * lam)
    cdef double norm = -0.5 * d * log(2.0 * M_PI * lam * lam)
    out_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for i in range(m):
            for j in range(m):
                if j == i:
                    continue
                sq = 0.0
                for k in range(d):
                    diff = pts[j, k] - pts[i, k]
                    sq = sq + diff * diff
                out[i] = out[i] + (norm - sq * inv)
    return out_arr


def autocovariance(const double[::1] x, Py_ssize_t maxlag):
    """Biased autocovariances gamma_0..gamma_maxlag (divisor len(x))."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t k, t
    cdef double mean = 0.0
    cdef double acc
    out_arr = np.empty(maxlag + 1, dtype=np.float64)
    cdef double[::1] out = out_arr
    centred_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] c = centred_arr
    with nogil:
        for t in range(n):
            mean = mean + x[t]
        mean = mean / n
        for t in range(n):
            c[t] = x[t] - mean
        for k in range(maxlag + 1):
            acc = 0.0
            for t in range(n - k):
                acc = acc + c[t] * c[t + k]
            out[k] = acc / n
    return out_arr


def multinomial_counts(const double[::1] weights, const double[::1] u):
    """Inverse-CDF multinomial: one count per uniform in ``u``.

    A uniform on a CDF boundary goes to the lower index; zero-weight slots
    are never selected.
    """
    cdef Py_ssize_t m = weights.shape[0]
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i, lo, hi, mid
    cum_arr = np.cumsum(np.asarray(weights))
    cum_arr = cum_arr / cum_arr[m - 1]
    cdef double[::1] cum = cum_arr
    counts_arr = np.zeros(m, dtype=np.int64)
    cdef long long[::1] counts = counts_arr
    with nogil:
        for i in range(n):
            lo = 0
            hi = m - 1
            while lo < hi:
                mid = (lo + hi) // 2
                if cum[mid] >= u[i]:
                    hi = mid
                else:
                    lo = mid + 1
            while weights[lo] <= 0.0 and lo < m - 1:
                lo = lo + 1
            counts[lo] += 1
    return counts_arr
