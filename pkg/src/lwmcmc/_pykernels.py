"""Pure-Python twins of the compiled kernels in ``_ckernels.pyx``.

Same signatures and semantics; used when the extension is not built or when
``LWMCMC_PURE_PYTHON`` is set.
"""

import math

import numpy as np

STD_NORMAL = 0
INDIRECT_OBS = 1


def _grad(kind, params, x):
    if kind == STD_NORMAL:
        return -x
    y, sigma = params[0], params[1]
    z, th = x[0], x[1]
    s2 = sigma * sigma
    r = y - th * z
    gap = z - th
    return np.array([th * r / s2 - gap, z * r / s2 + gap])


def _logp(kind, params, x):
    if kind == STD_NORMAL:
        return -0.5 * float(np.dot(x, x))
    s2 = params[1] * params[1]
    r = params[0] - x[1] * x[0]
    gap = x[0] - x[1]
    return -(r * r) / (2.0 * s2) - 0.5 * (gap * gap)


def leapfrog_path(kind, params, x0, p0, delta, steps, winv):
    d = len(x0)
    pos = np.empty((steps + 1, d))
    mom = np.empty((steps + 1, d))
    logp = np.empty(steps + 1)
    pos[0] = x0
    mom[0] = p0
    logp[0] = _logp(kind, params, pos[0])
    half = 0.5 * delta
    for t in range(steps):
        xh = pos[t] + half * (winv @ mom[t])
        mom[t + 1] = mom[t] + delta * _grad(kind, params, xh)
        pos[t + 1] = xh + half * (winv @ mom[t + 1])
        logp[t + 1] = _logp(kind, params, pos[t + 1])
    return pos, mom, logp


def pairwise_gauss_logsum(pts, lam):
    m, d = pts.shape
    norm = -0.5 * d * math.log(2.0 * math.pi * lam * lam)
    diff = pts[None, :, :] - pts[:, None, :]
    sq = np.sum(diff * diff, axis=2)
    terms = norm - sq * (1.0 / (2.0 * lam * lam))
    np.fill_diagonal(terms, 0.0)
    return terms.sum(axis=1)


def autocovariance(x, maxlag):
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = x - x.mean()
    return np.array([np.dot(c[: n - k], c[k:]) / n for k in range(maxlag + 1)])


def multinomial_counts(weights, u):
    weights = np.asarray(weights, dtype=float)
    cum = np.cumsum(weights)
    cum = cum / cum[-1]
    idx = np.searchsorted(cum, u, side="left")
    idx = np.minimum(idx, len(weights) - 1)
    # only reachable for u == 0 with leading zero weights
    zero = weights[idx] <= 0.0
    if np.any(zero):
        first = int(np.flatnonzero(weights > 0.0)[0])
        idx[zero] = np.maximum(idx[zero], first)
    return np.bincount(idx, minlength=len(weights)).astype(np.int64)
