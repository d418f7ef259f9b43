"""Weighting schemes for the points of one iteration.

All ratios are formed in log space; ``exp`` is only applied to non-positive
arguments, and scores of ``-inf`` (zero density) map to zero weight.

Scheme selector ``nu``: ``ONE_HOT`` (0) puts all mass on the chain state,
``1`` is version 1 (first row of P for a single proposal), ``math.inf`` is
version 2 (softmax of scores, the stationary row of P), and a finite
``nu >= 2`` is the first row of P**nu, defined for one proposal only.
"""

from __future__ import annotations

import math

import numpy as np

ONE_HOT = 0
INF = math.inf
NU_CAP = 2**20


def _check_scores(s):
    s = np.asarray(s, dtype=float)
    if np.any(np.isnan(s)) or np.any(s == np.inf):
        raise ValueError("log scores must be finite or -inf")
    return s


def pair_transition_matrix(log_score_0: float, log_score_1: float) -> np.ndarray:
    """2x2 MH transition matrix on {x0, x1}.

    Row 0 moves from x0 with probability min(1, pi_1 k / pi_0 k); row 1 is the
    reverse move.  If x1 has zero density, row 1 degenerates to [1, 0].
    """
    s0, s1 = _check_scores([log_score_0, log_score_1])
    if s0 == -np.inf and s1 == -np.inf:
        raise ValueError("degenerate pair: both log scores are -inf")
    r10 = math.exp(min(0.0, s1 - s0))
    r01 = math.exp(min(0.0, s0 - s1))
    return np.array([[1.0 - r10, r10], [r01, 1.0 - r01]])


def stationary_pair_weights(P: np.ndarray) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    p01, p10 = P[0, 1], P[1, 0]
    if not (p01 > 0 and p10 > 0):
        raise ValueError("transition matrix is reducible (an off-diagonal entry is zero)")
    w0 = p10 / (p01 + p10)
    return np.array([w0, p01 / (p01 + p10)])


def nu_power_weights(P: np.ndarray, nu) -> np.ndarray:
    """First row of P**nu by repeated squaring.

    ``nu = inf`` or ``nu > NU_CAP`` returns the stationary row instead.
    """
    if nu == INF:
        return stationary_pair_weights(P)
    if int(nu) != nu or nu < 1:
        raise ValueError(f"nu must be an integer >= 1 or inf, got {nu}")
    nu = int(nu)
    P = np.asarray(P, dtype=float)
    if nu > NU_CAP and P[0, 1] > 0 and P[1, 0] > 0:
        return stationary_pair_weights(P)
    result = np.eye(2)
    base = P.copy()
    while nu:
        if nu & 1:
            result = result @ base
        nu >>= 1
        if nu:
            base = base @ base
    return result[0].copy()


def _version1_rows(scores: np.ndarray, current: np.ndarray) -> np.ndarray:
    n, m1 = scores.shape
    rows = np.arange(n)
    cur = scores[rows, current]
    if np.any(~np.isfinite(cur)):
        raise ValueError("current state must have finite log score")
    with np.errstate(invalid="ignore"):
        diff = scores - cur[:, None]
    w = np.exp(np.minimum(0.0, diff)) / (m1 - 1)
    w[rows, current] = 0.0
    w[rows, current] = np.maximum(0.0, 1.0 - w.sum(axis=1))
    return w


def _version2_rows(scores: np.ndarray) -> np.ndarray:
    top = scores.max(axis=1)
    if np.any(top == -np.inf):
        raise ValueError("all log scores are -inf")
    e = np.exp(scores - top[:, None])
    return e / e.sum(axis=1, keepdims=True)


def version1_weights(log_scores, current: int = 0) -> np.ndarray:
    """w_i = min{1, exp(s_i - s_c)} / M off the current slot c; remainder to c."""
    s = _check_scores(log_scores)
    if len(s) < 2:
        raise ValueError("need at least one proposal")
    return _version1_rows(s[None, :], np.array([current]))[0]


def version2_weights(log_scores) -> np.ndarray:
    """Softmax of the log scores."""
    s = _check_scores(log_scores)
    return _version2_rows(s[None, :])[0]


def one_hot_weights(size: int, slot: int) -> np.ndarray:
    w = np.zeros(size)
    w[slot] = 1.0
    return w


def compute_weights(nu, log_scores, current: int = 0) -> np.ndarray:
    """Weights of one iteration under scheme ``nu`` (see module docstring)."""
    s = _check_scores(log_scores)
    return batch_weights(nu, s[None, :], np.array([current]))[0]


def batch_weights(nu, log_scores: np.ndarray, current_slots: np.ndarray) -> np.ndarray:
    """Row-wise :func:`compute_weights` over an ``(n, M+1)`` score array."""
    scores = np.asarray(log_scores, dtype=float)
    current = np.asarray(current_slots, dtype=np.int64)
    n, m1 = scores.shape
    if nu == ONE_HOT:
        w = np.zeros_like(scores)
        w[np.arange(n), current] = 1.0
        return w
    if nu == 1:
        return _version1_rows(scores, current)
    if nu == INF:
        return _version2_rows(scores)
    if m1 != 2:
        raise ValueError(f"finite nu >= 2 is only defined for a single proposal (M=1), got M={m1 - 1}")
    w = np.empty_like(scores)
    for j in range(n):
        c = current[j]
        P = pair_transition_matrix(scores[j, c], scores[j, 1 - c])
        row = nu_power_weights(P, nu)
        w[j, c], w[j, 1 - c] = row[0], row[1]
    return w


def parse_nu(text):
    """Parse a scheme selector: ``onehot``, a positive integer, or ``inf``."""
    t = str(text).strip().lower()
    if t in ("onehot", "one_hot", "mh"):
        return ONE_HOT
    if t in ("inf", "infinity", "oo"):
        return INF
    v = int(t)
    if v < 1:
        raise ValueError(f"nu must be >= 1, 'inf' or 'onehot', got {text!r}")
    return v


def format_nu(nu) -> str:
    if nu == ONE_HOT:
        return "onehot"
    if nu == INF:
        return "inf"
    return str(int(nu))
