"""Brute-force oracles and statistical invariance checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import stats

from .diagnostics import Method, spectral_zero
from .targets import STD_NORMAL, TargetModel


@dataclass(frozen=True)
class InvarianceTestResult:
    statistic: float
    dof: int
    threshold: float
    passed: bool
    ess_correction: float

    @property
    def pass_(self) -> bool:
        return self.passed


def finite_diff_gradient(f: Callable[[np.ndarray], float], x, eps: float = 1e-5) -> np.ndarray:
    """Central differences (f(x + eps e_i) - f(x - eps e_i)) / (2 eps)."""
    if not eps > 0:
        raise ValueError("eps must be > 0")
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = eps
        g[i] = (float(f(x + e)) - float(f(x - e))) / (2.0 * eps)
    return g


def gradient_rel_error(target: TargetModel, x, eps: float = 1e-5) -> float:
    """max_i |analytic - numeric| / max(1, |analytic|)."""
    analytic = np.asarray(target.grad_log_density(np.asarray(x, dtype=float)))
    numeric = finite_diff_gradient(target.log_density, x, eps)
    return float(np.max(np.abs(analytic - numeric) / np.maximum(1.0, np.abs(analytic))))


def brute_matrix_power(P, nu: int) -> np.ndarray:
    """P**nu by nu - 1 naive multiplications."""
    if nu < 1:
        raise ValueError("nu must be >= 1")
    P = np.asarray(P, dtype=float)
    out = P.copy()
    for _ in range(nu - 1):
        out = np.array([[sum(out[i, k] * P[k, j] for k in range(2)) for j in range(2)] for i in range(2)])
    return out


def dkw_epsilon(N: int, alpha: float) -> float:
    """Uniform empirical-CDF deviation bound holding with probability 1 - alpha."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * N))


def marginal_quantiles(target: TargetModel, probs: np.ndarray) -> np.ndarray:
    if target.kind != STD_NORMAL:
        raise ValueError(f"no closed-form marginals for {target.name}; use invariance_ks")
    return stats.norm.ppf(probs)


def invariance_chisq(samples, target: TargetModel, bins: int = 20, ess_hint: Optional[float] = None,
                     level: float = 0.999) -> InvarianceTestResult:
    """Equiprobable-bin Pearson test on every marginal.

    The statistic of each marginal is scaled by ``ess_hint / len(samples)``
    (capped at 1) to account for autocorrelation; the test passes when the
    largest scaled statistic is below the chi-square ``level`` quantile with
    ``bins - 1`` degrees of freedom.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if bins < 5:
        raise ValueError("need at least 5 bins")
    count = len(x)
    if count < 10 * bins:
        raise ValueError(f"insufficient samples: {count} < {10 * bins}")
    ess_hint = float(count) if ess_hint is None else float(ess_hint)
    if not ess_hint > 0:
        raise ValueError("ess_hint must be > 0")
    scale = min(1.0, ess_hint / count)
    edges = marginal_quantiles(target, np.linspace(0.0, 1.0, bins + 1)[1:-1])
    expected = count / bins
    stat = 0.0
    for k in range(x.shape[1]):
        observed = np.bincount(np.searchsorted(edges, x[:, k]), minlength=bins)
        stat = max(stat, float(np.sum((observed - expected) ** 2) / expected) * scale)
    threshold = float(stats.chi2.ppf(level, bins - 1))
    return InvarianceTestResult(stat, bins - 1, threshold, stat <= threshold, scale)


def conservative_ess(samples, target: Optional[TargetModel] = None, bins: int = 20) -> float:
    """Smallest ESS over the coordinates and the bin indicators of a chain.

    Bin indicators use the target's marginal quantiles when available and
    the sample quantiles otherwise; the initial-sequence estimator is used
    throughout.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = len(x)
    probs = np.linspace(0.0, 1.0, bins + 1)[1:-1]
    worst = math.inf
    for k in range(x.shape[1]):
        series = [x[:, k]]
        if target is not None and target.kind == STD_NORMAL:
            edges = marginal_quantiles(target, probs)
        else:
            edges = np.quantile(x[:, k], probs)
        idx = np.searchsorted(edges, x[:, k])
        series += [(idx == b).astype(float) for b in range(bins)]
        for s in series:
            if np.var(s) == 0:
                continue
            worst = min(worst, n / spectral_zero(s, Method.INITIAL_SEQUENCE))
    return float(worst)


def invariance_ks(samples, reference, alpha: float = 0.001, ess_samples: Optional[float] = None,
                  ess_reference: Optional[float] = None) -> InvarianceTestResult:
    """Two-sample max-CDF distance per marginal against a DKW threshold.

    Each empirical CDF is within ``dkw_epsilon(ess, alpha / 2)`` of the truth
    with probability 1 - alpha/2, so the two are within the sum of the bounds.
    """
    x = np.asarray(samples, dtype=float)
    r = np.asarray(reference, dtype=float)
    if x.ndim == 1:
        x, r = x[:, None], r[:, None]
    n_x = float(len(x) if ess_samples is None else min(ess_samples, len(x)))
    n_r = float(len(r) if ess_reference is None else min(ess_reference, len(r)))
    eps = dkw_epsilon(max(1, int(n_x)), alpha / 2) + dkw_epsilon(max(1, int(n_r)), alpha / 2)
    stat = 0.0
    for k in range(x.shape[1]):
        stat = max(stat, float(stats.ks_2samp(x[:, k], r[:, k]).statistic))
    return InvarianceTestResult(stat, 0, eps, stat <= eps, n_x / len(x))
