"""Effective sample size for weighted chains, and acceptance rates.

For a chain of ``n`` iterations the iteration means
``hbar_j = sum_i w_ij h(x_ij)`` form a stationary series and

    ESS = n / ((Var(hbar) / sigma^2) * iact)

where ``sigma^2`` is the variance of h under the target and ``iact`` is the
normalized spectral density of the series at frequency zero.  With one-hot
weights this is the usual n / (1 + 2 sum rho_k).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _backend
from .core import ChainOutput, EstimandFunction


class Method(str, enum.Enum):
    BARTLETT = "bartlett"
    INITIAL_SEQUENCE = "initseq"


@dataclass(frozen=True)
class EssReport:
    n: int
    bar_series: np.ndarray
    var_bar: float
    sigma2: float
    iact: float
    ess: float
    method: Method
    bandwidth: int
    h_name: str = ""


def iteration_means(chain: ChainOutput, h: EstimandFunction) -> np.ndarray:
    if chain.n == 0:
        raise ValueError("empty chain")
    return np.sum(chain.weights * h(chain.points), axis=1)


def default_bandwidth(length: int) -> int:
    return int(np.floor(length ** (1.0 / 3.0) + 1e-9))


def autocovariance(series, maxlag: int) -> np.ndarray:
    """Biased sample autocovariances at lags 0..maxlag."""
    x = np.ascontiguousarray(series, dtype=float)
    maxlag = min(int(maxlag), len(x) - 1)
    if maxlag > 200:
        return _fft_autocovariance(x)[: maxlag + 1]
    return _backend.autocovariance(x, maxlag)


def _fft_autocovariance(x: np.ndarray) -> np.ndarray:
    n = len(x)
    c = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(c, size)
    return np.fft.irfft(f * np.conj(f), size)[:n] / n


def spectral_zero(series, method=Method.BARTLETT, bandwidth: Optional[int] = None) -> float:
    """Estimate 1 + 2 sum_k rho_k (the IACT) of ``series``.

    BARTLETT uses the triangular lag window with truncation ``bandwidth``
    (default floor(len^(1/3))).  INITIAL_SEQUENCE sums autocorrelation pairs
    until the first non-positive pair.
    """
    x = np.asarray(series, dtype=float)
    if len(x) < 10:
        raise ValueError(f"series too short for spectral estimation (length {len(x)} < 10)")
    method = Method(method)
    if method is Method.BARTLETT:
        B = default_bandwidth(len(x)) if bandwidth is None else int(bandwidth)
        if B < 0:
            raise ValueError("bandwidth must be >= 0")
        gam = autocovariance(x, B)
        if not gam[0] > 0:
            raise ValueError("degenerate series: zero variance")
        k = np.arange(1, len(gam))
        return float(1.0 + 2.0 * np.sum((1.0 - k / (B + 1.0)) * gam[1:] / gam[0]))

    gam = _fft_autocovariance(x)
    if not gam[0] > 0:
        raise ValueError("degenerate series: zero variance")
    rho = gam / gam[0]
    total = 0.0
    for m in range(len(rho) // 2):
        pair = rho[2 * m] + rho[2 * m + 1]
        if pair <= 0:
            break
        total += pair
    return float(2.0 * total - 1.0)


def andrews_bandwidth(series) -> int:
    """Bartlett truncation lag from Andrews' AR(1) plug-in rule.

    S = 1.1447 (alpha n)^(1/3) with alpha = 4 rho^2 / ((1 - rho)^2 (1 + rho)^2)
    and rho the lag-1 autocorrelation; the window 1 - k/(B + 1) reaches zero
    at B + 1 = S.  Clipped to [1, n/2].
    """
    x = np.asarray(series, dtype=float)
    g = autocovariance(x, 1)
    if not g[0] > 0:
        raise ValueError("degenerate series: zero variance")
    rho = min(g[1] / g[0], 0.999)
    alpha = 4.0 * rho * rho / ((1.0 - rho) ** 2 * (1.0 + rho) ** 2)
    S = 1.1447 * (alpha * len(x)) ** (1.0 / 3.0)
    return int(max(1, min(len(x) // 2, round(S) - 1)))


def effective_bandwidth(length: int, method, bandwidth: Optional[int]) -> int:
    if Method(method) is Method.BARTLETT:
        return default_bandwidth(length) if bandwidth is None else int(bandwidth)
    return 0


def ess(chain: ChainOutput, h: EstimandFunction, method=Method.BARTLETT,
        bandwidth=None) -> EssReport:
    """ESS of the weighted estimator of E[h].

    ``var_bar`` is the (1/n) variance of the iteration means and ``sigma2``
    the weighted all-points moment estimator (1/n) sum_j sum_i w_ij (h_ij - m)^2
    with m the weighted mean.

    ``bandwidth`` (BARTLETT only): ``None`` for floor(n^(1/3)), an integer, or
    ``"andrews"`` to pick it with :func:`andrews_bandwidth` on h along the
    propagating chain, which gives every weighting of one chain the same lag
    window.
    """
    if chain.n < 100:
        raise ValueError(f"ESS needs at least 100 iterations, got {chain.n}")
    if isinstance(bandwidth, str):
        if bandwidth != "andrews":
            raise ValueError(f"unknown bandwidth rule {bandwidth!r}")
        bandwidth = andrews_bandwidth(h(chain.current_states))
    vals = h(chain.points)
    bar = np.sum(chain.weights * vals, axis=1)
    m = np.mean(bar)
    var_bar = float(np.mean((bar - m) ** 2))
    sigma2 = float(np.mean(np.sum(chain.weights * (vals - m) ** 2, axis=1)))
    if not sigma2 > 0:
        raise ValueError("sigma2 estimate is not positive")
    iact = spectral_zero(bar, method, bandwidth)
    value = chain.n / ((var_bar / sigma2) * iact)
    if not value > 0:
        raise ValueError(f"non-positive ESS estimate (iact={iact})")
    return EssReport(chain.n, bar, var_bar, sigma2, iact, float(value), Method(method),
                     effective_bandwidth(chain.n, method, bandwidth), h.name)


def classic_ess(series, method=Method.BARTLETT, bandwidth: Optional[int] = None) -> float:
    """n / (1 + 2 sum rho_k) for a plain MCMC series."""
    x = np.asarray(series, dtype=float)
    return len(x) / spectral_zero(x, method, bandwidth)


def acceptance_rate(chain: ChainOutput) -> float:
    if chain.n == 0:
        raise ValueError("empty chain")
    return float(np.mean(chain.accepted))
