"""Chain drivers: locally weighted MCMC and its resampling counterpart."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _backend
from .config import ConfigError, SamplerConfig
from .core import ChainOutput, EstimandFunction, IterationRecord, Role, make_rng_stream
from .kernels import gaussian_rw_propose, hmc_trajectory_propose
from .propagation import Selected, hmc_endpoint_select, mh_select, weighted_draw
from .targets import TargetModel
from .weights import batch_weights, compute_weights


def run_lwmcmc(config: SamplerConfig, target: Optional[TargetModel] = None) -> ChainOutput:
    """Run ``burnin + n`` iterations and keep the last ``n``.

    Per iteration: the kernel proposes, the stored weights are computed with
    ``config.nu`` and the propagation rule picks the next state.  All
    randomness comes from :func:`make_rng_stream` keyed on ``config.seed``
    and the absolute iteration index, so a run is reproducible from the
    config alone.
    """
    if target is None:
        target = config.make_target()
    d = config.dimension
    if target.dim != d:
        raise ConfigError("target", f"target dimension {target.dim} does not match config ({d})")
    if config.kernel == "hmc" and not target.has_gradient:
        raise ConfigError("kernel", "hmc kernel requires a target gradient")

    n, M, seed = config.n, config.M, config.seed
    burnin = config.burnin_count
    points = np.empty((n, M + 1, d))
    scores = np.empty((n, M + 1))
    weights = np.empty((n, M + 1))
    current_slots = np.zeros(n, dtype=np.int64)
    next_slots = np.zeros(n, dtype=np.int64)
    momenta = np.empty((n, M + 1, d)) if config.kernel == "hmc" else None

    W = config.mass_matrix
    W_inv = np.linalg.inv(W)
    x = config.initial_state(target)
    if not np.isfinite(target.log_density(x)):
        raise ConfigError("init", "initial state has zero density")

    for it in range(burnin + n):
        if config.kernel == "rw":
            prop = gaussian_rw_propose(x, config.lam, M, make_rng_stream(seed, it, Role.PROPOSE), target)
            traj = None
        else:
            l = 0 if config.hmc_index == "zero" else int(make_rng_stream(seed, it, Role.INDEX).integers(0, M + 1))
            prop, traj = hmc_trajectory_propose(
                x, config.delta, M, W, target, make_rng_stream(seed, it, Role.MOMENTUM), l=l, W_inv=W_inv
            )
        cur = prop.current_slot
        w = compute_weights(config.nu, prop.log_scores, cur)

        select_rng = make_rng_stream(seed, it, Role.SELECT)
        if config.propagation == "mh":
            choice = mh_select(prop.log_scores[cur], prop.log_scores[1], select_rng)
            nxt = 1 if choice is Selected.CANDIDATE else cur
        elif config.propagation == "weighted_draw":
            wd = w if config.draw_nu == config.nu else compute_weights(config.draw_nu, prop.log_scores, cur)
            nxt = weighted_draw(wd, select_rng)
        else:
            nxt = hmc_endpoint_select(traj, select_rng)

        j = it - burnin
        if j >= 0:
            points[j] = prop.points
            scores[j] = prop.log_scores
            weights[j] = w
            current_slots[j] = cur
            next_slots[j] = nxt
            if momenta is not None:
                momenta[j] = prop.momenta
        x = prop.points[nxt]

    return ChainOutput(points, weights, scores, current_slots, next_slots, config, seed, momenta)


def reweight(chain: ChainOutput, nu) -> ChainOutput:
    """Same chain, weights recomputed from the stored log scores."""
    return chain.with_weights(batch_weights(nu, chain.log_scores, chain.current_slots))


@dataclass(frozen=True)
class ResampleRecord:
    multiplicities: np.ndarray
    base: IterationRecord

    @property
    def N(self) -> int:
        return int(self.multiplicities.sum())

    @property
    def induced_weights(self) -> np.ndarray:
        return self.multiplicities / self.N


@dataclass(frozen=True, eq=False)
class ResampledOutput:
    """Chain plus per-iteration multinomial multiplicities ``(n, M+1)``."""

    chain: ChainOutput
    multiplicities: np.ndarray
    N: int

    @property
    def records(self) -> list[ResampleRecord]:
        return [ResampleRecord(self.multiplicities[j], self.chain.record(j)) for j in range(self.chain.n)]

    def induced_chain(self) -> ChainOutput:
        """The chain weighted by N_i / N."""
        return self.chain.with_weights(self.multiplicities / self.N)

    def resampled_points(self) -> np.ndarray:
        """All n*N resampled points, iteration by iteration."""
        pts = self.chain.points
        reps = [np.repeat(pts[j], self.multiplicities[j], axis=0) for j in range(self.chain.n)]
        return np.concatenate(reps, axis=0)

    def estimate(self, h: EstimandFunction) -> float:
        """(1/(nN)) sum_j sum_i h(y_ij) over the resampled points."""
        vals = h(self.chain.points)
        return float(np.sum(self.multiplicities * vals) / (self.chain.n * self.N))

    def __iter__(self):
        yield self.chain
        yield self.records


def resample_counts(chain: ChainOutput, N: int) -> np.ndarray:
    """Multinomial(N, stored weights) counts for every iteration.

    Uses the RESAMPLE stream of each iteration (``random(N)``), so counts for
    different N on the same chain share their first uniforms.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    burnin = chain.config.burnin_count if chain.config is not None else 0
    out = np.empty((chain.n, chain.M + 1), dtype=np.int64)
    for j in range(chain.n):
        u = make_rng_stream(chain.seed, burnin + j, Role.RESAMPLE).random(N)
        out[j] = _backend.multinomial_counts(np.ascontiguousarray(chain.weights[j]), u)
    return out


def run_resampled(config: SamplerConfig, target: Optional[TargetModel] = None) -> ResampledOutput:
    """Resampling variant: the same chain as :func:`run_lwmcmc` plus N draws
    per iteration from the stored weights.

    Resampling never feeds back into the chain, so the propagating chain is
    identical to the one :func:`run_lwmcmc` produces for the same config.
    """
    chain = run_lwmcmc(config, target)
    return ResampledOutput(chain, resample_counts(chain, config.N), config.N)


def resample_chain(chain: ChainOutput, N: int) -> ResampledOutput:
    return ResampledOutput(chain, resample_counts(chain, N), N)
