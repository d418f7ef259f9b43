"""Propagation rules T: pick the next chain state from an iteration's points."""

from __future__ import annotations

import enum
import math

import numpy as np

from .kernels import TrajectoryProposal


class Selected(enum.Enum):
    CURRENT = 0
    CANDIDATE = 1


class Rule(str, enum.Enum):
    MH_STEP = "mh"
    WEIGHTED_DRAW = "weighted_draw"
    HMC_ENDPOINT = "hmc_endpoint"


def accept_probability(log_score_current: float, log_score_candidate: float) -> float:
    if not math.isfinite(log_score_current):
        raise ValueError("current log score must be finite")
    return math.exp(min(0.0, log_score_candidate - log_score_current))


def mh_select(log_score_current: float, log_score_candidate: float, rng: np.random.Generator) -> Selected:
    """Metropolis-Hastings accept/reject using one ``rng.random()`` draw."""
    r = accept_probability(log_score_current, log_score_candidate)
    return Selected.CANDIDATE if rng.random() < r else Selected.CURRENT


def draw_index(weights, u: float) -> int:
    """Inverse CDF at ``u``; boundaries go to the lower index, zero weights are skipped."""
    w = np.asarray(weights, dtype=float)
    cum = np.cumsum(w)
    cum = cum / cum[-1]
    i = int(np.searchsorted(cum, u, side="left"))
    i = min(i, len(w) - 1)
    while w[i] <= 0.0 and i < len(w) - 1:
        i += 1
    return i


def weighted_draw(weights, rng: np.random.Generator) -> int:
    return draw_index(weights, rng.random())


def hmc_endpoint_select(traj: TrajectoryProposal, rng: np.random.Generator) -> int:
    """Metropolis test between the start index l and the far endpoint a.

    Log scores are -H, so the acceptance is min{1, exp(-H_a + H_l)}.
    """
    s = traj.log_scores
    r = accept_probability(s[traj.l], s[traj.a])
    return traj.a if rng.random() < r else traj.l
