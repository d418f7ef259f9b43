"""One-to-M proposal kernels.

Each kernel returns a :class:`ProposalSet` holding the M+1 points of an
iteration and, for every point i, the log score
log{pi(x_i) k(x_{-i}; x_i)} that the weighting schemes consume.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _backend
from .targets import TargetModel

# energy error beyond which a leapfrog point counts as divergent
DIVERGENCE = 1000.0


@dataclass(frozen=True)
class ProposalSet:
    points: np.ndarray
    log_scores: np.ndarray
    current_slot: int = 0
    momenta: Optional[np.ndarray] = None

    @property
    def M(self) -> int:
        return len(self.points) - 1


@dataclass(frozen=True)
class HmcPhasePoint:
    position: np.ndarray
    momentum: np.ndarray

    def __post_init__(self):
        if np.shape(self.position) != np.shape(self.momentum):
            raise ValueError("momentum must have the dimension of the state")


@dataclass(frozen=True)
class TrajectoryProposal:
    """Leapfrog path in time order; ``l`` is where the chain state sits."""

    positions: np.ndarray
    momenta: np.ndarray
    log_scores: np.ndarray
    l: int
    a: int

    @property
    def M(self) -> int:
        return len(self.positions) - 1

    @property
    def phase_points(self) -> list[HmcPhasePoint]:
        return [HmcPhasePoint(x, p) for x, p in zip(self.positions, self.momenta)]


def endpoint_index(l: int, M: int) -> int:
    """Trajectory end farther from the start index (0 on ties goes to M)."""
    return 0 if l > M - l else M


# ---------------------------------------------------------------------------
# random walk

def gaussian_log_kernel_sums(points: np.ndarray, lam: float) -> np.ndarray:
    """Entry i: sum_{j != i} log N(x_j; x_i, lam^2 I)."""
    return _backend.pairwise_gauss_logsum(np.ascontiguousarray(points, dtype=float), float(lam))


def gaussian_rw_propose(x0, lam: float, M: int, rng: np.random.Generator, target: TargetModel) -> ProposalSet:
    """Draw x_1..x_M i.i.d. N(x0, lam^2 I); slot 0 holds x0."""
    if not lam > 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    x0 = np.asarray(x0, dtype=float)
    steps = rng.standard_normal((M, x0.shape[0]))
    points = np.empty((M + 1, x0.shape[0]))
    points[0] = x0
    points[1:] = x0 + lam * steps
    scores = target.log_density(points) + gaussian_log_kernel_sums(points, lam)
    return ProposalSet(points, scores, 0)


# ---------------------------------------------------------------------------
# Hamiltonian dynamics

def hamiltonian(phase: HmcPhasePoint, W_inv, target: TargetModel) -> float:
    """-log pi(x) + p^T W^{-1} p / 2."""
    x = np.asarray(phase.position, dtype=float)
    p = np.asarray(phase.momentum, dtype=float)
    W_inv = np.asarray(W_inv, dtype=float)
    if x.shape != (target.dim,) or p.shape != x.shape or W_inv.shape != (len(x), len(x)):
        raise ValueError("dimension mismatch between phase point, W_inv and target")
    return float(-target.log_density(x) + 0.5 * p @ W_inv @ p)


def kinetic_energy(momenta: np.ndarray, W_inv) -> np.ndarray:
    momenta = np.asarray(momenta, dtype=float)
    return 0.5 * np.einsum("...i,ij,...j->...", momenta, np.asarray(W_inv, dtype=float), momenta)


def leapfrog_step(phase: HmcPhasePoint, delta: float, W_inv, target: TargetModel) -> HmcPhasePoint:
    """One position-Verlet step (half drift, full kick, half drift).

    A negative ``delta`` integrates backward in time and inverts the forward
    step exactly (up to rounding).
    """
    if target.grad_log_density is None:
        raise ValueError(f"target {target.name} has no gradient")
    if delta == 0:
        raise ValueError("delta must be nonzero")
    W_inv = np.asarray(W_inv, dtype=float)
    half = 0.5 * delta
    xh = phase.position + half * (W_inv @ phase.momentum)
    p = phase.momentum + delta * target.grad_log_density(xh)
    x = xh + half * (W_inv @ p)
    return HmcPhasePoint(x, p)


def leapfrog_path(x0, p0, delta: float, steps: int, W_inv, target: TargetModel):
    """Positions, momenta and log densities along ``steps`` leapfrog steps.

    Row 0 is the starting point.  Built-in targets run in the compiled core.
    """
    if target.grad_log_density is None:
        raise ValueError(f"target {target.name} has no gradient")
    if delta == 0:
        raise ValueError("delta must be nonzero")
    x0 = np.ascontiguousarray(x0, dtype=float)
    p0 = np.ascontiguousarray(p0, dtype=float)
    W_inv = np.ascontiguousarray(W_inv, dtype=float)
    if target.kind is not None:
        params = np.ascontiguousarray(target.params, dtype=float)
        return _backend.leapfrog_path(target.kind, params, x0, p0, float(delta), int(steps), W_inv)
    d = len(x0)
    pos = np.empty((steps + 1, d))
    mom = np.empty((steps + 1, d))
    pos[0], mom[0] = x0, p0
    phase = HmcPhasePoint(x0, p0)
    for t in range(steps):
        phase = leapfrog_step(phase, delta, W_inv, target)
        pos[t + 1], mom[t + 1] = phase.position, phase.momentum
    return pos, mom, target.log_density(pos)


def hmc_trajectory_propose(x, delta: float, M: int, W, target: TargetModel,
                           rng: np.random.Generator, l: Optional[int] = None,
                           W_inv=None):
    """Leapfrog trajectory of M steps placed around the current state.

    Draws p ~ N(0, W) from ``rng``; the start index ``l`` is drawn uniformly
    on {0..M} from ``rng`` after the momentum unless given.  The path is
    integrated backward ``l`` steps and forward ``M - l`` steps and stored in
    time order, so integrating forward from slot 0 reproduces the whole path.
    Log scores are -H(x_i, p_i).
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    x = np.asarray(x, dtype=float)
    W = np.asarray(W, dtype=float)
    if W_inv is None:
        W_inv = np.linalg.inv(W)
    chol = np.linalg.cholesky(W)
    p = chol @ rng.standard_normal(len(x))
    if l is None:
        l = int(rng.integers(0, M + 1))
    if not 0 <= l <= M:
        raise ValueError(f"start index must be in [0, {M}], got {l}")

    pos = np.empty((M + 1, len(x)))
    mom = np.empty((M + 1, len(x)))
    logp = np.empty(M + 1)
    pos[l], mom[l] = x, p
    logp[l] = target.log_density(x)
    if l > 0:
        bp, bm, bl = leapfrog_path(x, p, -delta, l, W_inv, target)
        pos[:l], mom[:l], logp[:l] = bp[:0:-1], bm[:0:-1], bl[:0:-1]
    if l < M:
        fp, fm, fl = leapfrog_path(x, p, delta, M - l, W_inv, target)
        pos[l + 1 :], mom[l + 1 :], logp[l + 1 :] = fp[1:], fm[1:], fl[1:]

    with np.errstate(over="ignore", invalid="ignore"):
        scores = logp - kinetic_energy(mom, W_inv)
    _freeze_divergent(pos, mom, scores, l)
    traj = TrajectoryProposal(pos, mom, scores, l, endpoint_index(l, M))
    return ProposalSet(pos, scores, l, mom), traj


def _freeze_divergent(pos, mom, scores, l):
    """Cut each segment at the first divergent point.

    A point diverges when its energy error exceeds ``DIVERGENCE`` or it is not
    finite.  From there outward the segment repeats the last good phase point
    with score -inf: such points would get weight exp(-1000) == 0 and are
    never selected, and the stored states stay finite.
    """
    floor = scores[l] - DIVERGENCE
    for order in (range(l + 1, len(scores)), range(l - 1, -1, -1)):
        prev = l
        for i in order:
            ok = np.isfinite(scores[i]) and scores[i] >= floor and np.all(np.isfinite(pos[i]))
            if not ok:
                idx = list(order)
                cut = idx[idx.index(i):]
                pos[cut] = pos[prev]
                mom[cut] = mom[prev]
                scores[cut] = -np.inf
                break
            prev = i
