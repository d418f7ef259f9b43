"""Shared domain types, the randomness contract, and chain persistence."""

from __future__ import annotations

import enum
import functools
import os
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


class Role(enum.IntEnum):
    """Purpose of a random substream within one iteration."""

    PROPOSE = 0
    SELECT = 1
    RESAMPLE = 2
    MOMENTUM = 3
    INDEX = 4


@functools.lru_cache(maxsize=256)
def _philox_key(seed: int) -> np.ndarray:
    key = np.random.SeedSequence(seed).generate_state(2, np.uint64)
    key.flags.writeable = False
    return key


def make_rng_stream(seed: int, iteration: int, role: Role) -> np.random.Generator:
    """Deterministic substream for ``(seed, iteration, role)``.

    A Philox counter-based generator keyed by the seed; the iteration and role
    occupy the two high counter words, so distinct pairs never share blocks.

    Draw conventions used by the samplers (one stream per role and iteration):
    PROPOSE ``standard_normal((M, d))``; SELECT ``random()``; MOMENTUM
    ``standard_normal(d)``; INDEX ``integers(0, M + 1)``; RESAMPLE
    ``random(N)``.
    """
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    counter = np.array([0, 0, iteration, int(role)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=_philox_key(int(seed)), counter=counter))


@dataclass(frozen=True)
class EstimandFunction:
    """Scalar function ``h`` of a state.

    ``fn`` must accept an array of states with shape ``(..., d)`` and return
    shape ``(...)`` when ``vectorized`` is true; otherwise it is applied
    point by point.
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    vectorized: bool = True

    def __call__(self, states: np.ndarray) -> np.ndarray:
        states = np.asarray(states, dtype=float)
        if self.vectorized:
            return np.asarray(self.fn(states), dtype=float)
        flat = states.reshape(-1, states.shape[-1])
        out = np.array([float(self.fn(s)) for s in flat])
        return out.reshape(states.shape[:-1])


def coordinate(i: int) -> EstimandFunction:
    return EstimandFunction(f"coord:{i}", lambda x, i=i: x[..., i])


IDENTITY_1D = EstimandFunction("identity", lambda x: x[..., 0])


@dataclass(frozen=True)
class WeightedPoint:
    state: np.ndarray
    weight: float
    log_score: float


@dataclass(frozen=True)
class IterationRecord:
    points: tuple[WeightedPoint, ...]
    next_state: np.ndarray
    accepted: bool
    current_slot: int = 0
    momenta: Optional[np.ndarray] = None

    @property
    def weights(self) -> np.ndarray:
        return np.array([p.weight for p in self.points])


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class ChainOutput:
    """``n`` iterations of weighted points, stored as arrays.

    ``points[j, i]`` is point ``i`` of iteration ``j``; ``current_slots[j]``
    locates the chain state the iteration started from and ``next_slots[j]``
    the state chosen by the propagation rule.  :meth:`record` gives the
    per-iteration view.
    """

    points: np.ndarray
    weights: np.ndarray
    log_scores: np.ndarray
    current_slots: np.ndarray
    next_slots: np.ndarray
    config: object = None
    seed: int = 0
    momenta: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "points", _frozen(self.points))
        object.__setattr__(self, "weights", _frozen(self.weights))
        object.__setattr__(self, "log_scores", _frozen(self.log_scores))
        object.__setattr__(self, "current_slots", _frozen(self.current_slots, np.int64))
        object.__setattr__(self, "next_slots", _frozen(self.next_slots, np.int64))
        if self.momenta is not None:
            object.__setattr__(self, "momenta", _frozen(self.momenta))
        n, m1, _ = self.points.shape
        if self.weights.shape != (n, m1) or self.log_scores.shape != (n, m1):
            raise ValueError("weights/log_scores must have shape (n, M+1)")
        if self.current_slots.shape != (n,) or self.next_slots.shape != (n,):
            raise ValueError("slot arrays must have shape (n,)")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def M(self) -> int:
        return self.points.shape[1] - 1

    @property
    def dim(self) -> int:
        return self.points.shape[2]

    @property
    def current_states(self) -> np.ndarray:
        return self.points[np.arange(self.n), self.current_slots]

    @property
    def next_states(self) -> np.ndarray:
        return self.points[np.arange(self.n), self.next_slots]

    @property
    def accepted(self) -> np.ndarray:
        return np.any(self.next_states != self.current_states, axis=1)

    def record(self, j: int) -> IterationRecord:
        pts = tuple(
            WeightedPoint(self.points[j, i], float(self.weights[j, i]), float(self.log_scores[j, i]))
            for i in range(self.M + 1)
        )
        return IterationRecord(
            points=pts,
            next_state=self.points[j, self.next_slots[j]],
            accepted=bool(self.accepted[j]),
            current_slot=int(self.current_slots[j]),
            momenta=None if self.momenta is None else self.momenta[j],
        )

    @property
    def records(self) -> list[IterationRecord]:
        return [self.record(j) for j in range(self.n)]

    def with_weights(self, weights: np.ndarray) -> "ChainOutput":
        return ChainOutput(
            self.points, weights, self.log_scores, self.current_slots, self.next_slots,
            self.config, self.seed, self.momenta, dict(self.meta),
        )


def estimate_mean(chain: ChainOutput, h: EstimandFunction) -> float:
    """Weighted estimator (1/n) sum_j sum_i w_ij h(x_ij)."""
    if chain.n == 0:
        raise ValueError("empty chain")
    vals = h(chain.points)
    return float(np.mean(np.sum(chain.weights * vals, axis=1)))


# ---------------------------------------------------------------------------
# persistence

def _fmt(v: float) -> str:
    return repr(float(v))


def write_chain(chain: ChainOutput, path, meta: Optional[dict] = None) -> None:
    """Write ``path`` (CSV) and ``path + '.meta'`` (key=value lines)."""
    path = os.fspath(path)
    d = chain.dim
    header = ["iter", "slot", "weight", "log_score"] + [f"coord_{k}" for k in range(d)] + ["is_next_state"]
    lines = [",".join(header)]
    for j in range(chain.n):
        nxt = chain.next_slots[j]
        for i in range(chain.M + 1):
            row = [str(j), str(i), _fmt(chain.weights[j, i]), _fmt(chain.log_scores[j, i])]
            row += [_fmt(c) for c in chain.points[j, i]]
            row.append("1" if i == nxt else "0")
            lines.append(",".join(row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")

    items = {}
    if chain.config is not None and hasattr(chain.config, "to_items"):
        items.update(chain.config.to_items())
    items["seed"] = str(chain.seed)
    items.update({k: str(v) for k, v in chain.meta.items()})
    if meta:
        items.update({k: str(v) for k, v in meta.items()})
    if chain.n:
        items["start"] = ",".join(_fmt(c) for c in chain.current_states[0])
        items["start_slot"] = str(int(chain.current_slots[0]))
    with open(path + ".meta", "w", encoding="utf-8", newline="\n") as fh:
        for k in sorted(items):
            fh.write(f"{k}={items[k]}\n")


def read_meta(path) -> dict:
    out = {}
    with open(os.fspath(path), encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            k, _, v = line.partition("=")
            out[k.strip()] = v.strip()
    return out


def read_chain(path) -> ChainOutput:
    """Inverse of :func:`write_chain`.

    Current slots are recovered from chain continuity; iteration 0 uses the
    ``start_slot`` recorded in the sidecar (slot 0 if absent).
    """
    path = os.fspath(path)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header[:4] != ["iter", "slot", "weight", "log_score"] or header[-1] != "is_next_state":
            raise ValueError(f"{path}: not a chain file")
        d = len(header) - 5
        data = np.loadtxt(fh, delimiter=",", ndmin=2) if d > 0 else None
    if data is None or data.size == 0:
        raise ValueError(f"{path}: empty chain")
    iters = data[:, 0].astype(np.int64)
    n = int(iters.max()) + 1
    m1 = len(data) // n
    if m1 * n != len(data):
        raise ValueError(f"{path}: ragged chain")
    weights = data[:, 2].reshape(n, m1)
    log_scores = data[:, 3].reshape(n, m1)
    points = data[:, 4 : 4 + d].reshape(n, m1, d)
    next_slots = np.argmax(data[:, -1].reshape(n, m1), axis=1)

    meta = {}
    if os.path.exists(path + ".meta"):
        meta = read_meta(path + ".meta")
    current = np.zeros(n, dtype=np.int64)
    current[0] = int(meta.get("start_slot", 0))
    for j in range(1, n):
        prev = points[j - 1, next_slots[j - 1]]
        hit = np.flatnonzero(np.all(points[j] == prev, axis=1))
        current[j] = hit[0] if len(hit) else 0
    seed = int(meta.get("seed", 0))
    return ChainOutput(points, weights, log_scores, current, next_slots, None, seed, None, meta)
