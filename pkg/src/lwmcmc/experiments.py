"""The three reference experiments: intro normal, RW indirect, HMC grid.

Each replication is one seed; per seed a single propagating chain is run
and re-weighted, so every scheme in a row group shares the same chain.  ESS
is reported per coordinate (Bartlett lag window) and as their mean.
"""

from __future__ import annotations

import csv
import enum
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import SamplerConfig
from .core import coordinate, write_chain
from .diagnostics import acceptance_rate, ess
from .sampler import resample_chain, reweight, run_lwmcmc
from .weights import INF, ONE_HOT

RESULT_COLUMNS = ["experiment", "M", "N", "scheme", "seed", "ess_coord0", "ess_coord1", "ess_mean", "acceptance"]

TABLE1_M = (5, 30, 60, 90, 240)
TABLE1_N = (1, 10, 50, 200, 1000)


class Experiment(str, enum.Enum):
    INTRO_NORMAL = "intro"
    RW_INDIRECT = "rw"
    HMC_TABLE1 = "table1"


@dataclass(frozen=True)
class ExperimentSpec:
    name: Experiment
    replications: int = 10
    seeds: Optional[tuple] = None
    overrides: dict = field(default_factory=dict)
    bandwidth: object = "andrews"
    M_grid: tuple = TABLE1_M
    N_grid: tuple = TABLE1_N

    def __post_init__(self):
        object.__setattr__(self, "name", Experiment(self.name))
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.seeds is not None and len(self.seeds) != self.replications:
            raise ValueError("need one seed per replication")

    @property
    def seed_list(self) -> tuple:
        return tuple(self.seeds) if self.seeds is not None else tuple(range(self.replications))

    def base_config(self, seed: int = 0, M: Optional[int] = None) -> SamplerConfig:
        if self.name is Experiment.INTRO_NORMAL:
            base = dict(n=10_000, M=1, kernel="rw", lam=1.2, propagation="mh", nu=ONE_HOT,
                        target="std_normal", dim=2)
        elif self.name is Experiment.RW_INDIRECT:
            base = dict(n=10_000, M=1, kernel="rw", lam=0.45, propagation="mh", nu=ONE_HOT,
                        target="indirect_obs", y=1.0, sigma=0.1)
        else:
            base = dict(n=1_000, M=M or TABLE1_M[0], kernel="hmc", delta=0.05, propagation="hmc_endpoint",
                        nu=1, target="indirect_obs", y=1.0, sigma=0.1)
        base.update(self.overrides)
        base["seed"] = seed
        if M is not None:
            base["M"] = M
        return SamplerConfig(**base)

    def metadata(self) -> dict:
        cfg = self.base_config(self.seed_list[0])
        meta = {k: v for k, v in cfg.to_items().items() if k != "seed"}
        meta.update(experiment=self.name.value, replications=self.replications,
                    seeds=",".join(str(s) for s in self.seed_list), ess_bandwidth=self.bandwidth)
        if self.name is Experiment.HMC_TABLE1:
            meta.pop("M", None)
            meta["M_grid"] = ",".join(str(m) for m in self.M_grid)
            meta["N_grid"] = ",".join(str(m) for m in self.N_grid)
        return meta


def chain_ess(chain, bandwidth="andrews") -> tuple:
    """(ess of coord 0, ess of coord 1, their mean)."""
    vals = [ess(chain, coordinate(k), "bartlett", bandwidth).ess for k in range(chain.dim)]
    return vals[0], vals[1] if len(vals) > 1 else float("nan"), float(np.mean(vals))


def _row(spec, M, N, scheme, seed, chain, acc, save_dir):
    e0, e1, em = chain_ess(chain, spec.bandwidth)
    if save_dir is not None:
        write_chain(chain, os.path.join(save_dir, chain_filename(spec.name, M, N, scheme, seed)),
                    {"scheme": scheme})
    return {"experiment": spec.name.value, "M": M, "N": "" if N is None else N, "scheme": scheme,
            "seed": seed, "ess_coord0": e0, "ess_coord1": e1, "ess_mean": em, "acceptance": acc}


def chain_filename(name, M, N, scheme, seed) -> str:
    name = Experiment(name).value
    tail = f"_N{N}" if N is not None else ""
    return f"{name}_M{M}{tail}_{scheme}_seed{seed}.csv"


def _replicate(spec: ExperimentSpec, seed: int, M: Optional[int], save_dir) -> list[dict]:
    rows = []
    if spec.name is not Experiment.HMC_TABLE1:
        chain = run_lwmcmc(spec.base_config(seed))
        acc = acceptance_rate(chain)
        M = chain.M
        for scheme, nu in (("onehot", ONE_HOT), ("nu1", 1), ("nuinf", INF)):
            rows.append(_row(spec, M, None, scheme, seed, reweight(chain, nu), acc, save_dir))
        return rows

    base = spec.base_config(seed, M)
    lw = run_lwmcmc(base)
    acc = acceptance_rate(lw)
    rows.append(_row(spec, M, None, "lw_nu1", seed, reweight(lw, 1), acc, save_dir))
    rows.append(_row(spec, M, None, "lw_nuinf", seed, reweight(lw, INF), acc, save_dir))
    plain = run_lwmcmc(base.replace(hmc_index="zero", nu=ONE_HOT))
    rows.append(_row(spec, M, None, "hmc", seed, plain, acceptance_rate(plain), save_dir))
    # Calderhead: resampling on top of the weighted-draw chain, whose own
    # LWMCMC estimator is the matched-T comparison
    draw = run_lwmcmc(base.replace(propagation="weighted_draw", nu=INF))
    acc = acceptance_rate(draw)
    rows.append(_row(spec, M, None, "lw_draw_nuinf", seed, draw, acc, save_dir))
    for N in spec.N_grid:
        induced = resample_chain(draw, N).induced_chain()
        rows.append(_row(spec, M, N, "calderhead", seed, induced, acc, save_dir))
    return rows


def _task(args):
    return _replicate(*args)


def worker_count() -> int:
    raw = os.environ.get("LWMC_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"LWMC_THREADS must be an integer, got {raw!r}") from None
    return max(1, os.cpu_count() or 1)


def _sort_key(row):
    return (row["M"], row["scheme"], -1 if row["N"] == "" else row["N"], row["seed"])


def run_experiment(spec: ExperimentSpec, save_dir=None, workers: Optional[int] = None) -> list[dict]:
    """All result rows of ``spec`` in deterministic (sorted) order."""
    if save_dir is not None:
        os.makedirs(save_dir, exist_ok=True)
    Ms = spec.M_grid if spec.name is Experiment.HMC_TABLE1 else (None,)
    tasks = [(spec, seed, M, save_dir) for M in Ms for seed in spec.seed_list]
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(tasks) == 1:
        chunks = [_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            chunks = list(pool.map(_task, tasks))
    rows = [r for chunk in chunks for r in chunk]
    return sorted(rows, key=_sort_key)


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def format_results(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in RESULT_COLUMNS])
    return buf.getvalue()


def write_results(rows: list[dict], path, meta: Optional[dict] = None) -> None:
    path = os.fspath(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_results(rows))
    if meta:
        with open(path + ".meta", "w", encoding="utf-8", newline="\n") as fh:
            for k in sorted(meta):
                fh.write(f"{k}={meta[k]}\n")


def summarize(rows: list[dict]) -> list[dict]:
    """Mean and sample SD of ess_mean per (M, N, scheme) cell."""
    cells: dict = {}
    for r in rows:
        cells.setdefault((r["M"], r["scheme"], r["N"]), []).append(r["ess_mean"])
    out = []
    for (M, scheme, N), vals in sorted(cells.items(), key=lambda kv: (kv[0][0], kv[0][1], -1 if kv[0][2] == "" else kv[0][2])):
        v = np.asarray(vals, dtype=float)
        out.append({"M": M, "N": N, "scheme": scheme, "count": len(v), "mean": float(v.mean()),
                    "sd": float(v.std(ddof=1)) if len(v) > 1 else 0.0})
    return out


def cell_means(rows: list[dict]) -> dict:
    """{(M, scheme, N): mean ess_mean}."""
    return {(c["M"], c["scheme"], c["N"]): c["mean"] for c in summarize(rows)}
