"""Compiled vs pure-Python kernels, plus one end-to-end chain per backend.

    python benchmarks/bench_kernels.py [--repeat 5]

The end-to-end rows run a fresh interpreter per backend so the import-time
selection (LWMCMC_PURE_PYTHON) is exercised the way users hit it.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from lwmcmc import _pykernels

try:
    from lwmcmc import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def cases():
    rng = np.random.default_rng(0)
    params = np.array([1.0, 0.1])
    x0 = np.array([1.0, 1.0])
    p0 = rng.standard_normal(2)
    winv = np.eye(2)
    pts = rng.standard_normal((31, 2))
    series = rng.standard_normal(10_000)
    w = rng.random(31)
    w /= w.sum()
    u = rng.random(1000)
    return {
        "leapfrog_path (240 steps)": lambda m: m.leapfrog_path(1, params, x0, p0, 0.05, 240, winv),
        "pairwise_gauss_logsum (M=30)": lambda m: m.pairwise_gauss_logsum(pts, 0.45),
        "autocovariance (n=1e4, 50 lags)": lambda m: m.autocovariance(series, 50),
        "multinomial_counts (N=1000)": lambda m: m.multinomial_counts(w, u),
    }


CHAIN = (
    "import time; from lwmcmc import SamplerConfig, run_lwmcmc, BACKEND;"
    "cfg = SamplerConfig(n=300, M=60, kernel='hmc', propagation='hmc_endpoint', target='indirect_obs');"
    "t = time.perf_counter(); run_lwmcmc(cfg); print(BACKEND, time.perf_counter() - t)"
)


def end_to_end(pure: bool) -> tuple:
    env = dict(os.environ)
    env.pop("LWMCMC_PURE_PYTHON", None)
    if pure:
        env["LWMCMC_PURE_PYTHON"] = "1"
    out = subprocess.run([sys.executable, "-c", CHAIN], env=env, capture_output=True, text=True, check=True)
    name, secs = out.stdout.split()
    return name, float(secs)


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    print(f"{'kernel':36s} {'python us':>11s} {'cython us':>11s} {'speedup':>8s}")
    for name, fn in cases().items():
        row = []
        for mod in (_pykernels, _ckernels):
            if mod is None:
                row.append(float("nan"))
                continue
            number = 200
            best = min(timeit.repeat(lambda: fn(mod), number=number, repeat=args.repeat))
            row.append(best / number * 1e6)
        print(f"{name:36s} {row[0]:11.1f} {row[1]:11.1f} {row[0] / row[1]:8.1f}")

    print()
    print("HMC chain, n=300 (+30 burn-in), M=60, indirect target:")
    for pure in (True, False):
        name, secs = end_to_end(pure)
        print(f"  backend={name:7s} {secs:7.2f} s")


if __name__ == "__main__":
    main()
