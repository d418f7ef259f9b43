"""Command-line entry point: ``lwmcmc run|ess|experiment|plot|verify``."""

from __future__ import annotations

import argparse
import os
import sys
import warnings

import numpy as np

from . import experiments as exps
from .config import ConfigError, load_config
from .core import coordinate, read_chain, write_chain
from .diagnostics import ess
from .sampler import run_lwmcmc, run_resampled
from .targets import IndirectObsParams, indirect_obs_target, std_normal_target
from .verify import conservative_ess, gradient_rel_error, invariance_chisq, invariance_ks


class CliError(Exception):
    """Failure reported as one stderr line with the given exit code."""

    def __init__(self, message: str, code: int = 1):
        super().__init__(message)
        self.code = code


def _fmt(v) -> str:
    return repr(float(v))


def _load_chain(path):
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return read_chain(path)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read chain {path}: {exc}") from None


# ---------------------------------------------------------------------------
# run

def cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = args.out or os.path.splitext(args.config)[0] + ".chain.csv"
    if cfg.algorithm == "resampled":
        res = run_resampled(cfg)
        write_chain(res.chain, out)
        mult = out + ".mult.csv"
        with open(mult, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(["iter"] + [f"N_{i}" for i in range(cfg.M + 1)]) + "\n")
            for j, row in enumerate(res.multiplicities):
                fh.write(",".join([str(j)] + [str(int(c)) for c in row]) + "\n")
    else:
        write_chain(run_lwmcmc(cfg), out)
    print(out)
    return 0


# ---------------------------------------------------------------------------
# ess

def _parse_h(text: str, dim: int) -> str:
    if text == "mean":
        return text
    kind, _, idx = text.partition(":")
    if kind != "coord" or not idx.isdigit() or int(idx) >= dim:
        raise CliError(f"--h: expected coord:<0..{dim - 1}> or mean, got {text!r}", 2)
    return text


def _parse_bandwidth(text):
    if text is None or text == "andrews":
        return text
    try:
        B = int(text)
    except ValueError:
        raise CliError(f"--bandwidth: expected an integer or 'andrews', got {text!r}", 2) from None
    if B < 0:
        raise CliError("--bandwidth must be >= 0", 2)
    return B


def ess_rows(chain, hs, method="bartlett", bandwidth=None) -> list[list[str]]:
    """Rows ``h,n,var_bar,sigma2,iact,ess``.

    ``mean`` reports the mean of the per-coordinate ESS values; its other
    columns are left empty because they have no single value.
    """
    rows = []
    per_coord = {}
    for h in hs:
        if h == "mean":
            for k in range(chain.dim):
                if k not in per_coord:
                    per_coord[k] = ess(chain, coordinate(k), method, bandwidth)
            rows.append([h, str(chain.n), "", "", "", _fmt(np.mean([per_coord[k].ess for k in range(chain.dim)]))])
            continue
        k = int(h.split(":")[1])
        if k not in per_coord:
            per_coord[k] = ess(chain, coordinate(k), method, bandwidth)
        r = per_coord[k]
        rows.append([h, str(r.n), _fmt(r.var_bar), _fmt(r.sigma2), _fmt(r.iact), _fmt(r.ess)])
    return rows


def cmd_ess(args) -> int:
    chain = _load_chain(args.input)
    hs = args.h or [f"coord:{k}" for k in range(chain.dim)] + ["mean"]
    hs = [_parse_h(h, chain.dim) for h in hs]
    try:
        rows = ess_rows(chain, hs, args.method, _parse_bandwidth(args.bandwidth))
    except ValueError as exc:
        raise CliError(f"ess: {exc}") from None
    sys.stdout.write("h,n,var_bar,sigma2,iact,ess\n")
    for r in rows:
        sys.stdout.write(",".join(r) + "\n")
    return 0


# ---------------------------------------------------------------------------
# experiment

def cmd_experiment(args) -> int:
    seeds = None
    if args.seeds:
        seeds = tuple(int(s) for s in args.seeds.split(","))
    reps = len(seeds) if seeds else args.replications
    kw = {}
    if args.M:
        kw["M_grid"] = tuple(int(m) for m in args.M.split(","))
    if args.N:
        kw["N_grid"] = tuple(int(m) for m in args.N.split(","))
    overrides = {}
    if args.n:
        overrides["n"] = args.n
    spec = exps.ExperimentSpec(args.name, reps, seeds, overrides, _parse_bandwidth(args.bandwidth), **kw)
    rows = exps.run_experiment(spec, save_dir=args.save_chains)
    out = args.out or f"{spec.name.value}_results.csv"
    exps.write_results(rows, out, spec.metadata())
    sys.stdout.write("M,N,scheme,count,mean_ess,sd_ess\n")
    for c in exps.summarize(rows):
        sys.stdout.write(f"{c['M']},{c['N']},{c['scheme']},{c['count']},{c['mean']:.1f},{c['sd']:.1f}\n")
    sys.stderr.write(f"wrote {out}\n")
    return 0


# ---------------------------------------------------------------------------
# plot

def render_svg(chain, size: int = 480) -> str:
    """Weighted points in black (opacity weight / max weight), T's outputs in red."""
    pts = chain.points.reshape(-1, chain.dim)
    xy = pts[:, :2] if chain.dim >= 2 else np.column_stack([pts[:, 0], np.zeros(len(pts))])
    nxt = chain.next_states
    nxy = nxt[:, :2] if chain.dim >= 2 else np.column_stack([nxt[:, 0], np.zeros(len(nxt))])
    lo, hi = xy.min(axis=0), xy.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    pad = 0.05 * span
    x0, y0 = lo - pad
    w, h = span + 2 * pad
    r = 0.006 * max(w, h)
    wt = chain.weights.reshape(-1)
    top = wt.max() if wt.max() > 0 else 1.0

    def circle(p, fill, opacity):
        # flip y so larger values are drawn higher
        cy = y0 + h - (p[1] - y0)
        return (f'<circle cx="{p[0]:.6g}" cy="{cy:.6g}" r="{r:.4g}" fill="{fill}" '
                f'fill-opacity="{opacity:.4g}"/>')

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="{x0:.6g} {y0:.6g} {w:.6g} {h:.6g}" preserveAspectRatio="none">',
        f'<rect x="{x0:.6g}" y="{y0:.6g}" width="{w:.6g}" height="{h:.6g}" fill="white"/>',
        '<g id="weighted">',
    ]
    lines += [circle(p, "black", float(q) / top) for p, q in zip(xy, wt)]
    lines += ["</g>", '<g id="propagated">']
    lines += [circle(p, "red", 1.0) for p in nxy]
    lines += ["</g>", "</svg>"]
    return "\n".join(lines) + "\n"


def cmd_plot(args) -> int:
    chain = _load_chain(args.input)
    svg = render_svg(chain)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)
    return 0


# ---------------------------------------------------------------------------
# verify

def _target(args):
    if args.target == "std_normal":
        return std_normal_target(args.dim)
    return indirect_obs_target(IndirectObsParams(args.y, args.sigma))


def cmd_verify(args) -> int:
    try:
        target = _target(args)
    except ValueError as exc:
        raise CliError(f"target: {exc}", 2) from None
    if args.check == "grad":
        rng = np.random.default_rng(args.seed)
        worst = max(gradient_rel_error(target, x) for x in rng.normal(0, 1.5, (args.points, target.dim)))
        ok = worst <= args.tol
        print(f"grad,{target.name},{args.points},{_fmt(worst)},{'pass' if ok else 'fail'}")
        return 0 if ok else 1

    if not args.input:
        raise CliError("verify invariance needs --in", 2)
    chain = _load_chain(args.input)
    samples = chain.next_states
    if target.dim != chain.dim:
        raise CliError(f"chain dimension {chain.dim} does not match target {target.name}", 2)
    try:
        if args.reference:
            ref = _load_chain(args.reference).next_states
            res = invariance_ks(samples, ref, ess_samples=conservative_ess(samples, None, args.bins),
                                ess_reference=conservative_ess(ref, None, args.bins))
        else:
            res = invariance_chisq(samples, target, args.bins, conservative_ess(samples, target, args.bins))
    except ValueError as exc:
        raise CliError(f"invariance: {exc}") from None
    print("statistic,dof,threshold,ess_correction,result")
    print(f"{_fmt(res.statistic)},{res.dof},{_fmt(res.threshold)},{_fmt(res.ess_correction)},"
          f"{'pass' if res.passed else 'fail'}")
    return 0 if res.passed else 1


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lwmcmc", description="Locally weighted MCMC samplers and diagnostics.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a sampler from a key=value config file")
    r.add_argument("config")
    r.add_argument("--out", help="chain CSV path (default: <config>.chain.csv)")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("ess", help="effective sample size of a saved chain")
    e.add_argument("--in", dest="input", required=True)
    e.add_argument("--h", action="append", help="coord:<k> or mean (repeatable; default: all coords and mean)")
    e.add_argument("--method", choices=["bartlett", "initseq"], default="bartlett")
    e.add_argument("--bandwidth", help="Bartlett truncation lag or 'andrews' (default floor(n^(1/3)))")
    e.set_defaults(func=cmd_ess)

    x = sub.add_parser("experiment", help="run a reference experiment")
    x.add_argument("name", choices=[m.value for m in exps.Experiment])
    x.add_argument("--out", help="results CSV (default: <name>_results.csv)")
    x.add_argument("--replications", type=int, default=10)
    x.add_argument("--seeds", help="comma-separated seeds (overrides --replications)")
    x.add_argument("--n", type=int, help="override the iteration count")
    x.add_argument("--M", help="comma-separated M grid (table1)")
    x.add_argument("--N", help="comma-separated resample counts (table1)")
    x.add_argument("--bandwidth", default="andrews", help="Bartlett lag or 'andrews' (default)")
    x.add_argument("--save-chains", metavar="DIR", help="also write every weighted chain to DIR")
    x.set_defaults(func=cmd_experiment)

    pl = sub.add_parser("plot", help="SVG scatter of a chain's weighted points")
    pl.add_argument("--in", dest="input", required=True)
    pl.add_argument("--out", required=True)
    pl.set_defaults(func=cmd_plot)

    v = sub.add_parser("verify", help="gradient and invariance checks")
    v.add_argument("check", choices=["grad", "invariance"])
    v.add_argument("--target", choices=["std_normal", "indirect_obs"], default="std_normal")
    v.add_argument("--dim", type=int, default=2)
    v.add_argument("--y", type=float, default=1.0)
    v.add_argument("--sigma", type=float, default=0.1)
    v.add_argument("--points", type=int, default=20)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tol", type=float, default=1e-5)
    v.add_argument("--in", dest="input")
    v.add_argument("--reference", help="reference chain for targets without closed-form marginals")
    v.add_argument("--bins", type=int, default=20)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"lwmcmc: config error: {exc}\n")
        return 2
    except CliError as exc:
        sys.stderr.write(f"lwmcmc: {exc}\n")
        return exc.code
    except OSError as exc:
        sys.stderr.write(f"lwmcmc: {exc.strerror or exc}: {exc.filename or ''}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
