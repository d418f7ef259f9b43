"""Locally weighted MCMC: weighted multi-proposal samplers and their ESS."""

from ._backend import NAME as BACKEND
from .config import ConfigError, SamplerConfig, load_config
from .core import (
    ChainOutput,
    EstimandFunction,
    IterationRecord,
    Role,
    WeightedPoint,
    coordinate,
    estimate_mean,
    make_rng_stream,
    read_chain,
    write_chain,
)
from .diagnostics import EssReport, Method, acceptance_rate, classic_ess, ess, iteration_means, spectral_zero
from .sampler import ResampledOutput, resample_chain, reweight, run_lwmcmc, run_resampled
from .targets import IndirectObsParams, TargetModel, indirect_obs_target, std_normal_target
from .weights import INF, ONE_HOT

__version__ = "0.1.0"
