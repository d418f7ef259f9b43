"""Sampler configuration: flat ``key = value`` files with ``#`` comments."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Optional, Union

import numpy as np

from .targets import IndirectObsParams, TargetModel, default_init, indirect_obs_target, std_normal_target
from .weights import INF, ONE_HOT, format_nu, parse_nu


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


KERNELS = ("rw", "hmc")
PROPAGATIONS = ("mh", "weighted_draw", "hmc_endpoint")
ALGORITHMS = ("lwmcmc", "resampled")
TARGETS = ("std_normal", "indirect_obs")


@dataclass(frozen=True)
class SamplerConfig:
    n: int = 1000
    M: int = 1
    nu: Union[int, float] = INF
    propagate_nu: Optional[Union[int, float]] = None
    kernel: str = "rw"
    lam: float = 1.0
    delta: float = 0.05
    mass: Optional[np.ndarray] = field(default=None, compare=False)
    hmc_index: str = "uniform"
    propagation: str = "mh"
    algorithm: str = "lwmcmc"
    N: int = 1
    target: str = "std_normal"
    dim: int = 2
    y: float = 1.0
    sigma: float = 0.1
    seed: int = 0
    burnin: Optional[int] = None
    init: Optional[tuple] = None

    def __post_init__(self):
        self.validate()

    # -- validation -------------------------------------------------------

    def validate(self) -> None:
        if self.n < 1:
            raise ConfigError("n", f"must be >= 1, got {self.n}")
        if self.M < 1:
            raise ConfigError("M", f"must be >= 1, got {self.M}")
        if self.N < 1:
            raise ConfigError("N", f"must be >= 1, got {self.N}")
        if self.kernel not in KERNELS:
            raise ConfigError("kernel", f"must be one of {KERNELS}, got {self.kernel!r}")
        if self.propagation not in PROPAGATIONS:
            raise ConfigError("propagation", f"must be one of {PROPAGATIONS}, got {self.propagation!r}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError("algorithm", f"must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.target not in TARGETS:
            raise ConfigError("target", f"must be one of {TARGETS}, got {self.target!r}")
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ConfigError("lambda", f"must be > 0, got {self.lam}")
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise ConfigError("delta", f"must be > 0, got {self.delta}")
        if self.hmc_index not in ("uniform", "zero"):
            raise ConfigError("hmc_index", f"must be 'uniform' or 'zero', got {self.hmc_index!r}")
        if not (0 <= self.seed < 2**64):
            raise ConfigError("seed", f"must be a 64-bit unsigned integer, got {self.seed}")
        if self.burnin is not None and self.burnin < 0:
            raise ConfigError("burnin", f"must be >= 0, got {self.burnin}")
        if self.dim < 1:
            raise ConfigError("dim", f"must be >= 1, got {self.dim}")
        if self.target == "indirect_obs":
            if not self.sigma > 0:
                raise ConfigError("sigma", f"must be > 0, got {self.sigma}")
        for key, nu in (("nu", self.nu), ("propagate_nu", self.propagate_nu)):
            if nu is None or nu in (ONE_HOT, INF):
                continue
            if int(nu) != nu or nu < 1:
                raise ConfigError(key, f"must be onehot, an integer >= 1 or inf, got {nu}")
            if nu >= 2 and self.M != 1:
                raise ConfigError(key, f"finite nu >= 2 requires M = 1 (got M = {self.M})")
        if self.propagate_nu is not None and self.propagate_nu not in (1, INF):
            raise ConfigError("propagate_nu", "must be 1 or inf")
        if self.propagation == "hmc_endpoint" and self.kernel != "hmc":
            raise ConfigError("propagation", "hmc_endpoint requires kernel = hmc")
        if self.propagation == "mh" and self.kernel != "rw":
            raise ConfigError("propagation", "mh requires kernel = rw (use hmc_endpoint for hmc)")
        if self.mass is not None:
            W = np.asarray(self.mass, dtype=float)
            if W.shape != (self.dimension, self.dimension):
                raise ConfigError("mass", f"must be a {self.dimension}x{self.dimension} matrix")
            if not np.allclose(W, W.T):
                raise ConfigError("mass", "must be symmetric")
            try:
                np.linalg.cholesky(W)
            except np.linalg.LinAlgError:
                raise ConfigError("mass", "must be positive definite") from None
        if self.init is not None and len(self.init) != self.dimension:
            raise ConfigError("init", f"needs {self.dimension} coordinates, got {len(self.init)}")

    # -- derived ----------------------------------------------------------

    @property
    def dimension(self) -> int:
        return 2 if self.target == "indirect_obs" else self.dim

    @property
    def burnin_count(self) -> int:
        return self.n // 10 if self.burnin is None else self.burnin

    @property
    def mass_matrix(self) -> np.ndarray:
        return np.eye(self.dimension) if self.mass is None else np.asarray(self.mass, dtype=float)

    @property
    def draw_nu(self):
        """Scheme used by the weighted-draw propagation rule."""
        if self.propagate_nu is not None:
            return self.propagate_nu
        return self.nu if self.nu in (1, INF) else INF

    def make_target(self) -> TargetModel:
        if self.target == "indirect_obs":
            return indirect_obs_target(IndirectObsParams(self.y, self.sigma))
        return std_normal_target(self.dim)

    def initial_state(self, target: Optional[TargetModel] = None) -> np.ndarray:
        if self.init is not None:
            return np.array(self.init, dtype=float)
        return default_init(target if target is not None else self.make_target())

    def replace(self, **kw) -> "SamplerConfig":
        return replace(self, **kw)

    # -- text form ----------------------------------------------------------

    def to_items(self) -> dict:
        items = {
            "algorithm": self.algorithm,
            "n": str(self.n),
            "M": str(self.M),
            "nu": format_nu(self.nu),
            "kernel": self.kernel,
            "propagation": self.propagation,
            "target": self.target,
            "seed": str(self.seed),
            "burnin": str(self.burnin_count),
        }
        if self.propagate_nu is not None:
            items["propagate_nu"] = format_nu(self.propagate_nu)
        if self.kernel == "rw":
            items["lambda"] = repr(self.lam)
        else:
            items["delta"] = repr(self.delta)
            items["mass"] = "identity" if self.mass is None else "custom"
            items["hmc_index"] = self.hmc_index
        if self.algorithm == "resampled":
            items["N"] = str(self.N)
        if self.target == "std_normal":
            items["dim"] = str(self.dim)
        else:
            items["y"] = repr(self.y)
            items["sigma"] = repr(self.sigma)
        if self.init is not None:
            items["init"] = ",".join(repr(float(c)) for c in self.init)
        return items

    @classmethod
    def from_mapping(cls, mapping: dict) -> "SamplerConfig":
        kw = {}
        known = {f.name for f in fields(cls)}
        init_token = None
        for raw_key, raw in mapping.items():
            key = raw_key.strip()
            val = str(raw).strip()
            try:
                if key in ("n", "M", "N", "dim", "burnin"):
                    kw[key] = int(val)
                elif key == "steps":
                    if "M" in mapping and int(mapping["M"]) != int(val):
                        raise ValueError("conflicts with M")
                    kw["M"] = int(val)
                elif key == "seed":
                    kw["seed"] = int(val)
                elif key == "lambda":
                    kw["lam"] = float(val)
                elif key in ("delta", "y", "sigma"):
                    kw[key] = float(val)
                elif key in ("nu", "propagate_nu"):
                    kw[key] = parse_nu(val)
                elif key == "mass":
                    if val != "identity":
                        raise ValueError("only 'identity' is configurable from text")
                elif key == "init":
                    if val in ("origin", "ridge", "default"):
                        init_token = val
                    else:
                        kw["init"] = tuple(float(c) for c in val.split(","))
                elif key in ("kernel", "propagation", "algorithm", "target", "hmc_index"):
                    kw[key] = val
                elif key in known:
                    raise ValueError("not settable from text")
                else:
                    raise ValueError("unknown key")
            except ValueError as exc:
                raise ConfigError(key, str(exc)) from None
        cfg = cls(**kw)
        if init_token == "origin":
            cfg = cfg.replace(init=tuple([0.0] * cfg.dimension))
        return cfg


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key = value, got {line!r}")
        k, _, v = line.partition("=")
        out[k.strip()] = v.strip()
    return out


def load_config(path) -> SamplerConfig:
    with open(path, encoding="utf-8") as fh:
        return SamplerConfig.from_mapping(parse_config_text(fh.read()))
