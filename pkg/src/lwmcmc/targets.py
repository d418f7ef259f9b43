"""Built-in target densities (unnormalized, log scale) with analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

# codes understood by the compiled kernels
STD_NORMAL = 0
INDIRECT_OBS = 1


@dataclass(frozen=True)
class TargetModel:
    """Unnormalized log density on R^d.

    ``log_density`` and ``grad_log_density`` accept a single state ``(d,)`` or
    a stack ``(..., d)``.  ``kind``/``params`` let the compiled kernels
    evaluate built-in targets without calling back into Python; custom
    targets leave ``kind`` as ``None``.
    """

    name: str
    dim: int
    log_density: Callable[[np.ndarray], np.ndarray]
    grad_log_density: Optional[Callable[[np.ndarray], np.ndarray]] = None
    kind: Optional[int] = None
    params: tuple = ()

    @property
    def has_gradient(self) -> bool:
        return self.grad_log_density is not None


@dataclass(frozen=True)
class IndirectObsParams:
    y_obs: float = 1.0
    sigma: float = 0.1

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


def std_normal_target(d: int) -> TargetModel:
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")

    def logp(x):
        x = np.asarray(x, dtype=float)
        return -0.5 * np.sum(x * x, axis=-1)

    def grad(x):
        return -np.asarray(x, dtype=float)

    return TargetModel(f"std_normal(d={d})", d, logp, grad, STD_NORMAL, (0.0, 1.0))


def indirect_obs_target(params: IndirectObsParams = IndirectObsParams()) -> TargetModel:
    """Posterior of (z, theta) given y = theta*z + noise, z | theta ~ N(theta, 1).

    log pi(z, theta) = -(y - theta z)^2 / (2 sigma^2) - (z - theta)^2 / 2
    """
    y, sigma = float(params.y_obs), float(params.sigma)
    s2 = sigma * sigma

    def logp(x):
        x = np.asarray(x, dtype=float)
        z, th = x[..., 0], x[..., 1]
        r = y - th * z
        gap = z - th
        return -(r * r) / (2.0 * s2) - 0.5 * (gap * gap)

    def grad(x):
        x = np.asarray(x, dtype=float)
        z, th = x[..., 0], x[..., 1]
        r = y - th * z
        gap = z - th
        return np.stack([th * r / s2 - gap, z * r / s2 + gap], axis=-1)

    return TargetModel(f"indirect_obs(y={y!r},sigma={sigma!r})", 2, logp, grad, INDIRECT_OBS, (y, sigma))


def default_init(target: TargetModel) -> np.ndarray:
    """Origin for the standard normal; a point on theta*z = y otherwise.

    For y = 1 this is (1, 1), the mode of the positive branch.
    """
    if target.kind == INDIRECT_OBS:
        y = target.params[0]
        r = abs(y) ** 0.5
        return np.array([r, r if y >= 0 else -r])
    return np.zeros(target.dim)
