"""Budget-aware local randomizer: Laplace noise with a precision-gated clamp."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError

__all__ = [
    "DataRange",
    "PrecisionRequirement",
    "PrivacyBudget",
    "min_budget",
    "laplace_noise",
    "sample_laplace",
    "randomize",
    "randomize_array",
    "clamped_boundary_mass",
]


@dataclass(frozen=True)
class DataRange:
    x_min: float
    x_max: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ConfigError("range: bounds must be finite")
        if not self.x_min < self.x_max:
            raise ConfigError(f"range: x_min ({self.x_min}) must be < x_max ({self.x_max})")

    @property
    def delta(self) -> float:
        return self.x_max - self.x_min

    def contains(self, x: float) -> bool:
        return self.x_min <= x <= self.x_max


@dataclass(frozen=True)
class PrecisionRequirement:
    """Noisy output should land in ``[(1-beta)x, (1+beta)x]`` with prob. ``rho``."""

    beta: float
    rho: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"precision.beta: {self.beta} not in [0, 1]")
        if not 0.0 <= self.rho < 1.0:
            raise ConfigError(f"precision.rho: {self.rho} not in [0, 1)")


@dataclass(frozen=True)
class PrivacyBudget:
    epsilon_s: float
    alpha: float

    def __post_init__(self) -> None:
        if not (self.epsilon_s > 0 and math.isfinite(self.epsilon_s)):
            raise ConfigError(f"budget.epsilon_s: {self.epsilon_s} must be a positive finite number")
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ConfigError(f"budget.alpha: {self.alpha} must be a positive finite number")


def min_budget(data_range: DataRange, precision: PrecisionRequirement) -> float:
    """Smallest ``epsilon_s`` whose Laplace noise meets ``precision`` at ``x_max``.

    ``-delta * ln(1 - rho) / (beta * x_max)``. Undefined for ``beta == 0`` or a
    non-positive ``x_max``.
    """
    if precision.rho == 0.0:
        return 0.0
    if precision.beta == 0.0:
        raise ConfigError("precision.beta: must be > 0 for a finite budget bound")
    if data_range.x_max <= 0.0:
        raise ConfigError("range.x_max: must be > 0 for the budget bound to be defined")
    return -data_range.delta * math.log1p(-precision.rho) / (precision.beta * data_range.x_max)


def laplace_noise(scale: float, rng: np.random.Generator, size=None):
    """Draw ``Lap(0, scale)`` by inverting the CDF of one uniform per draw."""
    if not scale > 0:
        raise ValueError(f"Laplace scale must be positive, got {scale}")
    u = rng.random(size) - 0.5
    # u == -0.5 would give log(0); that single point has measure zero
    mag = np.maximum(1.0 - 2.0 * np.abs(u), np.finfo(float).tiny)
    return -scale * np.sign(u) * np.log(mag)


def sample_laplace(scale: float, rng: np.random.Generator) -> float:
    return float(laplace_noise(scale, rng))


def randomize_array(
    x,
    budget: PrivacyBudget,
    data_range: DataRange,
    precision: PrecisionRequirement,
    rng: np.random.Generator,
) -> np.ndarray:
    """Vectorised randomizer; every element receives independent noise."""
    x = np.asarray(x, dtype=float)
    if np.any((x < data_range.x_min) | (x > data_range.x_max)) or not np.all(np.isfinite(x)):
        bad = x[(x < data_range.x_min) | (x > data_range.x_max) | ~np.isfinite(x)]
        raise DataError(
            f"value {bad.flat[0]!r} outside data range [{data_range.x_min}, {data_range.x_max}]"
        )
    scale = data_range.delta / budget.epsilon_s
    y = x + laplace_noise(scale, rng, x.shape)
    if budget.epsilon_s >= min_budget(data_range, precision):
        return y
    return np.clip(y, data_range.x_min, data_range.x_max)


def randomize(
    x: float,
    budget: PrivacyBudget,
    data_range: DataRange,
    precision: PrecisionRequirement,
    rng: np.random.Generator,
) -> float:
    """Perturb one reading.

    Returns ``x + Lap(0, delta/epsilon_s)`` as is when the budget meets the
    precision bound, otherwise the same value clamped into the data range.
    """
    return float(randomize_array(np.array([x]), budget, data_range, precision, rng)[0])


def clamped_boundary_mass(x: float, budget: PrivacyBudget, data_range: DataRange) -> tuple[float, float]:
    """Probability that a clamped output equals ``x_min`` and ``x_max``."""
    rate = budget.epsilon_s / data_range.delta
    low = 0.5 * math.exp(rate * (data_range.x_min - x))
    high = 0.5 * math.exp(rate * (x - data_range.x_max))
    return low, high
