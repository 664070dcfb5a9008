"""Mean estimators over anonymized values: sample mean, median (MLE), bootstrap."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DataError

__all__ = [
    "METHODS",
    "DEFAULT_BOOTSTRAP_B",
    "EstimateReport",
    "sample_mean",
    "mle_mean",
    "bootstrap_mean",
    "estimate",
]

METHODS = ("sample", "mle", "bootstrap")
DEFAULT_BOOTSTRAP_B = 200


@dataclass(frozen=True)
class EstimateReport:
    method: str
    estimate: float
    n: int
    bootstrap_b: Optional[int] = None

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"estimator: unknown method {self.method!r}")
        if not math.isfinite(self.estimate):
            raise DataError(f"estimate is not finite: {self.estimate}")
        if (self.bootstrap_b is not None) != (self.method == "bootstrap"):
            raise ConfigError("bootstrap_b: set exactly when method is bootstrap")


def _values(z: Sequence[float]) -> np.ndarray:
    arr = np.asarray(z, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DataError("estimator needs a nonempty list of values")
    return arr


def sample_mean(z: Sequence[float]) -> float:
    arr = _values(z)
    return math.fsum(arr) / arr.size


def mle_mean(z: Sequence[float]) -> float:
    """Minimizer of ``sum |z_i - mu|``: the median, midpoint for even ``n``."""
    arr = np.sort(_values(z))
    mid = arr.size // 2
    if arr.size % 2:
        return float(arr[mid])
    return float((arr[mid - 1] + arr[mid]) / 2)


def bootstrap_mean(
    z: Sequence[float],
    b: int,
    rng: Optional[np.random.Generator] = None,
    resamples: Optional[Sequence[Sequence[float]]] = None,
) -> float:
    """Mean of ``b`` resample means, each resample ``n`` draws with replacement.

    ``resamples`` replaces the random draws with fixed ones (``b`` rows).
    """
    arr = _values(z)
    if b < 1:
        raise ConfigError(f"bootstrap_b: must be >= 1, got {b}")
    if resamples is not None:
        if len(resamples) != b:
            raise ValueError(f"expected {b} resamples, got {len(resamples)}")
        means = [sample_mean(r) for r in resamples]
    else:
        if rng is None:
            raise ValueError("bootstrap needs a random stream or fixed resamples")
        idx = rng.integers(0, arr.size, size=(b, arr.size))
        means = arr[idx].mean(axis=1)
    return math.fsum(means) / b


def estimate(
    z: Sequence[float],
    method: str,
    rng: Optional[np.random.Generator] = None,
    bootstrap_b: int = DEFAULT_BOOTSTRAP_B,
) -> EstimateReport:
    n = len(z)
    if method == "sample":
        return EstimateReport(method, sample_mean(z), n)
    if method == "mle":
        return EstimateReport(method, mle_mean(z), n)
    if method == "bootstrap":
        return EstimateReport(method, bootstrap_mean(z, bootstrap_b, rng), n, bootstrap_b)
    raise ConfigError(f"estimator: unknown method {method!r} (expected one of {', '.join(METHODS)})")
