"""Mallows distribution over permutations under Kendall-tau distance."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .permutation import Permutation, kendall_tau

__all__ = [
    "MallowsParams",
    "log_normalizer",
    "normalizer",
    "pmf",
    "mahonian_counts",
    "distance_distribution",
    "sample",
    "sample_many",
]


@dataclass(frozen=True)
class MallowsParams:
    center: Permutation
    theta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.theta) and self.theta >= 0):
            raise ConfigError(f"theta: must be finite and >= 0, got {self.theta}")

    @property
    def n(self) -> int:
        return len(self.center)


def log_normalizer(n: int, theta: float) -> float:
    """``log Z``, with ``Z = prod_{i=1}^{n-1} sum_{j=0}^{i} exp(-j theta)``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if theta == 0:
        return math.lgamma(n + 1)
    # each factor is a geometric sum (1 - q^(i+1)) / (1 - q), q = exp(-theta)
    denom = math.log(-math.expm1(-theta))
    return math.fsum(math.log(-math.expm1(-(i + 1) * theta)) - denom for i in range(1, n))


def normalizer(n: int, theta: float) -> float:
    if theta == 0:
        return float(math.factorial(n))
    return math.exp(log_normalizer(n, theta))


def pmf(sigma: Permutation, params: MallowsParams) -> float:
    if len(sigma) != params.n:
        raise ValueError(f"size mismatch: {len(sigma)} vs {params.n}")
    d = kendall_tau(sigma, params.center)
    return math.exp(-params.theta * d - log_normalizer(params.n, params.theta))


def mahonian_counts(n: int) -> list[int]:
    """Number of permutations of size ``n`` at each Kendall-tau distance from a fixed one."""
    counts = [1]
    for i in range(2, n + 1):
        nxt = [0] * (len(counts) + i - 1)
        for d, c in enumerate(counts):
            for r in range(i):
                nxt[d + r] += c
        counts = nxt
    return counts


def distance_distribution(n: int, theta: float) -> list[float]:
    """Probability that a Mallows draw lies at each distance ``0..n(n-1)/2``."""
    log_z = log_normalizer(n, theta)
    return [c * math.exp(-theta * d - log_z) for d, c in enumerate(mahonian_counts(n))]


def _insertion_offsets(n: int, theta: float, size: int, rng: np.random.Generator) -> np.ndarray:
    # column i-2 holds r_i in {0..i-1} for item i = 2..n, P(r) ~ exp(-theta r)
    slots = np.arange(2, n + 1)
    u = rng.random((size, n - 1))
    if theta == 0:
        r = np.floor(u * slots)
    else:
        mass = -np.expm1(-theta * slots)
        r = np.floor(-np.log1p(-u * mass) / theta)
    return np.minimum(r, slots - 1).astype(np.int64)


def sample_many(params: MallowsParams, size: int, rng: np.random.Generator) -> np.ndarray:
    """Exact draws by repeated insertion, as a ``(size, n)`` array of 1-based one-line rows.

    Item ``i`` goes in ``r_i`` places from the end of the current list, which
    adds exactly ``r_i`` inversions; the finished list is then composed with
    the center so that ``d_K(draw, center) == sum(r)``.
    """
    n = params.n
    if size < 0:
        raise ValueError("size must be >= 0")
    pos = np.zeros((size, n), dtype=np.int64)
    if n > 1:
        offsets = _insertion_offsets(n, params.theta, size, rng)
        for i in range(2, n + 1):
            p = (i - 1) - offsets[:, i - 2]
            head = pos[:, : i - 1]
            head += head >= p[:, None]
            pos[:, i - 1] = p
    seq = np.empty_like(pos)
    rows = np.arange(size)[:, None]
    seq[rows, pos] = np.arange(1, n + 1)
    center = np.asarray(params.center.mapping) - 1
    return seq[:, center]


def sample(params: MallowsParams, rng: np.random.Generator) -> Permutation:
    return Permutation(tuple(sample_many(params, 1, rng)[0]))
