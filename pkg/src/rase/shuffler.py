"""Robust shuffler: Mallows shuffling over refined groups, cyclic fallback.

Values arrive in some order; ``arrival`` maps contributor ``i`` to the
position its value occupied. The shuffler first decides between the Mallows
branch and the uniform-cycle branch (a deterministic :class:`ShufflePlan`),
then draws the output order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DataError, DegenerateInputError
from .grouping import ContributorGraph, Partition, initial_partition, refine_groups, sensitivity
from .mallows import MallowsParams, sample_many
from .permutation import Permutation, apply, compose, inverse, sattolo_shuffle

__all__ = [
    "MALLOWS",
    "UNIFORM_CYCLE",
    "THETA_FLOOR",
    "NoisyBatch",
    "ShuffledBatch",
    "ShufflePlan",
    "ShuffleDraw",
    "plan_shuffle",
    "draw",
    "observed_samples",
    "shuffle",
]

MALLOWS = "mallows"
UNIFORM_CYCLE = "uniform_cycle"
THETA_FLOOR = 0.1
RANGE_FACTOR = 10.0


@dataclass(frozen=True)
class NoisyBatch:
    values: tuple[float, ...]
    arrival: Permutation
    timestamp: int

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.values)
        if len(values) != len(self.arrival):
            raise DataError(
                f"t={self.timestamp}: batch has {len(values)} values for {len(self.arrival)} contributors"
            )
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return len(self.values)

    def by_contributor(self) -> list[float]:
        """Values reindexed so entry ``i-1`` belongs to contributor ``i``."""
        return apply(self.arrival, self.values)


@dataclass(frozen=True)
class ShuffledBatch:
    values: tuple[float, ...]
    timestamp: int
    branch_used: str


@dataclass(frozen=True)
class ShufflePlan:
    """Outcome of the applicability test for one arrival permutation."""

    branch: str
    initial: Partition
    initial_sensitivity: int
    refined: Optional[Partition] = None
    refined_sensitivity: Optional[int] = None
    theta: Optional[float] = None


@dataclass(frozen=True)
class ShuffleDraw:
    """One realized shuffle.

    ``rearrangement`` is relative to contributor order: output slot ``j``
    holds contributor ``rearrangement(j)``'s value. ``observed`` is the same
    order expressed over arrival positions, i.e. ``apply(observed, arrival_values)``
    is the output.
    """

    plan: ShufflePlan
    rearrangement: Permutation
    observed: Permutation


def plan_shuffle(arrival: Permutation, k: int, graph: ContributorGraph, alpha: float) -> ShufflePlan:
    n = len(arrival)
    if n < 2:
        raise DegenerateInputError("shuffling needs at least 2 contributors")
    if graph.n != n:
        raise ConfigError(f"graph.n: {graph.n} does not match batch size {n}")
    if not alpha > 0:
        raise ConfigError(f"budget.alpha: must be > 0, got {alpha}")
    xi0 = initial_partition(graph, k)
    delta0 = sensitivity(arrival, xi0)
    if not alpha <= delta0 <= RANGE_FACTOR * alpha:
        return ShufflePlan(UNIFORM_CYCLE, xi0, delta0)
    if 1 < k < n:
        refined = refine_groups(arrival, k)
    else:
        # k == 1 leaves nothing to refine (k == n has zero sensitivity and never gets here)
        refined = xi0
    delta = sensitivity(arrival, refined)
    if delta == 0:
        return ShufflePlan(UNIFORM_CYCLE, xi0, delta0, refined, delta)
    theta = max(alpha / delta, THETA_FLOOR)
    return ShufflePlan(MALLOWS, xi0, delta0, refined, delta, theta)


def draw(plan: ShufflePlan, arrival: Permutation, rng: np.random.Generator) -> ShuffleDraw:
    if plan.branch == MALLOWS:
        tau = Permutation(tuple(sample_many(MallowsParams(arrival, plan.theta), 1, rng)[0]))
        sigma_star = compose(inverse(arrival), tau)
        return ShuffleDraw(plan, sigma_star, tau)
    observed = sattolo_shuffle(arrival, rng)
    return ShuffleDraw(plan, compose(inverse(arrival), observed), observed)


def shuffle(
    batch: NoisyBatch,
    k: int,
    graph: ContributorGraph,
    alpha: float,
    rng: np.random.Generator,
    plan: Optional[ShufflePlan] = None,
) -> ShuffledBatch:
    """Anonymize one timestamp's batch.

    ``plan`` may be passed to reuse an applicability test already computed
    for ``batch.arrival``.
    """
    if batch.n < 2:
        raise DegenerateInputError(f"t={batch.timestamp}: cannot anonymize a single contributor")
    if plan is None:
        plan = plan_shuffle(batch.arrival, k, graph, alpha)
    realized = draw(plan, batch.arrival, rng)
    values = apply(realized.rearrangement, batch.by_contributor())
    return ShuffledBatch(tuple(values), batch.timestamp, plan.branch)


def observed_samples(plan: ShufflePlan, arrival: Permutation, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` draws of the observed output order, one 1-based row each."""
    if plan.branch == MALLOWS:
        return sample_many(MallowsParams(arrival, plan.theta), size, rng)
    return np.array([sattolo_shuffle(arrival, rng).mapping for _ in range(size)])

