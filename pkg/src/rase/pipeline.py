"""End-to-end randomize, shuffle, estimate rounds and their utility metrics.

Randomness is split into substreams keyed by ``(seed, t, stage[, contributor])``
so a round's output does not depend on how rounds or contributors are
scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from .errors import ConfigError, DataError
from .estimator import DEFAULT_BOOTSTRAP_B, METHODS, EstimateReport, estimate
from .grouping import ContributorGraph
from .permutation import Permutation, apply, identity
from .randomizer import DataRange, PrecisionRequirement, PrivacyBudget, randomize_array
from .shuffler import ShuffledBatch, draw, plan_shuffle

__all__ = [
    "MODES",
    "ARRIVALS",
    "SensorReading",
    "RunConfig",
    "EvaluationMetrics",
    "RoundResult",
    "stream",
    "run_round",
    "run_rase",
    "window_query",
    "window_queries",
    "aae",
    "mse",
]

MODES = ("rase", "br", "raw")
ARRIVALS = ("random", "identity")

# stage tags for substream derivation
_CONTRIBUTOR, _SHUFFLER, _ESTIMATOR, _ARRIVAL, _ATTACKER = 1, 2, 3, 4, 5


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


@dataclass(frozen=True)
class SensorReading:
    contributor_id: int
    timestamp: int
    state: float


def _number(data: Mapping, key: str, path: str, default: Any = ...) -> float:
    if key not in data:
        if default is ...:
            raise ConfigError(f"{path}{key}: missing")
        return default
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}{key}: expected a number, got {value!r}")
    return float(value)


def _integer(data: Mapping, key: str, path: str = "", default: Any = ...) -> Optional[int]:
    if key not in data:
        if default is ...:
            raise ConfigError(f"{path}{key}: missing")
        return default
    value = data[key]
    if value is None and default is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}{key}: expected an integer, got {value!r}")
    return value


def _section(data: Mapping, key: str, default: Any = ...) -> Mapping:
    if key not in data:
        if default is ...:
            raise ConfigError(f"{key}: missing")
        return default
    if not isinstance(data[key], Mapping):
        raise ConfigError(f"{key}: expected an object")
    return data[key]


def _choice(data: Mapping, key: str, options: Sequence[str], default: str) -> str:
    value = data.get(key, default)
    if value not in options:
        raise ConfigError(f"{key}: expected one of {', '.join(options)}, got {value!r}")
    return value


@dataclass(frozen=True)
class RunConfig:
    n: int
    range: DataRange
    budget: PrivacyBudget
    k: int
    precision: PrecisionRequirement = PrecisionRequirement(0.5, 0.9)
    graph: Optional[ContributorGraph] = None
    estimator: str = "sample"
    bootstrap_b: int = DEFAULT_BOOTSTRAP_B
    seed: int = 0
    window_w: Optional[int] = None
    arrival: str = "random"
    mode: str = "rase"
    attack_history: int = 10
    attack_profile: str = "gaussian"
    attack_assignment: str = "hungarian"

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ConfigError(f"n: must be >= 2, got {self.n}")
        if not 1 <= self.k <= self.n:
            raise ConfigError(f"k: must satisfy 1 <= k <= n={self.n}, got {self.k}")
        graph = self.graph if self.graph is not None else ContributorGraph(self.n)
        if graph.n != self.n:
            raise ConfigError(f"graph.n: {graph.n} does not match n={self.n}")
        object.__setattr__(self, "graph", graph)
        if self.estimator not in METHODS:
            raise ConfigError(f"estimator: expected one of {', '.join(METHODS)}, got {self.estimator!r}")
        if self.bootstrap_b < 1:
            raise ConfigError(f"bootstrap_b: must be >= 1, got {self.bootstrap_b}")
        if self.seed < 0:
            raise ConfigError(f"seed: must be a non-negative integer, got {self.seed}")
        if self.window_w is not None and self.window_w < 1:
            raise ConfigError(f"window_w: must be >= 1, got {self.window_w}")
        if self.arrival not in ARRIVALS:
            raise ConfigError(f"arrival: expected one of {', '.join(ARRIVALS)}, got {self.arrival!r}")
        if self.mode not in MODES:
            raise ConfigError(f"mode: expected one of {', '.join(MODES)}, got {self.mode!r}")
        if self.attack_history < 10:
            raise ConfigError(f"attack_history: must be >= 10, got {self.attack_history}")
        if self.attack_profile not in ("gaussian", "laplace"):
            raise ConfigError(f"attack_profile: expected gaussian or laplace, got {self.attack_profile!r}")
        if self.attack_assignment not in ("hungarian", "greedy"):
            raise ConfigError(f"attack_assignment: expected hungarian or greedy, got {self.attack_assignment!r}")

    @classmethod
    def from_dict(cls, data: Mapping) -> "RunConfig":
        if not isinstance(data, Mapping):
            raise ConfigError("config: expected a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"{unknown[0]}: unknown configuration field")
        rng_ = _section(data, "range")
        budget = _section(data, "budget")
        precision = _section(data, "precision", {"beta": 0.5, "rho": 0.9})
        n = _integer(data, "n")
        graph = None
        if data.get("graph") is not None:
            graph = ContributorGraph.from_dict(_section(data, "graph"))
        return cls(
            n=n,
            range=DataRange(_number(rng_, "x_min", "range."), _number(rng_, "x_max", "range.")),
            budget=PrivacyBudget(_number(budget, "epsilon_s", "budget."), _number(budget, "alpha", "budget.")),
            k=_integer(data, "k"),
            precision=PrecisionRequirement(
                _number(precision, "beta", "precision."), _number(precision, "rho", "precision.")
            ),
            graph=graph,
            estimator=_choice(data, "estimator", METHODS, "sample"),
            bootstrap_b=_integer(data, "bootstrap_b", default=DEFAULT_BOOTSTRAP_B),
            seed=_integer(data, "seed", default=0),
            window_w=_integer(data, "window_w", default=None),
            arrival=_choice(data, "arrival", ARRIVALS, "random"),
            mode=_choice(data, "mode", MODES, "rase"),
            attack_history=_integer(data, "attack_history", default=10),
            attack_profile=_choice(data, "attack_profile", ("gaussian", "laplace"), "gaussian"),
            attack_assignment=_choice(data, "attack_assignment", ("hungarian", "greedy"), "hungarian"),
        )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "range": {"x_min": self.range.x_min, "x_max": self.range.x_max},
            "budget": {"epsilon_s": self.budget.epsilon_s, "alpha": self.budget.alpha},
            "k": self.k,
            "precision": {"beta": self.precision.beta, "rho": self.precision.rho},
            "graph": self.graph.to_dict(),
            "estimator": self.estimator,
            "bootstrap_b": self.bootstrap_b,
            "seed": self.seed,
            "window_w": self.window_w,
            "arrival": self.arrival,
            "mode": self.mode,
            "attack_history": self.attack_history,
            "attack_profile": self.attack_profile,
            "attack_assignment": self.attack_assignment,
        }


@dataclass(frozen=True)
class EvaluationMetrics:
    aae: Optional[float] = None
    mse: Optional[float] = None
    precision: Optional[float] = None
    recall: Optional[float] = None

    def __post_init__(self) -> None:
        if self.mse is not None and self.mse < 0:
            raise ValueError(f"mse must be >= 0, got {self.mse}")
        for name in ("precision", "recall"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")

    def to_dict(self) -> dict:
        return {"aae": self.aae, "mse": self.mse, "precision": self.precision, "recall": self.recall}


@dataclass(frozen=True)
class RoundResult:
    """Everything the simulator knows about one timestamp.

    ``published`` is what leaves the shuffler; ``slot_owner[j]`` is the
    contributor whose value sits in published slot ``j`` (harness only).
    """

    timestamp: int
    raw: tuple[float, ...]
    noisy: tuple[float, ...]
    published: ShuffledBatch
    slot_owner: tuple[int, ...]
    report: EstimateReport
    theta: Optional[float] = None
    metrics: EvaluationMetrics = field(default_factory=EvaluationMetrics)

    @property
    def true_mean(self) -> float:
        return math.fsum(self.raw) / len(self.raw)


def _batch_values(readings: Sequence[SensorReading], n: int) -> tuple[int, np.ndarray]:
    if not readings:
        raise DataError("empty batch")
    t = readings[0].timestamp
    values = np.full(n, np.nan)
    for r in readings:
        if r.timestamp != t:
            raise DataError(f"batch mixes timestamps {t} and {r.timestamp}")
        if not 1 <= r.contributor_id <= n:
            raise DataError(f"t={t}: contributor {r.contributor_id} outside 1..{n}")
        if not np.isnan(values[r.contributor_id - 1]):
            raise DataError(f"t={t}: duplicate reading for contributor {r.contributor_id}")
        values[r.contributor_id - 1] = r.state
    missing = [i + 1 for i in np.flatnonzero(np.isnan(values))]
    if missing:
        raise DataError(f"t={t}: missing readings for contributors {missing[:10]}")
    return t, values


def _randomize_all(x: np.ndarray, t: int, config: RunConfig, seed: int) -> np.ndarray:
    out = np.empty_like(x)
    for i, xi in enumerate(x):
        out[i] = randomize_array(
            xi, config.budget, config.range, config.precision, stream(seed, t, _CONTRIBUTOR, i + 1)
        )
    return out


def run_round(
    readings: Sequence[SensorReading], config: RunConfig, rng: Optional[np.random.Generator] = None
) -> RoundResult:
    """One timestamp through the configured mode.

    Substreams derive from ``config.seed`` unless ``rng`` is given, in which
    case a root seed is drawn from it first.
    """
    seed = config.seed if rng is None else int(rng.integers(2**63))
    n = config.n
    t, x = _batch_values(readings, n)
    try:
        if config.mode == "raw":
            if np.any((x < config.range.x_min) | (x > config.range.x_max)):
                bad = x[(x < config.range.x_min) | (x > config.range.x_max)][0]
                raise DataError(f"value {bad!r} outside data range [{config.range.x_min}, {config.range.x_max}]")
            y = x.copy()
        else:
            y = _randomize_all(x, t, config, seed)
    except DataError as exc:
        raise DataError(f"t={t}: {exc}") from exc

    theta = None
    if config.mode == "rase":
        if config.arrival == "random":
            arrival = Permutation.from_zero_based(stream(seed, t, _ARRIVAL).permutation(n))
        else:
            arrival = identity(n)
        plan = plan_shuffle(arrival, config.k, config.graph, config.budget.alpha)
        realized = draw(plan, arrival, stream(seed, t, _SHUFFLER))
        owners = realized.rearrangement.mapping
        published = ShuffledBatch(tuple(apply(realized.rearrangement, y.tolist())), t, plan.branch)
        theta = plan.theta
    else:
        owners = tuple(range(1, n + 1))
        published = ShuffledBatch(tuple(y.tolist()), t, "none")

    report = estimate(published.values, config.estimator, stream(seed, t, _ESTIMATOR), config.bootstrap_b)
    metrics = EvaluationMetrics(aae=aae(x, y), mse=mse(x, y))
    return RoundResult(t, tuple(x.tolist()), tuple(y.tolist()), published, owners, report, theta, metrics)


def run_rase(
    readings: Sequence[SensorReading], config: RunConfig, rng: Optional[np.random.Generator] = None
) -> tuple[ShuffledBatch, EstimateReport]:
    result = run_round(readings, config, rng)
    return result.published, result.report


def window_query(estimates: Mapping[int, float], t_q: int, w: int) -> float:
    """Average of the per-timestamp estimates over ``(t_q - w, t_q]``."""
    if w < 1:
        raise ValueError(f"window must be >= 1, got {w}")
    span = range(t_q - w + 1, t_q + 1)
    missing = [t for t in span if t not in estimates]
    if missing:
        raise DataError(f"window ending at t={t_q} lacks estimates for t={missing}")
    return math.fsum(estimates[t] for t in span) / w


def window_queries(estimates: Mapping[int, float], w: int) -> dict[int, float]:
    """``window_query`` at every ``t_q`` whose whole window is present."""
    out = {}
    for t_q in sorted(estimates):
        if all(t in estimates for t in range(t_q - w + 1, t_q + 1)):
            out[t_q] = window_query(estimates, t_q, w)
    return out


def _pair(x: Sequence[float], z: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != z.shape or x.ndim != 1:
        raise ValueError(f"length mismatch: {x.shape} vs {z.shape}")
    if x.size == 0:
        raise ValueError("empty input")
    return x, z


def aae(x: Sequence[float], z: Sequence[float]) -> float:
    """Signed mean gap ``mean(x_i - z_i)``."""
    x, z = _pair(x, z)
    return math.fsum(x - z) / x.size


def mse(x: Sequence[float], z: Sequence[float]) -> float:
    """Largest squared gap ``max (x_i - z_i)^2``."""
    x, z = _pair(x, z)
    return float(np.max((x - z) ** 2))
