"""Whole-trace runs, attack evaluation and parameter sweeps.

This is the simulator's omniscient side: it sees raw values and slot owners
so it can score utility and re-identification. Nothing here feeds back into
what the shuffler publishes.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Mapping, Optional, Sequence

import numpy as np

from .attack import linkage_attack, sanitize_history
from .errors import ConfigError, DataError
from .grouping import ContributorGraph
from .pipeline import EvaluationMetrics, RoundResult, RunConfig, SensorReading, run_round, window_queries
from .randomizer import PrivacyBudget

__all__ = ["SWEEP_PARAMS", "run_trace", "attack_published", "attack_rounds", "restrict", "with_param", "sweep"]

SWEEP_PARAMS = ("epsilon_s", "alpha", "k", "n")
Batches = Mapping[int, Sequence[SensorReading]]


def attack_published(
    batches: Batches, published: Sequence[tuple[int, Sequence[float], Sequence[int]]], config: RunConfig
) -> Optional[EvaluationMetrics]:
    """Attack ``(t, values, slot_owner)`` batches after the first ``attack_history`` timestamps.

    The attacker trains on the trace's earliest timestamps, passed through the
    public randomizer with its own randomness. Returns ``None`` when there is
    too little history or no batch is left to attack.
    """
    train = sorted(batches)[: config.attack_history]
    trained = set(train)
    targets = [p for p in published if p[0] not in trained]
    if len(train) < config.attack_history or not targets:
        return None
    raw = {i: [] for i in range(1, config.n + 1)}
    for t in train:
        for reading in batches[t]:
            raw[reading.contributor_id].append((t, reading.state))
    history = sanitize_history(raw, config, config.seed)
    return linkage_attack(
        history,
        [values for _, values, _ in targets],
        [owners for _, _, owners in targets],
        profile=config.attack_profile,
        method=config.attack_assignment,
    )


def attack_rounds(batches: Batches, rounds: Sequence[RoundResult], config: RunConfig) -> Optional[EvaluationMetrics]:
    return attack_published(
        batches, [(r.timestamp, r.published.values, r.slot_owner) for r in rounds], config
    )


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def run_trace(batches: Batches, config: RunConfig, rejected: Optional[Mapping[int, str]] = None) -> dict:
    """Run every complete batch and assemble the JSON-ready report."""
    if not batches:
        raise DataError("trace has no complete timestamps")
    rounds = [run_round(batches[t], config) for t in sorted(batches)]
    rows = []
    for r in rounds:
        rows.append(
            {
                "t": r.timestamp,
                "estimate": r.report.estimate,
                "true_mean": r.true_mean,
                "estimate_error": r.report.estimate - r.true_mean,
                "branch_used": r.published.branch_used,
                "theta": r.theta,
                "aae": r.metrics.aae,
                "mse": r.metrics.mse,
                "values": list(r.published.values),
                "slot_owner": list(r.slot_owner),
            }
        )
    linkage = attack_rounds(batches, rounds, config)
    metrics = EvaluationMetrics(
        aae=_mean([r.metrics.aae for r in rounds]),
        mse=_mean([r.metrics.mse for r in rounds]),
        precision=None if linkage is None else linkage.precision,
        recall=None if linkage is None else linkage.recall,
    )
    report = {
        "config": config.to_dict(),
        "seed": config.seed,
        "timestamps": rows,
        "metrics": metrics.to_dict() | {"mean_abs_aae": _mean([abs(r.metrics.aae) for r in rounds])},
        "rejected": [{"t": t, "reason": why} for t, why in sorted((rejected or {}).items())],
    }
    if config.window_w is not None:
        estimates = {r.timestamp: r.report.estimate for r in rounds}
        report["windows"] = [
            {"t_q": t_q, "w": config.window_w, "value": v}
            for t_q, v in window_queries(estimates, config.window_w).items()
        ]
    return report


def restrict(batches: Batches, n: int) -> dict[int, list[SensorReading]]:
    """Keep contributors ``1..n`` of every batch."""
    return {t: [r for r in rs if r.contributor_id <= n] for t, rs in batches.items()}


def with_param(config: RunConfig, param: str, value: float) -> RunConfig:
    if param == "epsilon_s":
        return dataclasses.replace(config, budget=PrivacyBudget(float(value), config.budget.alpha))
    if param == "alpha":
        return dataclasses.replace(config, budget=PrivacyBudget(config.budget.epsilon_s, float(value)))
    if param in ("k", "n"):
        if float(value) != int(value):
            raise ConfigError(f"{param}: sweep values must be integers, got {value}")
        value = int(value)
        if param == "k":
            return dataclasses.replace(config, k=value)
        edges = frozenset(e for e in config.graph.edges if max(e) <= value)
        return dataclasses.replace(config, n=value, k=min(config.k, value), graph=ContributorGraph(value, edges))
    raise ConfigError(f"param: expected one of {', '.join(SWEEP_PARAMS)}, got {param!r}")


def sweep(
    batches: Batches, config: RunConfig, param: str, values: Sequence[float], trials: int = 10
) -> list[dict]:
    """Average run-level metrics over ``trials`` seeds (``seed + trial``) per value."""
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"param: expected one of {', '.join(SWEEP_PARAMS)}, got {param!r}")
    if trials < 1:
        raise ConfigError(f"trials: must be >= 1, got {trials}")
    out = []
    for value in values:
        point = with_param(config, param, value)
        data = restrict(batches, point.n) if param == "n" else batches
        if param == "n" and point.n > config.n:
            raise ConfigError(f"n: sweep value {point.n} exceeds the trace's {config.n} devices")
        collected = {"aae": [], "mse": [], "precision": [], "recall": []}
        for trial in range(trials):
            metrics = run_trace(data, dataclasses.replace(point, seed=config.seed + trial))["metrics"]
            for key in collected:
                if metrics[key] is not None:
                    collected[key].append(metrics[key])
        row = {"param_value": value}
        for key, vals in collected.items():
            row[key] = float(np.mean(vals)) if vals else None
        out.append(row)
    return out
