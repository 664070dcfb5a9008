"""Likelihood-linkage re-identification attack.

The attacker knows every contributor's past readings (``history``) and sees
published batches without identities. Published slot ``j`` is treated as one
pseudonym across all batches, which is exactly right when nothing reorders
the slots and worthless when every batch is freshly shuffled. Each
contributor gets a Gaussian or Laplace profile; slots are matched to
contributors one-to-one by minimizing the summed negative log-likelihood.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DataError
from .pipeline import _ATTACKER, EvaluationMetrics, RunConfig, stream
from .randomizer import randomize_array

__all__ = ["MIN_HISTORY", "Profiles", "fit_profiles", "cost_matrix", "assign", "linkage_attack", "sanitize_history"]

MIN_HISTORY = 10
_LOG2 = np.log(2.0)


class Profiles:
    """Per-contributor location/scale estimates, rows ordered by contributor id."""

    def __init__(self, ids: Sequence[int], loc: np.ndarray, scale: np.ndarray, kind: str):
        self.ids = list(ids)
        self.loc = loc
        self.scale = scale
        self.kind = kind

    def neg_loglik(self, values: np.ndarray) -> np.ndarray:
        """``(len(values), n_profiles)`` negative log-likelihoods."""
        gap = values[:, None] - self.loc[None, :]
        if self.kind == "gaussian":
            return 0.5 * (gap / self.scale) ** 2 + np.log(self.scale) + 0.5 * np.log(2 * np.pi)
        return np.abs(gap) / self.scale + np.log(self.scale) + _LOG2


def fit_profiles(history: Mapping[int, Sequence[float]], kind: str = "gaussian", floor: float = 1e-3) -> Profiles:
    if not history:
        raise DataError("attack history is empty")
    if kind not in ("gaussian", "laplace"):
        raise ValueError(f"unknown profile kind {kind!r}")
    ids = sorted(history)
    loc, scale = [], []
    for i in ids:
        h = np.asarray(history[i], dtype=float)
        if h.size < MIN_HISTORY:
            raise DataError(f"contributor {i}: history has {h.size} samples, need >= {MIN_HISTORY}")
        if kind == "gaussian":
            loc.append(h.mean())
            scale.append(h.std())
        else:
            med = np.median(h)
            loc.append(med)
            scale.append(np.abs(h - med).mean())
    scale = np.maximum(np.asarray(scale), floor)
    return Profiles(ids, np.asarray(loc), scale, kind)


def cost_matrix(profiles: Profiles, batches: np.ndarray) -> np.ndarray:
    """Summed negative log-likelihood of slot ``j`` (rows) under profile ``i`` (columns)."""
    total = np.zeros((batches.shape[1], len(profiles.ids)))
    for row in batches:
        total += profiles.neg_loglik(row)
    return total


def assign(cost: np.ndarray, method: str = "hungarian") -> np.ndarray:
    """One-to-one slot -> profile column assignment minimizing ``cost``."""
    if method == "hungarian":
        rows, cols = linear_sum_assignment(cost)
        out = np.empty(cost.shape[0], dtype=int)
        out[rows] = cols
        return out
    if method == "greedy":
        out = np.full(cost.shape[0], -1)
        taken = np.zeros(cost.shape[1], bool)
        for flat in np.argsort(cost, axis=None, kind="stable"):
            j, i = divmod(int(flat), cost.shape[1])
            if out[j] < 0 and not taken[i]:
                out[j] = i
                taken[i] = True
        return out
    raise ValueError(f"unknown assignment method {method!r}")


def linkage_attack(
    history: Mapping[int, Sequence[float]],
    shuffled_batches: Sequence,
    truth: Sequence[Sequence[int]],
    profile: str = "gaussian",
    method: str = "hungarian",
    per_batch: bool = False,
) -> EvaluationMetrics:
    """Re-identify published slots and score the guesses.

    ``shuffled_batches`` holds published batches (objects with ``values`` or
    plain sequences); ``truth[b][j]`` is the contributor behind slot ``j`` of
    batch ``b``. Precision and recall are macro-averaged over contributors.
    With ``per_batch`` each batch is matched on its own instead of pooling.
    """
    profiles = fit_profiles(history, profile)
    values = np.array([getattr(b, "values", b) for b in shuffled_batches], dtype=float)
    if values.ndim != 2 or values.shape[0] == 0:
        raise DataError("no published batches to attack")
    n = len(profiles.ids)
    if values.shape[1] != n:
        raise DataError(f"batches have {values.shape[1]} slots, history covers {n} contributors")
    truth = np.asarray(truth, dtype=int)
    if truth.shape != values.shape:
        raise DataError("truth must give one owner per published slot")

    ids = np.asarray(profiles.ids)
    if per_batch:
        guesses = np.array([ids[assign(cost_matrix(profiles, row[None, :]), method)] for row in values])
    else:
        guesses = np.tile(ids[assign(cost_matrix(profiles, values), method)], (values.shape[0], 1))

    precision, recall = [], []
    for i in ids:
        predicted = guesses == i
        actual = truth == i
        tp = np.sum(predicted & actual)
        fp = np.sum(predicted & ~actual)
        fn = np.sum(~predicted & actual)
        precision.append(tp / (tp + fp) if tp + fp else 0.0)
        recall.append(tp / (tp + fn) if tp + fn else 0.0)
    return EvaluationMetrics(precision=float(np.mean(precision)), recall=float(np.mean(recall)))


def sanitize_history(
    history: Mapping[int, Sequence[tuple[int, float]]], config: RunConfig, attacker_seed: int
) -> dict[int, list[float]]:
    """Push raw ``(t, value)`` history through the public randomizer.

    An attacker who knows the mechanism trains on data shaped like what it
    will see. Raw mode leaves values untouched.
    """
    out = {}
    for i, rows in history.items():
        if config.mode == "raw":
            out[i] = [v for _, v in rows]
            continue
        out[i] = [
            float(randomize_array(v, config.budget, config.range, config.precision, stream(attacker_seed, t, _ATTACKER, i)))
            for t, v in rows
        ]
    return out
