"""Load-trace CSV files (``timestamp,device_id,value``) and a synthetic generator."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from .errors import DataError
from .pipeline import SensorReading
from .randomizer import DataRange

__all__ = ["HEADER", "REFIT_RANGE", "IngestResult", "synth", "write_trace", "read_rows", "ingest"]

HEADER = ("timestamp", "device_id", "value")
REFIT_RANGE = DataRange(3.9, 178.3)

Row = tuple[int, int, float]
PathLike = Union[str, Path]


@dataclass
class IngestResult:
    batches: dict[int, list[SensorReading]]
    rejected: dict[int, str] = field(default_factory=dict)


def synth(n: int, t_count: int, data_range: DataRange = REFIT_RANGE, seed: int = 0) -> list[Row]:
    """REFIT-like load trace: per-device base level, periodic swing and jitter.

    Base levels skew toward the low end of the range like household loads.
    Values are clipped into range and rounded to three decimals.
    """
    if n < 1 or t_count < 1:
        raise ValueError("n and t_count must be positive")
    rng = np.random.default_rng(seed)
    lo, delta = data_range.x_min, data_range.delta
    base = lo + delta * rng.beta(2.0, 5.0, size=n)
    amp = delta * rng.uniform(0.02, 0.08, size=n)
    period = rng.uniform(12.0, 48.0, size=n)
    phase = rng.uniform(0.0, 2 * math.pi, size=n)
    jitter = delta * rng.uniform(0.005, 0.03, size=n)
    t = np.arange(1, t_count + 1)[:, None]
    values = base + amp * np.sin(2 * math.pi * t / period + phase)
    values = values + rng.uniform(-1.0, 1.0, size=(t_count, n)) * jitter
    values = np.round(np.clip(values, data_range.x_min, data_range.x_max), 3)
    return [(ti, i + 1, float(values[ti - 1, i])) for ti in range(1, t_count + 1) for i in range(n)]


def write_trace(path: PathLike, rows: Iterable[Row]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HEADER)
        for t, i, v in rows:
            writer.writerow((t, i, repr(float(v))))


def read_rows(path: PathLike) -> list[tuple[int, Row]]:
    """Parse a trace into ``(line_number, row)`` pairs."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"{path}: cannot open ({exc.strerror})") from exc
    out = []
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header) != HEADER:
                raise DataError(f"{path}:1: expected header {','.join(HEADER)}")
            for row in reader:
                line = reader.line_num
                if not row:
                    continue
                if len(row) != 3:
                    raise DataError(f"{path}:{line}: expected 3 fields, got {len(row)}")
                try:
                    t, i, v = int(row[0]), int(row[1]), float(row[2])
                except ValueError as exc:
                    raise DataError(f"{path}:{line}: cannot parse row {row!r}") from exc
                if not math.isfinite(v):
                    raise DataError(f"{path}:{line}: value {row[2]!r} is not finite")
                out.append((line, (t, i, v)))
        except UnicodeDecodeError as exc:
            raise DataError(f"{path}: not valid UTF-8") from exc
    return out


def ingest(path: PathLike, expected_n: int, data_range: Optional[DataRange] = None) -> IngestResult:
    """Group trace rows into per-timestamp batches of ``expected_n`` readings.

    Timestamps missing devices are rejected with a diagnostic rather than
    imputed. Malformed rows, unknown device ids, duplicates and out-of-range
    values raise :class:`DataError` naming the line.
    """
    grouped: dict[int, dict[int, SensorReading]] = {}
    for line, (t, i, v) in read_rows(path):
        if not 1 <= i <= expected_n:
            raise DataError(f"{path}:{line}: device_id {i} outside 1..{expected_n}")
        if data_range is not None and not data_range.contains(v):
            raise DataError(
                f"{path}:{line}: value {v} outside data range [{data_range.x_min}, {data_range.x_max}]"
            )
        batch = grouped.setdefault(t, {})
        if i in batch:
            raise DataError(f"{path}:{line}: duplicate reading for device {i} at t={t}")
        batch[i] = SensorReading(i, t, v)
    result = IngestResult({})
    for t in sorted(grouped):
        batch = grouped[t]
        if len(batch) != expected_n:
            missing = sorted(set(range(1, expected_n + 1)) - set(batch))
            result.rejected[t] = f"t={t}: {len(batch)} of {expected_n} devices reported; missing {missing[:10]}"
            continue
        result.batches[t] = [batch[i] for i in sorted(batch)]
    return result
