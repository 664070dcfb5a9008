"""Permutations in 1-based one-line notation.

A :class:`Permutation` of size ``n`` stores ``(sigma(1), ..., sigma(n))``.
Composition follows ``compose(sigma, tau)(i) == sigma(tau(i))`` everywhere in
the package.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Iterator, Mapping, Sequence

import numpy as np

from .errors import DegenerateInputError

__all__ = [
    "Permutation",
    "identity",
    "compose",
    "inverse",
    "kendall_tau",
    "kendall_tau_bruteforce",
    "count_inversions",
    "data_permutation",
    "data_permutation_from_order",
    "sattolo_shuffle",
    "apply",
    "cycle_lengths",
    "all_permutations",
]


@dataclass(frozen=True)
class Permutation:
    """Bijection on ``{1, ..., n}`` in one-line notation."""

    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        mapping = tuple(int(v) for v in self.mapping)
        n = len(mapping)
        if n < 1:
            raise ValueError("permutation size must be >= 1")
        if sorted(mapping) != list(range(1, n + 1)):
            raise ValueError(f"not a permutation of 1..{n}: {mapping}")
        object.__setattr__(self, "mapping", mapping)

    @classmethod
    def from_zero_based(cls, values: Sequence[int]) -> "Permutation":
        return cls(tuple(int(v) + 1 for v in values))

    @property
    def n(self) -> int:
        return len(self.mapping)

    def __len__(self) -> int:
        return len(self.mapping)

    def __iter__(self) -> Iterator[int]:
        return iter(self.mapping)

    def __call__(self, i: int) -> int:
        if not 1 <= i <= len(self.mapping):
            raise IndexError(f"index {i} outside 1..{len(self.mapping)}")
        return self.mapping[i - 1]

    def zero_based(self) -> list[int]:
        return [v - 1 for v in self.mapping]

    def to_list(self) -> list[int]:
        """1-based list, the serialized form used in JSON reports."""
        return list(self.mapping)


def _check_same_size(sigma: Permutation, tau: Permutation) -> None:
    if len(sigma) != len(tau):
        raise ValueError(f"size mismatch: {len(sigma)} != {len(tau)}")


def identity(n: int) -> Permutation:
    if n < 1:
        raise ValueError(f"invalid permutation size {n}")
    return Permutation(tuple(range(1, n + 1)))


def compose(sigma: Permutation, tau: Permutation) -> Permutation:
    """Return ``sigma o tau``, i.e. ``i -> sigma(tau(i))``."""
    _check_same_size(sigma, tau)
    s = sigma.mapping
    return Permutation(tuple(s[t - 1] for t in tau.mapping))


def inverse(sigma: Permutation) -> Permutation:
    out = [0] * len(sigma)
    for i, v in enumerate(sigma.mapping, start=1):
        out[v - 1] = i
    return Permutation(tuple(out))


def count_inversions(values: Sequence[int]) -> int:
    """Number of pairs ``i < j`` with ``values[i] > values[j]`` (merge sort)."""
    seq = list(values)
    if len(seq) < 2:
        return 0
    buf = seq[:]
    count = 0
    width = 1
    n = len(seq)
    # bottom-up merge sort; avoids recursion depth limits on long inputs
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if seq[i] <= seq[j]:
                    buf[k] = seq[i]
                    i += 1
                else:
                    buf[k] = seq[j]
                    count += mid - i
                    j += 1
                k += 1
            buf[k:hi] = seq[i:mid] + seq[j:hi]
        seq, buf = buf, seq
        width *= 2
    return count


def kendall_tau(sigma: Permutation, tau: Permutation) -> int:
    """Kendall-tau distance: pairs ``i < j`` ordered differently by the two.

    Computed as the inversion count of ``sigma o tau^-1`` in O(n log n).
    """
    _check_same_size(sigma, tau)
    return count_inversions(compose(sigma, inverse(tau)).mapping)


def kendall_tau_bruteforce(sigma: Sequence[int], tau: Sequence[int]) -> int:
    """Quadratic discordant-pair scan. Kept as a reference for tests."""
    s, t = list(sigma), list(tau)
    if len(s) != len(t):
        raise ValueError(f"size mismatch: {len(s)} != {len(t)}")
    n = len(s)
    return sum(
        1
        for i in range(n)
        for j in range(i + 1, n)
        if (s[i] - s[j]) * (t[i] - t[j]) < 0
    )


def data_permutation(arrival_index: Mapping[int, int]) -> Permutation:
    """Build ``(Idx(y_1), ..., Idx(y_n))`` from contributor -> arrival position."""
    n = len(arrival_index)
    if n < 1:
        raise ValueError("empty arrival map")
    if sorted(arrival_index) != list(range(1, n + 1)):
        raise ValueError(f"contributors must be exactly 1..{n}")
    positions = tuple(arrival_index[i] for i in range(1, n + 1))
    if sorted(positions) != list(range(1, n + 1)):
        raise ValueError(f"arrival positions are not a bijection on 1..{n}: {positions}")
    return Permutation(positions)


def data_permutation_from_order(order: Sequence[int]) -> Permutation:
    """Data permutation of an arrival sequence given as contributor ids.

    ``order=[4, 3, 1, 2]`` (y_4 arrived first) gives ``Idx(y_3) == 2``.
    """
    index: dict[int, int] = {}
    for pos, contributor in enumerate(order, start=1):
        if contributor in index:
            raise ValueError(f"contributor {contributor} arrived twice")
        index[int(contributor)] = pos
    return data_permutation(index)


def sattolo_shuffle(sigma: Permutation, rng: np.random.Generator) -> Permutation:
    """Swap position ``i`` with a uniform ``j`` in ``{i+1..n}`` for i = 1..n-1.

    The result equals ``compose(sigma, c)`` for a uniformly random n-cycle
    ``c``; each of the ``(n-1)!`` outcomes has probability ``1/(n-1)!``.
    """
    n = len(sigma)
    if n < 2:
        raise DegenerateInputError("cyclic shuffle needs at least 2 elements")
    out = list(sigma.mapping)
    for i in range(n - 1):
        j = int(rng.integers(i + 1, n))
        out[i], out[j] = out[j], out[i]
    return Permutation(tuple(out))


def apply(sigma: Permutation, sequence: Sequence[Any]) -> list[Any]:
    """Return ``(v_sigma(1), ..., v_sigma(n))``."""
    if len(sequence) != len(sigma):
        raise ValueError(f"length mismatch: sequence {len(sequence)} vs permutation {len(sigma)}")
    return [sequence[i - 1] for i in sigma.mapping]


def cycle_lengths(sigma: Permutation) -> list[int]:
    """Cycle type, longest first."""
    seen = [False] * len(sigma)
    lengths = []
    for start in range(len(sigma)):
        if seen[start]:
            continue
        length = 0
        i = start
        while not seen[i]:
            seen[i] = True
            i = sigma.mapping[i] - 1
            length += 1
        lengths.append(length)
    return sorted(lengths, reverse=True)


def all_permutations(n: int) -> Iterator[Permutation]:
    """Every permutation of size ``n`` in lexicographic order."""
    for p in itertools.permutations(range(1, n + 1)):
        yield Permutation(p)
