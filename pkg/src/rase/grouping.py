"""Contributor groups and the Kendall-tau sensitivity they induce.

Groups are sets of contributor ids. Under a data permutation ``sigma``
(contributor -> arrival position) a group's width is the spread of the
positions its members occupy, and the shuffler's sensitivity is
``w (w + 1) / 2`` for the widest group.
"""

from __future__ import annotations

import functools
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError
from .permutation import Permutation

__all__ = [
    "ContributorGraph",
    "Partition",
    "connected_components",
    "initial_partition",
    "group_width",
    "global_width",
    "sensitivity",
    "width_to_sensitivity",
    "agglomerate",
    "refine_groups",
]


@dataclass(frozen=True)
class ContributorGraph:
    n: int
    edges: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ConfigError(f"graph.n: must be >= 1, got {self.n}")
        normalized = set()
        for edge in self.edges:
            i, j = (int(v) for v in edge)
            if i == j:
                raise ConfigError(f"graph.edges: self-loop on {i}")
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise ConfigError(f"graph.edges: edge ({i}, {j}) outside 1..{self.n}")
            normalized.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(normalized))

    @classmethod
    def from_dict(cls, data: Mapping) -> "ContributorGraph":
        try:
            n = int(data["n"])
            raw = data.get("edges", [])
            edges = []
            for e in raw:
                if len(e) != 2:
                    raise ConfigError(f"graph.edges: expected pairs, got {e!r}")
                edges.append((int(e[0]), int(e[1])))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"graph: malformed edge list ({exc})") from exc
        if len(set((min(a, b), max(a, b)) for a, b in edges)) != len(edges):
            raise ConfigError("graph.edges: duplicate edge")
        return cls(n, frozenset(edges))

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in sorted(self.edges)]}

    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {i: [] for i in range(1, self.n + 1)}
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        for nbrs in adj.values():
            nbrs.sort()
        return adj


@dataclass(frozen=True)
class Partition:
    """``k`` disjoint, nonempty groups covering ``1..n``, stored sorted."""

    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        groups = tuple(sorted(tuple(sorted(int(v) for v in g)) for g in self.groups))
        if not groups or any(len(g) == 0 for g in groups):
            raise ValueError("partition groups must be nonempty")
        members = [v for g in groups for v in g]
        n = len(members)
        if sorted(members) != list(range(1, n + 1)):
            raise ValueError("groups must be disjoint and cover 1..n")
        object.__setattr__(self, "groups", groups)

    @classmethod
    def of(cls, groups: Iterable[Iterable[int]]) -> "Partition":
        return cls(tuple(tuple(g) for g in groups))

    @property
    def n(self) -> int:
        return sum(len(g) for g in self.groups)

    @property
    def k(self) -> int:
        return len(self.groups)

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(g) for g in self.groups)

    def to_list(self) -> list[list[int]]:
        return [list(g) for g in self.groups]


def connected_components(graph: ContributorGraph) -> list[list[int]]:
    adj = graph.adjacency()
    seen: set[int] = set()
    comps = []
    for start in range(1, graph.n + 1):
        if start in seen:
            continue
        seen.add(start)
        comp = []
        queue = deque([start])
        while queue:
            v = queue.popleft()
            comp.append(v)
            for u in adj[v]:
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
        comps.append(sorted(comp))
    return comps


def _index_gap(a: Sequence[int], b: Sequence[int]) -> int:
    # both sorted; two-pointer sweep for min |x - y|
    i = j = 0
    best = abs(a[0] - b[0])
    while i < len(a) and j < len(b):
        best = min(best, abs(a[i] - b[j]))
        if a[i] < b[j]:
            i += 1
        else:
            j += 1
    return best


def _bfs_split(members: list[int], adj: dict[int, list[int]]) -> tuple[list[int], list[int]]:
    member_set = set(members)
    order: list[int] = []
    seen: set[int] = set()
    for start in members:
        if start in seen:
            continue
        seen.add(start)
        queue = deque([start])
        while queue:
            v = queue.popleft()
            order.append(v)
            for u in adj[v]:
                if u in member_set and u not in seen:
                    seen.add(u)
                    queue.append(u)
    half = (len(order) + 1) // 2
    return sorted(order[:half]), sorted(order[half:])


@functools.lru_cache(maxsize=256)
def initial_partition(graph: ContributorGraph, k: int) -> Partition:
    """Cluster contributors by graph connectivity into exactly ``k`` groups.

    Starts from connected components. Too many components: repeatedly merge the
    pair with the smallest id gap (ties: smaller merged size, then lowest ids).
    Too few: split the largest group in breadth-first order from its lowest id.
    """
    if not 1 <= k <= graph.n:
        raise ConfigError(f"k: must satisfy 1 <= k <= n={graph.n}, got {k}")
    groups = connected_components(graph)
    while len(groups) > k:
        best = None
        for a in range(len(groups)):
            for b in range(a + 1, len(groups)):
                key = (
                    _index_gap(groups[a], groups[b]),
                    len(groups[a]) + len(groups[b]),
                    min(groups[a][0], groups[b][0]),
                    max(groups[a][0], groups[b][0]),
                )
                if best is None or key < best[0]:
                    best = (key, a, b)
        _, a, b = best
        merged = sorted(groups[a] + groups[b])
        groups = [g for i, g in enumerate(groups) if i not in (a, b)] + [merged]
    if len(groups) < k:
        adj = graph.adjacency()
        while len(groups) < k:
            largest = max(range(len(groups)), key=lambda i: (len(groups[i]), -groups[i][0]))
            left, right = _bfs_split(groups.pop(largest), adj)
            groups.extend([left, right])
    return Partition.of(groups)


def group_width(sigma: Permutation, group: Iterable[int]) -> int:
    """Largest gap between arrival positions of two members of ``group``."""
    positions = [sigma(i) for i in group]
    if not positions:
        raise ValueError("group must be nonempty")
    return max(positions) - min(positions)


def global_width(sigma: Permutation, partition: Partition) -> int:
    if partition.n != len(sigma):
        raise ValueError(f"partition covers {partition.n} contributors, permutation has {len(sigma)}")
    return max(group_width(sigma, g) for g in partition.groups)


def width_to_sensitivity(width: int) -> int:
    return width * (width + 1) // 2


def sensitivity(sigma0: Permutation, partition: Partition) -> int:
    """Kendall-tau sensitivity ``w (w + 1) / 2`` of the widest group."""
    return width_to_sensitivity(global_width(sigma0, partition))


class _Groups:
    """Mutable group state in position space used by the agglomerative pass."""

    def __init__(self, sigma: Permutation, groups: Sequence[Sequence[int]]):
        self.sigma = sigma
        self.members = [sorted(g) for g in groups]

    def arrays(self):
        lo = np.array([min(self.sigma(i) for i in g) for g in self.members])
        hi = np.array([max(self.sigma(i) for i in g) for g in self.members])
        size = np.array([len(g) for g in self.members])
        first = np.array([g[0] for g in self.members])
        return lo, hi, size, first


def _best_merge(state: _Groups) -> tuple[int, int, int]:
    lo, hi, size, first = state.arrays()
    m = len(lo)
    width = hi - lo
    a, b = np.triu_indices(m, 1)
    merged_width = np.maximum(hi[a], hi[b]) - np.minimum(lo[a], lo[b])
    # widest group not involved in the merge: scan the top three widths
    order = np.argsort(-width, kind="stable")[:3]
    others = np.full(a.shape, -1)
    settled = np.zeros(a.shape, bool)
    for idx in order:
        free = ~settled & (a != idx) & (b != idx)
        others[free] = width[idx]
        settled |= free
    resulting = np.maximum(merged_width, others)
    keys = (
        np.maximum(first[a], first[b]),
        np.minimum(first[a], first[b]),
        size[a] + size[b],
        merged_width,
        resulting,
    )
    pick = np.lexsort(keys)[0]
    return int(a[pick]), int(b[pick]), int(resulting[pick])


def agglomerate(sigma: Permutation, k: int) -> Partition:
    """Greedy agglomeration from singletons down to ``k`` groups.

    Each step merges the pair yielding the smallest global width; ties go to
    the smaller merged width, then smaller merged size, then lowest member ids.
    """
    n = len(sigma)
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= n={n}, got {k}")
    state = _Groups(sigma, [[i] for i in range(1, n + 1)])
    while len(state.members) > k:
        a, b, _ = _best_merge(state)
        merged = sorted(state.members[a] + state.members[b])
        state.members = [g for i, g in enumerate(state.members) if i not in (a, b)] + [merged]
    return Partition.of(state.members)


def _score(widths: Sequence[int]) -> tuple[int, int, int]:
    top = max(widths)
    return top, widths.count(top), sum(widths)


def _relocate(sigma: Permutation, groups: list[list[int]], max_sideways: int | None = None) -> list[list[int]]:
    """Steepest-descent moves of single boundary members between groups.

    A move takes the lowest- or highest-positioned member of a group into
    another group. Equal-score moves into unvisited partitions are allowed up
    to ``max_sideways`` times (default ``n``) to cross plateaus.
    """
    n = len(sigma)
    if max_sideways is None:
        max_sideways = n
    # work on sorted arrival positions; widths only depend on positions
    pos = [sorted(sigma(i) for i in g) for g in groups]
    widths = [p[-1] - p[0] for p in pos]
    score = _score(widths)
    visited = {frozenset(tuple(p) for p in pos)}
    sideways = 0
    while True:
        best = None
        for src, ps in enumerate(pos):
            if len(ps) < 2:
                continue
            for end, rest_w in ((0, ps[-1] - ps[1]), (-1, ps[-2] - ps[0])):
                moving = ps[end]
                for dst, pd in enumerate(pos):
                    if dst == src:
                        continue
                    trial = list(widths)
                    trial[src] = rest_w
                    trial[dst] = max(pd[-1], moving) - min(pd[0], moving)
                    trial_score = _score(trial)
                    if trial_score > score or (best is not None and trial_score >= best[0]):
                        continue
                    moved = [list(p) for p in pos]
                    moved[src].remove(moving)
                    moved[dst] = sorted(moved[dst] + [moving])
                    key = frozenset(tuple(p) for p in moved)
                    if key in visited:
                        continue
                    best = (trial_score, moved, trial, key)
        if best is None:
            break
        if best[0] == score:
            if sideways >= max_sideways:
                break
            sideways += 1
        score, pos, widths = best[0], best[1], best[2]
        visited.add(best[3])
    at = {sigma(i): i for i in range(1, n + 1)}
    return [sorted(at[p] for p in ps) for ps in pos]


def refine_groups(sigma: Permutation, k: int, polish: bool = True) -> Partition:
    """Heuristic grouping that keeps each group's arrival positions tight.

    Agglomerates singletons into ``k`` groups, then (``polish=True``) moves
    boundary members between groups while the global width, the count of
    groups at that width, or the total width goes down.
    """
    n = len(sigma)
    if not 1 < k < n:
        raise ValueError(f"k must satisfy 1 < k < n={n}, got {k}")
    partition = agglomerate(sigma, k)
    if not polish:
        return partition
    return Partition.of(_relocate(sigma, partition.to_list()))
