import math
from collections import Counter

import numpy as np
import pytest

from rase.errors import ConfigError, DataError, DegenerateInputError
from rase.grouping import ContributorGraph
from rase.permutation import Permutation, all_permutations, compose, cycle_lengths, identity, inverse
from rase.shuffler import (
    MALLOWS,
    UNIFORM_CYCLE,
    NoisyBatch,
    draw,
    observed_samples,
    plan_shuffle,
    shuffle,
)

from stat_helpers import total_variation


def path_graph(n, breaks=()):
    return ContributorGraph(n, frozenset((i, i + 1) for i in range(1, n) if i not in breaks))


TRIANGLE_PLUS_ONE = ContributorGraph(4, frozenset({(1, 2), (2, 3), (1, 3)}))


class TestBatch:
    def test_length_mismatch(self):
        with pytest.raises(DataError):
            NoisyBatch((1.0, 2.0), identity(3), 1)

    def test_by_contributor(self):
        # contributor 1 arrived third, contributor 2 first, contributor 3 second
        batch = NoisyBatch((20.0, 30.0, 10.0), Permutation((3, 1, 2)), 1)
        assert batch.by_contributor() == [10.0, 20.0, 30.0]


class TestPlan:
    def test_single_contributor(self):
        with pytest.raises(DegenerateInputError):
            plan_shuffle(identity(1), 1, ContributorGraph(1), 1.0)

    def test_graph_size_mismatch(self):
        with pytest.raises(ConfigError):
            plan_shuffle(identity(4), 2, ContributorGraph(5), 1.0)

    def test_zero_sensitivity_falls_back(self):
        plan = plan_shuffle(identity(6), 6, ContributorGraph(6), 30.0)
        assert plan.initial_sensitivity == 0
        assert plan.branch == UNIFORM_CYCLE

    def test_range_engages_mallows(self):
        # a path over 1..18 and another over 19..24; identity arrival gives width 17
        graph = path_graph(24, breaks=(18,))
        plan = plan_shuffle(identity(24), 2, graph, 30.0)
        assert plan.initial_sensitivity == 153
        assert plan.branch == MALLOWS
        assert plan.refined_sensitivity == 66
        assert plan.theta == pytest.approx(30 / 66)
        assert 0.1 <= plan.theta <= 1.0

    @pytest.mark.parametrize("alpha,branch", [(10.5, UNIFORM_CYCLE), (10, MALLOWS), (1.0, MALLOWS), (0.99, UNIFORM_CYCLE)])
    def test_range_edges(self, alpha, branch):
        # initial groups {1..5}, {6}: sensitivity 10 on the identity
        graph = path_graph(6, breaks=(5,))
        plan = plan_shuffle(identity(6), 2, graph, alpha)
        assert plan.initial_sensitivity == 10
        assert plan.branch == branch

    def test_theta_formula(self):
        rng = np.random.default_rng(3)
        in_range = 0
        for _ in range(200):
            n = int(rng.integers(6, 30))
            arrival = Permutation.from_zero_based(rng.permutation(n))
            graph = path_graph(n, breaks=(n // 2,))
            k = int(rng.integers(2, n))
            base = plan_shuffle(arrival, k, graph, 1.0).initial_sensitivity
            if base == 0:
                continue
            alpha = base / float(rng.uniform(1, 10))
            plan = plan_shuffle(arrival, k, graph, alpha)
            assert plan.branch == (MALLOWS if plan.refined_sensitivity else UNIFORM_CYCLE)
            if plan.branch != MALLOWS:
                continue
            assert plan.theta == max(alpha / plan.refined_sensitivity, 0.1)
            if alpha <= plan.refined_sensitivity <= 10 * alpha:
                assert 0.1 <= plan.theta <= 1.0
                in_range += 1
        assert in_range > 5

    def test_deterministic(self):
        arrival = Permutation((3, 6, 1, 5, 2, 4, 8, 7))
        graph = path_graph(8)
        assert plan_shuffle(arrival, 3, graph, 2.0) == plan_shuffle(arrival, 3, graph, 2.0)


class TestShuffle:
    def test_multiset_preserved(self, rng):
        graph = path_graph(10, breaks=(7,))
        for alpha in (0.5, 3.0, 100.0):
            for _ in range(50):
                arrival = Permutation.from_zero_based(rng.permutation(10))
                values = tuple(rng.normal(size=10))
                out = shuffle(NoisyBatch(values, arrival, 4), 2, graph, alpha, rng)
                assert sorted(out.values) == sorted(values)
                assert out.timestamp == 4

    def test_output_matches_observed_order(self, rng):
        graph = path_graph(6, breaks=(5,))
        arrival = Permutation((2, 5, 1, 6, 3, 4))
        values = (10.0, 20.0, 30.0, 40.0, 50.0, 60.0)
        for alpha in (2.0, 100.0):
            plan = plan_shuffle(arrival, 2, graph, alpha)
            realized = draw(plan, arrival, np.random.default_rng(8))
            out = shuffle(NoisyBatch(values, arrival, 1), 2, graph, alpha, np.random.default_rng(8))
            assert list(out.values) == [values[j - 1] for j in realized.observed.mapping]
            assert realized.observed == compose(arrival, realized.rearrangement)

    def test_two_contributors(self, rng):
        counts = Counter()
        for _ in range(10_000):
            out = shuffle(NoisyBatch((1.0, 2.0), identity(2), 1), 2, ContributorGraph(2), 1.0, rng)
            counts[out.values] += 1
            assert out.branch_used == UNIFORM_CYCLE
        # the only 2-cycle swaps the pair every time
        assert counts == {(2.0, 1.0): 10_000}

    def test_single_contributor(self, rng):
        with pytest.raises(DegenerateInputError):
            shuffle(NoisyBatch((1.0,), identity(1), 1), 1, ContributorGraph(1), 1.0, rng)

    def test_fallback_rearrangement_is_uniform_cycle(self, rng):
        arrival = Permutation((3, 1, 4, 2))
        plan = plan_shuffle(arrival, 4, ContributorGraph(4), 1.0)
        assert plan.branch == UNIFORM_CYCLE
        counts = Counter()
        for _ in range(100_000):
            realized = draw(plan, arrival, rng)
            assert cycle_lengths(realized.rearrangement) == [4]
            counts[realized.rearrangement.mapping] += 1
        assert len(counts) == 6
        cycles = {p.mapping: 1 / 6 for p in all_permutations(4) if cycle_lengths(p) == [4]}
        assert total_variation(counts, cycles) < 0.01

    def test_seeded_runs_repeat(self):
        graph = path_graph(8, breaks=(4,))
        batch = NoisyBatch(tuple(range(8)), Permutation((8, 1, 7, 2, 6, 3, 5, 4)), 2)
        a = shuffle(batch, 2, graph, 3.0, np.random.default_rng(1))
        b = shuffle(batch, 2, graph, 3.0, np.random.default_rng(1))
        assert a == b


@pytest.mark.slow
def test_neighboring_arrivals_ratio():
    alpha = 1.0
    sigma = identity(4)
    sigma_prime = Permutation((2, 1, 3, 4))  # 1 and 2 trade places inside group {1, 2, 3}
    plans = [plan_shuffle(s, 2, TRIANGLE_PLUS_ONE, alpha) for s in (sigma, sigma_prime)]
    assert [p.branch for p in plans] == [MALLOWS, MALLOWS]
    runs = 1_000_000
    counts = [
        Counter(map(tuple, observed_samples(p, s, runs, np.random.default_rng(seed)).tolist()))
        for p, s, seed in zip(plans, (sigma, sigma_prime), (11, 12))
    ]
    worst = 0.0
    for key in set(counts[0]) | set(counts[1]):
        a, b = counts[0].get(key, 0), counts[1].get(key, 0)
        if a and b:
            worst = max(worst, a / b, b / a)
    assert worst <= math.exp(alpha) * 1.1
