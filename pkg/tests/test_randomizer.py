import math

import numpy as np
import pytest

from rase.errors import ConfigError, DataError
from rase.randomizer import (
    DataRange,
    PrecisionRequirement,
    PrivacyBudget,
    clamped_boundary_mass,
    laplace_noise,
    min_budget,
    randomize,
    randomize_array,
    sample_laplace,
)

REFIT = DataRange(3.9, 178.3)
DEFAULT_PRECISION = PrecisionRequirement(beta=0.5, rho=0.9)


class TestTypes:
    def test_range_delta(self):
        assert DataRange(0.0, 2.5).delta == 2.5

    @pytest.mark.parametrize("lo,hi", [(1.0, 1.0), (2.0, 1.0), (0.0, math.inf)])
    def test_bad_range(self, lo, hi):
        with pytest.raises(ConfigError):
            DataRange(lo, hi)

    @pytest.mark.parametrize("beta,rho", [(-0.1, 0.5), (1.1, 0.5), (0.5, 1.0), (0.5, -0.2)])
    def test_bad_precision(self, beta, rho):
        with pytest.raises(ConfigError):
            PrecisionRequirement(beta, rho)

    @pytest.mark.parametrize("eps,alpha", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (math.nan, 1.0)])
    def test_bad_budget(self, eps, alpha):
        with pytest.raises(ConfigError):
            PrivacyBudget(eps, alpha)


class TestMinBudget:
    def test_unit_range(self):
        got = min_budget(DataRange(0.0, 1.0), PrecisionRequirement(0.5, 0.9))
        assert got == pytest.approx(-math.log(0.1) / 0.5, rel=1e-12)
        assert got == pytest.approx(4.60517, abs=1e-5)

    def test_zero_confidence(self):
        assert min_budget(DataRange(0.0, 1.0), PrecisionRequirement(0.5, 0.0)) == 0.0

    def test_refit_training_range(self):
        # 174.4 * ln(10) / (0.5 * 178.3)
        assert min_budget(REFIT, DEFAULT_PRECISION) == pytest.approx(4.504440, abs=1e-6)

    def test_undefined_bounds(self):
        with pytest.raises(ConfigError):
            min_budget(DataRange(0.0, 1.0), PrecisionRequirement(0.0, 0.9))
        with pytest.raises(ConfigError):
            min_budget(DataRange(-2.0, 0.0), PrecisionRequirement(0.5, 0.9))


class TestLaplace:
    def test_rejects_bad_scale(self, rng):
        with pytest.raises(ValueError):
            sample_laplace(0.0, rng)

    @pytest.mark.slow
    def test_moments(self, rng):
        draws = laplace_noise(1.0, rng, 1_000_000)
        assert abs(draws.mean()) < 0.01
        assert abs((draws <= 0).mean() - 0.5) < 0.005
        draws2 = laplace_noise(2.0, rng, 1_000_000)
        assert abs(np.abs(draws2).mean() - 2.0) < 0.02

    def test_tail_matches_cdf(self, rng):
        draws = laplace_noise(1.5, rng, 200_000)
        for t in (0.5, 1.5, 4.0):
            expected = math.exp(-t / 1.5)  # Pr[|eta| > t]
            se = math.sqrt(expected * (1 - expected) / draws.size)
            assert abs((np.abs(draws) > t).mean() - expected) < 4 * se

    def test_scalar_matches_vector_stream(self):
        a = np.random.default_rng(7)
        b = np.random.default_rng(7)
        assert sample_laplace(3.0, a) == float(laplace_noise(3.0, b))


class TestRandomize:
    unit = DataRange(0.0, 1.0)

    def test_rejects_out_of_range(self, rng):
        with pytest.raises(DataError):
            randomize(1.5, PrivacyBudget(1.0, 1.0), self.unit, DEFAULT_PRECISION, rng)
        with pytest.raises(DataError):
            randomize_array([0.2, math.nan], PrivacyBudget(1.0, 1.0), self.unit, DEFAULT_PRECISION, rng)

    @pytest.mark.slow
    def test_clamped_below_bound(self, rng):
        budget = PrivacyBudget(1.0, 1.0)  # bound is 4.6
        y = randomize_array(np.full(100_000, 0.3), budget, self.unit, DEFAULT_PRECISION, rng)
        assert y.min() >= 0.0 and y.max() <= 1.0
        assert (y == 0.0).any() and (y == 1.0).any()

    def test_unclamped_at_or_above_bound(self, rng):
        eps = min_budget(self.unit, DEFAULT_PRECISION)
        y = randomize_array(np.full(50_000, 1.0), PrivacyBudget(eps, 1.0), self.unit, DEFAULT_PRECISION, rng)
        assert (y > 1.0).any()  # returned unmodified, not clamped

    @pytest.mark.slow
    def test_precision_above_bound(self, rng):
        x = 1.0
        budget = PrivacyBudget(6.0, 1.0)
        y = randomize_array(np.full(100_000, x), budget, self.unit, DEFAULT_PRECISION, rng)
        inside = ((y >= 0.5 * x) & (y <= 1.5 * x)).mean()
        assert inside >= 0.9

    def test_vanishing_noise(self, rng):
        y = randomize_array(np.full(10_000, 0.42), PrivacyBudget(1e6, 1.0), self.unit, DEFAULT_PRECISION, rng)
        assert np.all(np.abs(y - 0.42) <= 1e-3 * self.unit.delta)

    def test_deterministic(self):
        args = (0.7, PrivacyBudget(2.0, 1.0), self.unit, DEFAULT_PRECISION)
        assert randomize(*args, np.random.default_rng(3)) == randomize(*args, np.random.default_rng(3))

    @pytest.mark.slow
    def test_boundary_masses(self, rng):
        budget = PrivacyBudget(1.5, 1.0)
        x = 0.35
        draws = 400_000
        y = randomize_array(np.full(draws, x), budget, self.unit, DEFAULT_PRECISION, rng)
        low, high = clamped_boundary_mass(x, budget, self.unit)
        for observed, p in (((y == 0.0).mean(), low), ((y == 1.0).mean(), high)):
            se = math.sqrt(p * (1 - p) / draws)
            assert abs(observed - p) < 3 * se

    def test_boundary_mass_formula(self):
        low, high = clamped_boundary_mass(0.0, PrivacyBudget(2.0, 1.0), self.unit)
        assert low == 0.5
        assert high == pytest.approx(0.5 * math.exp(-2.0))
