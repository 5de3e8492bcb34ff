"""
Tests for the scenario specs and data generators.
"""

import numpy as np
import pytest
from pydantic import ValidationError

from src.simgen.generators import (
    TTCM_COVARIATES,
    friedman1_means,
    friedman2_latent_means,
    generate,
    ttcm_effects,
    ttcm_estimands,
    ttcm_propensity,
)
from src.simgen.scenarios import ScenarioSpec
from src.utility_modules.enums import OutcomeMode, ScenarioId

class TestScenarioSpec:
    """Test cases for ScenarioSpec validation and presets."""

    def test_friedman1_presets(self):
        """Test the preset covariances for d=2 and d=3."""
        np.testing.assert_allclose(ScenarioSpec(d=2).covariance(), [[1.0, 7.5], [7.5, 100.0]])
        sigma = ScenarioSpec(d=3).covariance()
        assert sigma[2, 2] == pytest.approx(25.0)
        assert sigma[0, 1] == pytest.approx(0.8 * 2.5)

    def test_ttcm_covariance(self):
        """Test the cost and effect noise covariance from rho."""
        sigma = ScenarioSpec(scenario=ScenarioId.TTCM_LIKE, rho=-0.5).covariance()
        np.testing.assert_allclose(sigma, [[250000.0, -12.5], [-12.5, 0.0025]])

    @pytest.mark.parametrize("fields", [
        {"d": 4},
        {"scenario": ScenarioId.TTCM_LIKE, "d": 3},
        {"scenario": ScenarioId.FRIEDMAN2, "sds": [2.0, 1.0]},
        {"rho": 1.0},
        {"n_train": 1},
        {"correlations": [[1.0, 1.2], [1.2, 1.0]]},
    ])
    def test_invalid_specs(self, fields):
        """Test that out-of-domain settings are rejected."""
        with pytest.raises(ValidationError):
            ScenarioSpec(**fields)

    def test_replicate_streams_differ(self):
        """Test that replicates get different generators and the same spec otherwise."""
        spec = ScenarioSpec(seed=3)
        other = spec.for_replicate(1)
        assert other.seed == 3 and other.replicate == 1
        assert spec.rng().uniform() != other.rng().uniform()

class TestFriedman:
    """Test cases for the Friedman mean functions and generators."""

    def test_friedman1_values(self):
        """Test the three mean functions at hand-checked points."""
        x = np.zeros((2, 10))
        x[0, :5] = [0.5, 0.5, 0.5, 1.0, 1.0]
        x[1, :5] = [1.0, 0.5, 0.5, 1.0, 1.0]
        means = friedman1_means(x)
        np.testing.assert_allclose(means[0], [7.071068, 28.0, 2.5], atol=1e-6)
        np.testing.assert_allclose(means[1], [10.0, 8.0, 2.5], atol=1e-6)

    def test_friedman2_values(self):
        """Test the latent means at the corners of the cube."""
        means = friedman2_latent_means(np.vstack([np.zeros(10), np.ones(10)]))
        np.testing.assert_allclose(means[0], [0.0, 0.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(means[1], [1.0, 1.0 + np.e, 2.0], atol=1e-12)

    def test_friedman1_replicate(self):
        """Test shapes, truth and seeding of a friedman1 replicate."""
        spec = ScenarioSpec(n_train=50, n_test=30, seed=4)
        data = generate(spec)
        assert data.train.covariates.shape == (50, 10)
        assert data.test.outcomes.shape == (30, 2)
        assert data.train.mode == OutcomeMode.CONTINUOUS
        np.testing.assert_allclose(data.true_means_train, friedman1_means(data.train.covariates)[:, :2])
        np.testing.assert_allclose(data.true_correlation[0, 1], 0.75)
        again = generate(spec)
        np.testing.assert_array_equal(data.train.outcomes, again.train.outcomes)

    def test_friedman1_three_outcomes(self):
        """Test that d=3 uses all three mean functions."""
        data = generate(ScenarioSpec(d=3, n_train=20, n_test=5))
        assert data.train.d == 3

    def test_friedman2_replicate(self):
        """Test binary outcomes and true probabilities."""
        data = generate(ScenarioSpec(scenario=ScenarioId.FRIEDMAN2, n_train=80, n_test=40, seed=2))
        assert data.train.mode == OutcomeMode.PROBIT
        assert set(np.unique(data.train.outcomes)) <= {0.0, 1.0}
        assert np.all((data.true_probabilities_test > 0) & (data.true_probabilities_test < 1))

    def test_no_test_rows(self):
        """Test that n_test=0 skips the test sample."""
        data = generate(ScenarioSpec(n_train=20, n_test=0))
        assert data.test is None and data.true_means_test is None

class TestTtcm:
    """Test cases for the trauma-care cost-effectiveness generator."""

    def test_effects_and_zero_tto(self):
        """Test the effect functions, with no effect on quality when tto is 0."""
        n = 4
        covariates = {
            "age": np.zeros(n),
            "gender": np.array([0.0, 1.0, 0.0, 1.0]),
            "education": np.array([0.0, 1.0, 2.0, 1.0]),
            "surgery": np.array([0.0, 0.0, 1.0, 1.0]),
            "tto": np.zeros(n),
        }
        effects = ttcm_effects(covariates)
        np.testing.assert_allclose(effects["tau_c"], 500.0)
        np.testing.assert_allclose(effects["tau_q"], 0.0, atol=1e-12)
        np.testing.assert_allclose(effects["mu_q"], 0.5)

    def test_propensity_range(self, rng):
        """Test that targeted selection keeps scores in [0.05, 0.95]."""
        scores = ttcm_propensity(rng.normal(0.0, 10.0, 1000), rng.binomial(1, 0.5, 1000).astype(float))
        assert np.all((scores >= 0.05) & (scores <= 0.95))

    def test_estimands(self):
        """Test the sample-average estimands."""
        estimands = ttcm_estimands(np.full(3, 500.0), np.array([0.01, 0.02, 0.03]))
        assert estimands["delta_q"] == pytest.approx(0.02)
        assert estimands["inb_20000"] == pytest.approx(20000.0 * 0.02 - 500.0)
        assert estimands["inb_50000"] == pytest.approx(50000.0 * 0.02 - 500.0)

    def test_replicate(self):
        """Test the generated table, treatment and truth."""
        data = generate(ScenarioSpec(scenario=ScenarioId.TTCM_LIKE, n_train=140, n_test=0, seed=9))
        assert data.train.covariate_names == TTCM_COVARIATES
        assert data.train.outcome_names == ("cost", "effect")
        assert set(np.unique(data.train.treatment)) == {0.0, 1.0}
        assert data.estimands["delta_c"] == pytest.approx(500.0)
        assert np.all((data.propensity >= 0.05) & (data.propensity <= 0.95))
        assert data.test is None

    def test_fixed_covariates_across_replicates(self):
        """Test that replicates share covariates but not outcomes."""
        spec = ScenarioSpec(scenario=ScenarioId.TTCM_LIKE, n_train=100, n_test=0, seed=5)
        first, second = generate(spec), generate(spec.for_replicate(1))
        np.testing.assert_array_equal(first.train.covariates, second.train.covariates)
        assert not np.array_equal(first.train.outcomes, second.train.outcomes)

    def test_fresh_covariates(self):
        """Test that covariates are redrawn when not fixed."""
        spec = ScenarioSpec(scenario=ScenarioId.TTCM_LIKE, n_train=100, n_test=0, seed=5, fixed_covariates=False)
        first, second = generate(spec), generate(spec.for_replicate(1))
        assert not np.array_equal(first.train.covariates, second.train.covariates)
