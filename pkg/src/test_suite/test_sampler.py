"""
Tests for the continuous, probit and propensity samplers.
"""

import numpy as np
import pytest
from scipy import stats

from config.config_template import ModelConfig
from src.core_model.chain import PosteriorChain
from src.core_model.dataset import Dataset, validate_dataset
from src.distributions.linalg import cholesky_factor
from src.distributions.variates import sample_mvn
from src.priors.half_t import sample_prior_covariance
from src.sampler.backfit import conditional_offsets, sweep_outcome
from src.sampler.continuous import (
    a_conditional_params,
    fit_continuous,
    sample_prior_only_a_sigma,
    sigma_posterior_params,
    update_a,
    update_sigma_continuous,
)
from src.sampler.probit import (
    LATENT_START,
    fit_probit,
    initial_state,
    pxmh_log_ratio,
    split_expanded,
    update_sigma_probit_pxmh,
)
from src.sampler.propensity import fit_propensity, treatment_dataset as propensity_dataset
from src.sampler.runner import fit_model, run_chains
from src.sampler.state import ContinuousState
from src.trees.forest import Forest
from src.utility_modules.enums import CovariateKind, OutcomeMode
from src.utility_modules.error_handling import AllOneTreatment, InvalidParameter, SubartError

class TestContinuousConditionals:
    """Test cases for the a and sigma full conditionals."""

    def test_a_shape_and_scale(self):
        """Test shape (nu + d) / 2 and scale 1/A^2 + nu (sigma^-1)_jj."""
        shape, scale = a_conditional_params(np.eye(2), np.array([1.0, 1.0]), 2.0)
        assert shape == 2.0
        np.testing.assert_allclose(scale, [3.0, 3.0])

    def test_a_independent(self):
        """Test the independent half-t hierarchy."""
        shape, scale = a_conditional_params(np.diag([4.0, 1.0]), np.array([1.0, 0.5]), 2.0, independent=True)
        assert shape == 1.5
        np.testing.assert_allclose(scale, [1.0 + 0.5, 4.0 + 2.0])

    def test_sigma_posterior_df(self, rng):
        """Test df nu + d - 1 + n and scale 2 nu diag(1/a) + S."""
        residuals = rng.normal(size=(100, 2))
        df, scale = sigma_posterior_params(residuals, np.array([1.0, 2.0]), 2.0)
        assert df == 103
        np.testing.assert_allclose(scale, np.diag([4.0, 2.0]) + residuals.T @ residuals)

    def test_independent_sigma_is_diagonal(self, rng):
        """Test that the independence flag zeroes off-diagonals."""
        residuals = rng.multivariate_normal([0.0, 0.0], [[1.0, 0.9], [0.9, 1.0]], size=50)
        sigma = update_sigma_continuous(residuals, np.ones(2), 2.0, rng, independent=True)
        assert sigma[0, 1] == 0.0 and sigma[1, 0] == 0.0
        assert np.all(np.diag(sigma) > 0)

    def test_sigma_concentrates_on_truth(self, rng):
        """Test that with many rows the covariance draw is close to the generating one."""
        truth = np.array([[0.04, 0.015], [0.015, 0.025]])
        residuals = rng.multivariate_normal([0.0, 0.0], truth, size=40000)
        draws = np.array([update_sigma_continuous(residuals, np.full(2, 100.0), 2.0, rng) for _ in range(50)])
        np.testing.assert_allclose(draws.mean(axis=0), truth, rtol=0.05)

    @pytest.mark.slow
    def test_prior_only_gibbs_reproduces_half_t(self, rng):
        """Test that the no-data Gibbs marginal of each sd is half-t."""
        scales = np.array([0.3, 1.0])
        draws = sample_prior_only_a_sigma(scales, 2.0, 100000, rng)
        sds = np.sqrt(draws[:, 1, 1])
        reference = scales[1] * np.abs(rng.standard_t(2.0, size=100000))
        assert stats.ks_2samp(sds, reference).statistic < 0.02

class TestBackfitSweep:
    """Test cases for the per-outcome tree sweep."""

    def test_cached_fits_track_trees(self, rng):
        """Test that cached per-tree and total fits equal recomputed fits after every sweep."""
        n = 80
        covariates = np.column_stack([rng.uniform(size=n), rng.integers(0, 3, n).astype(float)])
        is_categorical = np.array([False, True])
        target = np.where(covariates[:, 0] > 0.5, 0.3, -0.2) + 0.1 * covariates[:, 1] + rng.normal(0.0, 0.05, n)
        forest = Forest(n_trees=10, n_rows=n)
        config = ModelConfig(n_trees=10)
        accepted = 0.0
        for _ in range(100):
            accepted += sweep_outcome(forest, target, np.zeros(n), 0.0025, 0.05, covariates, is_categorical, config, rng)
            recomputed = np.array([tree.fit_vector(n) for tree in forest.trees])
            np.testing.assert_allclose(forest.tree_fits, recomputed, atol=1e-10)
            np.testing.assert_allclose(forest.total, recomputed.sum(axis=0), atol=1e-10)
        assert accepted > 0
        assert any(not tree.is_stump for tree in forest.trees)

    def test_offsets_shift_the_target(self, rng):
        """Test that a constant offset moves the fitted level by the same amount."""
        n = 200
        covariates = rng.uniform(size=(n, 1))
        is_categorical = np.array([False])
        config = ModelConfig(n_trees=5)
        forest = Forest(n_trees=5, n_rows=n)
        for _ in range(200):
            sweep_outcome(forest, np.zeros(n), np.full(n, -0.2), 1e-4, 0.2, covariates, is_categorical, config, rng)
        assert forest.total.mean() == pytest.approx(0.2, abs=0.01)

@pytest.mark.slow
class TestJointDistribution:
    """Successive-conditional check of the continuous sampler against its prior."""

    def test_correlation_marginal_matches_prior(self, rng):
        """Test that alternating data regeneration and sampler sweeps leaves rho at its nu=2 prior."""
        n, d, nu, leaf_sd = 20, 2, 2.0, 0.1
        scales = np.array([0.2, 0.3])
        covariates = rng.uniform(size=(n, 1))
        is_categorical = np.array([False])
        config = ModelConfig(n_trees=2)
        state = ContinuousState(
            forests=[Forest(2, n) for _ in range(d)],
            sigma=np.diag(scales ** 2),
            a=scales ** 2,
            outcomes=np.zeros((n, d)),
        )
        rho = []
        for iteration in range(61000):
            state.outcomes = state.fits() + sample_mvn(np.zeros(d), cholesky_factor(state.sigma), rng, size=n)
            for j, forest in enumerate(state.forests):
                offsets, v = conditional_offsets(state.residuals(), state.sigma, j)
                sweep_outcome(forest, state.outcomes[:, j], offsets, v, leaf_sd, covariates, is_categorical, config, rng)
            state.a = update_a(state.sigma, scales, nu, rng)
            state.sigma = update_sigma_continuous(state.residuals(), state.a, nu, rng)
            if iteration >= 1000 and iteration % 10 == 0:
                rho.append(state.sigma[0, 1] / np.sqrt(state.sigma[0, 0] * state.sigma[1, 1]))
        _, prior = sample_prior_covariance(scales, nu, len(rho), rng)
        assert stats.ks_2samp(rho, prior[:, 0, 1]).statistic < 0.05

class TestConditionalOffsets:
    """Test cases for the offsets used by the tree sweep."""

    def test_offsets(self):
        """Test u = E_-j w and v from the conditional normal."""
        residuals = np.array([[0.0, 2.0], [1.0, -1.0]])
        sigma = np.array([[1.0, 7.5], [7.5, 100.0]])
        u, v = conditional_offsets(residuals, sigma, 0)
        np.testing.assert_allclose(u, [0.15, -0.075])
        assert v == pytest.approx(0.4375)

    def test_offsets_disabled(self):
        """Test that disabled offsets fall back to zero and the marginal variance."""
        u, v = conditional_offsets(np.ones((3, 2)), np.array([[1.0, 0.5], [0.5, 2.0]]), 1, use_offsets=False)
        np.testing.assert_array_equal(u, np.zeros(3))
        assert v == 2.0

class TestPxmh:
    """Test cases for the parameter-expanded correlation update."""

    def test_identity_proposal_ratio(self, rng):
        """Test that proposing the current W gives log ratio 0."""
        expanded = np.array([[2.0, 0.6], [0.6, 1.5]])
        residuals = rng.normal(size=(30, 2))
        assert pxmh_log_ratio(expanded, expanded, residuals, 2.0, 10.0) == pytest.approx(0.0, abs=1e-10)

    def test_split_expanded_unit_diagonal(self):
        """Test that the correlation part has an exact unit diagonal."""
        expanded = np.array([[4.0, 1.2], [1.2, 9.0]])
        sigma, expansion = split_expanded(expanded)
        np.testing.assert_array_equal(np.diag(sigma), [1.0, 1.0])
        assert sigma[0, 1] == pytest.approx(0.2)
        np.testing.assert_allclose(expansion, [4.0, 9.0])

    def test_update_keeps_correlation_form(self, rng):
        """Test that every accepted state is a correlation matrix."""
        labels = (rng.uniform(size=(40, 2)) > 0.5).astype(float)
        state = initial_state(labels, n_trees=2)
        for _ in range(200):
            sigma, _, _ = update_sigma_probit_pxmh(state, 2.0, 20.0, rng)
            np.testing.assert_array_equal(np.diag(sigma), [1.0, 1.0])
            assert -1.0 < sigma[0, 1] < 1.0
        assert state.px_attempts == 200
        assert 0 < state.px_accept_count <= 200

    def test_invalid_nu_prop(self, rng):
        """Test that nu_prop <= d - 1 is rejected."""
        state = initial_state(np.zeros((5, 3)), n_trees=1)
        with pytest.raises(InvalidParameter):
            update_sigma_probit_pxmh(state, 2.0, 2.0, rng)

    def test_initial_latents(self):
        """Test the latent start at the half-normal median."""
        state = initial_state(np.array([[1.0], [0.0]]), n_trees=1)
        np.testing.assert_allclose(state.latent.ravel(), [LATENT_START, -LATENT_START])

class TestFits:
    """Short end-to-end sampler runs."""

    def test_continuous_fit(self, continuous_dataset, fast_config):
        """Test chain shapes and bookkeeping of a continuous fit."""
        chain = fit_continuous(continuous_dataset, fast_config)
        assert chain.mode == OutcomeMode.CONTINUOUS
        assert chain.n_retained == 40
        assert chain.sigma_trace.shape == (60, 2, 2)
        assert chain.fitted_values.shape == (40, continuous_dataset.n, 2)
        assert chain.a_trace.shape == (60, 2)
        assert chain.sigma_accept is None
        assert np.all(chain.sd_draws() > 0)
        # Fits are reported on the original outcome scale
        lo, hi = continuous_dataset.outcomes.min(axis=0), continuous_dataset.outcomes.max(axis=0)
        means = chain.fitted_values.mean(axis=(0, 1))
        assert np.all((means > lo) & (means < hi))

    def test_continuous_fit_is_reproducible(self, continuous_dataset, fast_config):
        """Test that a fixed seed reproduces the chain."""
        first = fit_continuous(continuous_dataset, fast_config)
        second = fit_continuous(continuous_dataset, fast_config)
        np.testing.assert_array_equal(first.sigma_trace, second.sigma_trace)

    def test_independent_fit_has_diagonal_sigma(self, continuous_dataset, fast_config):
        """Test the independence flag end to end."""
        config = fast_config.model_copy(update={"independence_flag": True})
        chain = fit_continuous(continuous_dataset, config)
        np.testing.assert_array_equal(chain.sigma_trace[:, 0, 1], 0.0)

    def test_single_outcome_fit(self, continuous_dataset, fast_config):
        """Test that d=1 runs as univariate BART."""
        chain = fit_continuous(continuous_dataset.select_outcomes([0]), fast_config)
        assert chain.d == 1
        assert chain.correlation_draws().shape == (40, 1, 1)

    def test_probit_fit(self, probit_dataset, fast_config):
        """Test a probit fit with stored latents."""
        config = fast_config.model_copy(update={"store_latent": True})
        chain = fit_probit(probit_dataset, config)
        assert chain.mode == OutcomeMode.PROBIT
        assert chain.sigma_accept.shape == (60,)
        np.testing.assert_allclose(np.diagonal(chain.sigma_trace, axis1=1, axis2=2), 1.0)
        # Latent signs agree with the labels at every retained draw
        labels = probit_dataset.outcomes[None] == 1
        assert np.all((chain.latent_draws > 0) == labels)

    def test_probit_single_outcome_skips_pxmh(self, probit_dataset, fast_config):
        """Test that d=1 keeps sigma at 1 without PX-MH."""
        chain = fit_probit(probit_dataset.select_outcomes([0]), fast_config)
        assert chain.sigma_accept is None
        np.testing.assert_array_equal(chain.sigma_trace, 1.0)

    def test_mode_mismatch(self, probit_dataset, fast_config):
        """Test that the continuous sampler refuses binary data."""
        with pytest.raises(InvalidParameter):
            fit_continuous(probit_dataset, fast_config)

    def test_fit_model_dispatch(self, probit_dataset, fast_config):
        """Test that fit_model picks the sampler from the dataset mode."""
        assert fit_model(probit_dataset, fast_config).mode == OutcomeMode.PROBIT

    def test_prediction_sets(self, continuous_dataset, fast_config):
        """Test that prediction sets are evaluated at every retained draw."""
        new_x = continuous_dataset.covariates[:5]
        chain = fit_continuous(continuous_dataset, fast_config, prediction_sets={"head": new_x})
        np.testing.assert_allclose(chain.extra_fits["head"], chain.fitted_values[:, :5, :])

    def test_multiple_chains(self, continuous_dataset, fast_config):
        """Test that chains are stacked with their own index."""
        chain = run_chains(continuous_dataset, fast_config, n_chains=2, n_jobs=1)
        assert chain.n_chains == 2
        assert chain.n_retained == 80
        assert chain.sigma_trace.shape[0] == 120
        assert chain.retained_sigma().shape[0] == 80

class TestChainPersistence:
    """Test cases for saving and loading chains."""

    def test_round_trip(self, tmp_path, continuous_dataset, fast_config):
        """Test that a saved chain evaluates identically after loading."""
        chain = fit_continuous(continuous_dataset, fast_config)
        path = tmp_path / "chain.npz"
        chain.save(path)
        loaded = PosteriorChain.load(path)
        assert loaded.mode == chain.mode
        assert loaded.covariate_names == chain.covariate_names
        assert loaded.level_labels == chain.level_labels
        np.testing.assert_array_equal(loaded.sigma_trace, chain.sigma_trace)
        new_x = continuous_dataset.covariates[:7]
        np.testing.assert_allclose(loaded.evaluate(new_x), chain.evaluate(new_x))
        np.testing.assert_allclose(chain.evaluate(continuous_dataset.covariates), chain.fitted_values)

    def test_without_forests(self, continuous_dataset, fast_config):
        """Test that chains stored without forests cannot evaluate new rows."""
        chain = fit_continuous(continuous_dataset, fast_config.model_copy(update={"keep_forests": False}))
        with pytest.raises(SubartError):
            chain.evaluate(continuous_dataset.covariates[:2])

class TestPropensity:
    """Test cases for propensity scores."""

    def test_treatment_dataset(self, treatment_dataset):
        """Test that the treatment becomes the only binary outcome."""
        data = propensity_dataset(treatment_dataset)
        assert data.mode == OutcomeMode.PROBIT
        assert data.treatment is None
        assert data.outcome_names == ("treatment",)
        np.testing.assert_array_equal(data.outcomes[:, 0], treatment_dataset.treatment)

    def test_scores_inside_unit_interval(self, treatment_dataset, fast_config):
        """Test that scores are strictly inside (0, 1)."""
        scores = fit_propensity(treatment_dataset, fast_config, seed=5)
        assert scores.shape == (treatment_dataset.n,)
        assert np.all((scores > 0) & (scores < 1))

    def test_constant_treatment(self, fast_config):
        """Test that a treatment without variation is rejected."""
        dataset = validate_dataset(Dataset(
            covariates=np.arange(6.0).reshape(-1, 1),
            outcomes=np.arange(6.0).reshape(-1, 1),
            covariate_kinds=(CovariateKind.CONTINUOUS,),
            treatment=np.ones(6),
        ))
        with pytest.raises(AllOneTreatment):
            fit_propensity(dataset, fast_config)
