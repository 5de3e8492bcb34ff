"""
Tests for random variates and covariance algebra.
"""

import numpy as np
import pytest
from scipy import stats

from src.distributions.linalg import (
    build_covariance,
    cholesky_factor,
    conditional_normal_params,
    covariance_to_correlation,
    log_det_spd,
)
from src.distributions.variates import (
    sample_half_t,
    sample_inverse_gamma,
    sample_inverse_wishart,
    sample_mvn,
    sample_truncated_normal,
    sample_truncated_normal_array,
)
from src.priors.half_t import half_t_cdf
from src.utility_modules.error_handling import (
    InvalidDegreesOfFreedom,
    InvalidParameter,
    NotPositiveDefinite,
)

class TestConditionalNormalParams:
    """Test cases for conditional_normal_params."""

    def test_two_outcomes(self):
        """Test weights and variance of the second outcome given the first."""
        sigma = np.array([[1.0, 7.5], [7.5, 100.0]])
        params = conditional_normal_params(sigma, 0)
        np.testing.assert_allclose(params.offset_weights, [0.075])
        assert params.conditional_variance == pytest.approx(0.4375)

    def test_diagonal(self):
        """Test that independent errors give zero weights."""
        sigma = np.diag([1.0, 4.0, 9.0])
        params = conditional_normal_params(sigma, 2)
        np.testing.assert_allclose(params.offset_weights, [0.0, 0.0])
        assert params.conditional_variance == pytest.approx(9.0)

    def test_three_outcomes_against_dense_solve(self):
        """Test the d=3 case against a direct linear solve."""
        corr = np.array([[1.0, 0.8, 0.5], [0.8, 1.0, 0.25], [0.5, 0.25, 1.0]])
        sigma = build_covariance([1.0, 2.5, 5.0], corr)
        params = conditional_normal_params(sigma, 1)
        others = [0, 2]
        weights = np.linalg.solve(sigma[np.ix_(others, others)], sigma[others, 1])
        variance = sigma[1, 1] - sigma[1, others] @ weights
        np.testing.assert_allclose(params.offset_weights, weights, atol=1e-10)
        assert params.conditional_variance == pytest.approx(variance, abs=1e-10)

    def test_single_outcome(self):
        """Test that d=1 has no weights and the full variance."""
        params = conditional_normal_params(np.array([[4.0]]), 0)
        assert params.offset_weights.size == 0
        assert params.conditional_variance == 4.0

    def test_index_out_of_range(self):
        """Test that an invalid outcome index is rejected."""
        with pytest.raises(InvalidParameter):
            conditional_normal_params(np.eye(2), 2)

    def test_singular_matrix(self):
        """Test that a perfectly correlated covariance is rejected."""
        with pytest.raises(NotPositiveDefinite):
            conditional_normal_params(np.ones((2, 2)), 0)

class TestCholesky:
    """Test cases for cholesky_factor."""

    def test_reconstruct(self):
        """Test that the factor reproduces the matrix."""
        sigma = np.array([[2.0, 0.3], [0.3, 1.0]])
        np.testing.assert_allclose(cholesky_factor(sigma).reconstruct(), sigma)

    def test_not_positive_definite(self):
        """Test that an indefinite matrix is rejected."""
        with pytest.raises(NotPositiveDefinite):
            cholesky_factor(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_correlation(self):
        """Test covariance to correlation conversion."""
        corr = covariance_to_correlation(np.array([[1.0, 7.5], [7.5, 100.0]]))
        np.testing.assert_allclose(corr, [[1.0, 0.75], [0.75, 1.0]])

    def test_log_det(self):
        """Test the log determinant against slogdet."""
        sigma = np.array([[4.0, 1.2, 0.0], [1.2, 2.0, 0.3], [0.0, 0.3, 1.0]])
        assert log_det_spd(sigma) == pytest.approx(np.linalg.slogdet(sigma)[1])

class TestHalfT:
    """Test cases for half-t draws."""

    def test_matches_cdf(self, rng):
        """Test that draws follow the half-t CDF used for calibration."""
        draws = sample_half_t(2.0, 0.25, rng, size=20000)
        assert np.all(draws >= 0)
        cdf = np.vectorize(lambda x: half_t_cdf(x, 2.0, 0.25))
        assert stats.kstest(draws, cdf).statistic < 0.02

class TestSampleMvn:
    """Test cases for sample_mvn."""

    def test_standard_normal(self, rng):
        """Test moments of standard normal draws."""
        draws = sample_mvn(np.zeros(2), cholesky_factor(np.eye(2)), rng, size=100000)
        np.testing.assert_allclose(draws.mean(axis=0), 0.0, atol=0.02)
        np.testing.assert_allclose(draws.var(axis=0), 1.0, atol=0.05)

    def test_correlation(self, rng):
        """Test the empirical correlation of sigma=(1, 10), rho=0.75 draws."""
        sigma = build_covariance([1.0, 10.0], [[1.0, 0.75], [0.75, 1.0]])
        draws = sample_mvn(np.zeros(2), cholesky_factor(sigma), rng, size=100000)
        assert np.corrcoef(draws.T)[0, 1] == pytest.approx(0.75, abs=0.02)

    def test_scalar_case(self, rng):
        """Test the d=1 variance."""
        draws = sample_mvn(np.zeros(1), cholesky_factor(np.array([[4.0]])), rng, size=100000)
        assert draws.var() == pytest.approx(4.0, rel=0.03)

class TestInverseGamma:
    """Test cases for sample_inverse_gamma."""

    def test_mean_and_variance(self, rng):
        """Test the mean of InvGamma(3, 2) and the variance of InvGamma(6, 5)."""
        draws = sample_inverse_gamma(3.0, 2.0, rng, size=1000000)
        assert draws.mean() == pytest.approx(1.0, abs=0.01)
        # Shape 3 has no fourth moment, so the variance check uses shape 6.
        draws = sample_inverse_gamma(6.0, 5.0, rng, size=1000000)
        assert draws.var() == pytest.approx(0.25, abs=0.01)

    def test_positive_support(self, rng):
        """Test that heavy-tailed draws stay positive."""
        assert np.all(sample_inverse_gamma(0.5, 1.0, rng, size=10000) > 0)

    def test_invalid_shape(self, rng):
        """Test that a nonpositive shape is rejected."""
        with pytest.raises(InvalidParameter):
            sample_inverse_gamma(0.0, 1.0, rng)

class TestInverseWishart:
    """Test cases for sample_inverse_wishart."""

    def test_mean(self, rng):
        """Test that the mean of IW(10, I) draws is I/7."""
        draws = np.array([sample_inverse_wishart(10.0, np.eye(2), rng) for _ in range(20000)])
        np.testing.assert_allclose(draws.mean(axis=0), np.eye(2) / 7.0, atol=0.01)

    def test_draws_are_spd(self, rng):
        """Test that every draw is symmetric positive definite."""
        for _ in range(200):
            draw = sample_inverse_wishart(3.0, np.array([[1.0, 0.5], [0.5, 2.0]]), rng)
            np.testing.assert_array_equal(draw, draw.T)
            assert np.all(np.linalg.eigvalsh(draw) > 0)

    def test_scalar_matches_inverse_gamma(self, rng):
        """Test that d=1 matches InvGamma(df/2, scale/2)."""
        wishart = np.array([sample_inverse_wishart(6.0, np.array([[2.0]]), rng)[0, 0] for _ in range(20000)])
        gamma = sample_inverse_gamma(3.0, 1.0, rng, size=20000)
        assert stats.ks_2samp(wishart, gamma).statistic < 0.02

    def test_mean_general_scale(self, rng):
        """Test that the mean of IW(9, S) draws is S/5 for d=3."""
        scale = np.array([[2.0, 0.6, -0.3], [0.6, 1.0, 0.2], [-0.3, 0.2, 0.5]])
        draws = np.array([sample_inverse_wishart(9.0, scale, rng) for _ in range(40000)])
        np.testing.assert_allclose(draws.mean(axis=0), scale / 5.0, atol=0.01)

    def test_diagonal_marginal(self, rng):
        """Test that sigma_jj of IW(df, S) follows InvGamma((df - d + 1)/2, S_jj/2)."""
        scale = np.array([[2.0, 0.6, -0.3], [0.6, 1.0, 0.2], [-0.3, 0.2, 0.5]])
        draws = np.array([sample_inverse_wishart(7.0, scale, rng)[2, 2] for _ in range(20000)])
        marginal = stats.invgamma(a=2.5, scale=0.25)
        assert stats.kstest(draws, marginal.cdf).statistic < 0.02

    def test_matches_scipy_correlation(self, rng):
        """Test that the implied correlation matches scipy's inverse-Wishart draws."""
        scale = np.array([[1.0, 0.7], [0.7, 2.0]])
        ours = np.array([sample_inverse_wishart(5.0, scale, rng) for _ in range(20000)])
        reference = stats.invwishart.rvs(df=5.0, scale=scale, size=20000, random_state=rng)
        rho_ours = ours[:, 0, 1] / np.sqrt(ours[:, 0, 0] * ours[:, 1, 1])
        rho_reference = reference[:, 0, 1] / np.sqrt(reference[:, 0, 0] * reference[:, 1, 1])
        assert stats.ks_2samp(rho_ours, rho_reference).statistic < 0.025

    def test_degrees_of_freedom(self, rng):
        """Test that df <= d - 1 is rejected."""
        with pytest.raises(InvalidDegreesOfFreedom):
            sample_inverse_wishart(1.0, np.eye(3), rng)

class TestTruncatedNormal:
    """Test cases for the one-sided truncated normal sampler."""

    def test_half_normal_mean(self, rng):
        """Test the positive-side mean sqrt(2/pi)."""
        draws = sample_truncated_normal_array(np.zeros(1000000), 1.0, True, rng)
        assert draws.mean() == pytest.approx(np.sqrt(2.0 / np.pi), abs=0.005)
        assert np.all(draws > 0)

    def test_nonpositive_side(self, rng):
        """Test the mirrored mean on the nonpositive side."""
        draws = sample_truncated_normal_array(np.zeros(1000000), 1.0, False, rng)
        assert draws.mean() == pytest.approx(-np.sqrt(2.0 / np.pi), abs=0.005)
        assert np.all(draws <= 0)

    def test_mills_ratio(self, rng):
        """Test the mean 2 + phi(2)/Phi(2) for mu=2."""
        draws = sample_truncated_normal_array(np.full(1000000, 2.0), 1.0, True, rng)
        expected = 2.0 + stats.norm.pdf(2.0) / stats.norm.cdf(2.0)
        assert draws.mean() == pytest.approx(expected, abs=0.005)

    def test_far_tail(self, rng):
        """Test that truncation points far in the tail still satisfy the constraint."""
        draws = sample_truncated_normal_array(np.full(10000, -10.0), 1.0, True, rng)
        assert np.all(draws > 0)
        assert draws.mean() == pytest.approx(0.0981, abs=0.01)

    def test_mixed_sides(self, rng):
        """Test that each row keeps its own side."""
        positive = np.array([True, False, True, False])
        draws = sample_truncated_normal_array(np.zeros(4), 1.0, positive, rng)
        assert np.all(draws[positive] > 0)
        assert np.all(draws[~positive] <= 0)

    def test_scalar(self, rng):
        """Test the scalar wrapper."""
        assert sample_truncated_normal(1.0, 0.5, False, rng) <= 0.0

    def test_nonpositive_sd(self, rng):
        """Test that sd <= 0 is rejected."""
        with pytest.raises(InvalidParameter):
            sample_truncated_normal_array(np.zeros(2), 0.0, True, rng)
