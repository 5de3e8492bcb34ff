"""
Half-t prior on the error standard deviations and its calibration.

Under the hierarchical inverse-Wishart / inverse-gamma covariance prior each
error standard deviation is marginally half-t(nu, A_j). A_j is chosen so that
the prior puts mass alpha_sigma below the data-based overestimate.
"""

import numpy as np
from scipy import optimize, special

from src.distributions.variates import sample_inverse_gamma, sample_inverse_wishart
from src.distributions.linalg import covariance_to_correlation
from src.utility_modules.error_handling import InvalidParameter, OutOfSupport, RootNotBracketed

MAX_BRACKET_DOUBLINGS = 200
CALIBRATION_RTOL = 1e-10

def half_t_cdf(x: float, nu: float, scale: float) -> float:
    """
    CDF of |T| * scale at x, for T Student-t with nu degrees of freedom.

    nu = 2 uses the closed form x / sqrt(2 A^2 + x^2); other nu use the
    regularised incomplete beta function.
    """
    if scale <= 0:
        raise InvalidParameter(f"Half-t scale must be positive, got {scale}")
    if x <= 0:
        return 0.0
    if np.isinf(x):
        return 1.0
    if nu == 2:
        return float(x / np.sqrt(2.0 * scale * scale + x * x))
    t2 = (x / scale) ** 2
    return float(special.betainc(0.5, 0.5 * nu, t2 / (nu + t2)))

def calibrate_half_t_scale(sigma_hat: float, nu: float, alpha_sigma: float) -> float:
    """
    Scale A with half_t_cdf(sigma_hat, nu, A) = alpha_sigma.

    The CDF at fixed x decreases in A, so the root is bracketed by halving and
    doubling around sigma_hat and then found by bisection.

    Raises:
        InvalidParameter: If sigma_hat <= 0 or alpha_sigma is outside (0, 1)
        RootNotBracketed: If the bracket cannot be found within 200 doublings
    """
    if not sigma_hat > 0:
        raise InvalidParameter(f"sigma_hat must be positive, got {sigma_hat}")
    if not 0 < alpha_sigma < 1:
        raise InvalidParameter(f"alpha_sigma must lie in (0, 1), got {alpha_sigma}")

    def excess(scale: float) -> float:
        return half_t_cdf(sigma_hat, nu, scale) - alpha_sigma

    low = high = sigma_hat
    for _ in range(MAX_BRACKET_DOUBLINGS):
        if excess(low) > 0:
            break
        low /= 2.0
    else:
        raise RootNotBracketed(f"No lower bracket for sigma_hat={sigma_hat}, nu={nu}, alpha={alpha_sigma}")
    for _ in range(MAX_BRACKET_DOUBLINGS):
        if excess(high) < 0:
            break
        high *= 2.0
    else:
        raise RootNotBracketed(f"No upper bracket for sigma_hat={sigma_hat}, nu={nu}, alpha={alpha_sigma}")

    return float(optimize.bisect(excess, low, high, xtol=low * 1e-14, rtol=CALIBRATION_RTOL, maxiter=500))

def implied_correlation_log_density(rho: float, nu: float) -> float:
    """
    Unnormalised log prior density of a correlation: (nu/2 - 1) log(1 - rho^2).

    Raises:
        OutOfSupport: If |rho| >= 1
    """
    if not -1 < rho < 1:
        raise OutOfSupport(f"Correlation must lie in (-1, 1), got {rho}")
    return (0.5 * nu - 1.0) * np.log1p(-rho * rho)

def sample_prior_covariance(scales: np.ndarray, nu: float, n_draws: int, rng: np.random.Generator):
    """
    Draw covariance matrices from the hierarchical prior.

    a_j ~ InvGamma(1/2, 1/A_j^2) and sigma | a ~ InvWishart(nu + d - 1, 2 nu diag(1/a)).

    Returns:
        Tuple[np.ndarray, np.ndarray]: standard deviations (n_draws x d) and
            correlation matrices (n_draws x d x d)
    """
    scales = np.atleast_1d(np.asarray(scales, dtype=float))
    d = scales.shape[0]
    sds = np.empty((n_draws, d))
    correlations = np.empty((n_draws, d, d))
    for k in range(n_draws):
        a = sample_inverse_gamma(0.5, 1.0 / scales ** 2, rng, size=d)
        sigma = sample_inverse_wishart(nu + d - 1, 2.0 * nu * np.diag(1.0 / a), rng)
        sds[k] = np.sqrt(np.diag(sigma))
        correlations[k] = covariance_to_correlation(sigma)
    return sds, correlations
