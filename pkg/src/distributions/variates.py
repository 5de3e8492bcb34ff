"""
Random variate generation for the samplers.

Every function takes an explicit ``numpy.random.Generator``; nothing here
touches global random state.
"""

from typing import Optional, Union

import numpy as np
from scipy import linalg, special
from scipy.stats import invwishart

from src.distributions.linalg import CholeskyFactor, cholesky_factor
from src.utility_modules.error_handling import (
    DimensionMismatch,
    InvalidParameter,
    InvalidDegreesOfFreedom,
    TailSamplingFailure,
)

# Standardised truncation points above this use exponential rejection.
TAIL_THRESHOLD = 4.0
MAX_REJECTION_ROUNDS = 1000

def sample_mvn(mean: np.ndarray, chol: CholeskyFactor, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """
    Draw mean + L z with z standard normal.

    Args:
        mean (np.ndarray): d-vector
        chol (CholeskyFactor): Factor of the covariance
        rng (np.random.Generator): Random generator
        size (Optional[int]): Number of draws; a single d-vector if omitted

    Returns:
        np.ndarray: d-vector or size x d matrix
    """
    mean = np.asarray(mean, dtype=float).reshape(-1)
    if mean.shape[0] != chol.dim:
        raise DimensionMismatch(f"Mean has length {mean.shape[0]} but covariance is {chol.dim}x{chol.dim}")
    if size is None:
        return mean + chol.lower @ rng.standard_normal(chol.dim)
    z = rng.standard_normal((size, chol.dim))
    return mean + z @ chol.lower.T

def sample_inverse_gamma(shape: float, scale, rng: np.random.Generator, size: Optional[int] = None):
    """
    Draw from the density proportional to x^(-shape-1) exp(-scale / x).

    Raises:
        InvalidParameter: If shape or scale is not positive
    """
    if not shape > 0 or not np.all(np.asarray(scale) > 0):
        raise InvalidParameter(f"Inverse-gamma needs positive shape and scale, got {shape}, {scale}")
    return scale / rng.gamma(shape, 1.0, size=size)

def sample_inverse_wishart(df: float, scale_matrix: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """
    Draw an SPD matrix from the inverse-Wishart with the given degrees of freedom and scale.

    Samples W ~ Wishart(df, scale^-1) through its Bartlett factor L A, with L the
    Cholesky factor of scale^-1, and returns W^-1.

    Raises:
        InvalidDegreesOfFreedom: If df <= d - 1
        NotPositiveDefinite: If the scale matrix is not SPD
    """
    scale_matrix = np.atleast_2d(np.asarray(scale_matrix, dtype=float))
    d = scale_matrix.shape[0]
    if not df > d - 1:
        raise InvalidDegreesOfFreedom(f"Inverse-Wishart needs df > {d - 1}, got {df}")
    precision = cholesky_factor(0.5 * (scale_matrix + scale_matrix.T)).solve(np.eye(d))
    precision_lower = cholesky_factor(0.5 * (precision + precision.T)).lower
    bartlett = np.zeros((d, d))
    bartlett[np.diag_indices(d)] = np.sqrt(rng.chisquare(df - np.arange(d)))
    bartlett[np.tril_indices(d, -1)] = rng.standard_normal(d * (d - 1) // 2)
    inverse_factor = linalg.solve_triangular(precision_lower @ bartlett, np.eye(d), lower=True)
    draw = inverse_factor.T @ inverse_factor
    return 0.5 * (draw + draw.T)

def inverse_wishart_logpdf(x: np.ndarray, df: float, scale_matrix: np.ndarray) -> float:
    x = np.atleast_2d(x)
    scale_matrix = np.atleast_2d(scale_matrix)
    if x.shape[0] == 1:
        return float(invwishart.logpdf(x[0, 0], df=df, scale=scale_matrix[0, 0]))
    return float(invwishart.logpdf(x, df=df, scale=scale_matrix))

def sample_half_t(nu: float, scale: float, rng: np.random.Generator, size: Optional[int] = None):
    """|T| * scale for T Student-t with nu degrees of freedom."""
    return scale * np.abs(rng.standard_t(nu, size=size))

def _positive_tail(lower: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Standard normal draws restricted to (lower, inf) for lower > TAIL_THRESHOLD."""
    alpha_star = 0.5 * (lower + np.sqrt(lower ** 2 + 4.0))
    out = np.empty_like(lower)
    pending = np.arange(lower.shape[0])
    for _ in range(MAX_REJECTION_ROUNDS):
        if pending.size == 0:
            return out
        a = lower[pending]
        rate = alpha_star[pending]
        z = a + rng.exponential(1.0 / rate)
        accept = rng.random(pending.size) <= np.exp(-0.5 * (z - rate) ** 2)
        out[pending[accept]] = z[accept]
        pending = pending[~accept]
    if pending.size:
        raise TailSamplingFailure(f"Tail sampler did not accept within {MAX_REJECTION_ROUNDS} rounds")
    return out

def _standard_lower_truncated(lower: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Standard normal restricted to (lower, inf), elementwise."""
    out = np.empty_like(lower)
    body = lower <= TAIL_THRESHOLD
    if body.any():
        a = lower[body]
        u = 1.0 - rng.random(a.shape[0])
        out[body] = -special.ndtri(u * special.ndtr(-a))
    if (~body).any():
        out[~body] = _positive_tail(lower[~body], rng)
    return out

def sample_truncated_normal_array(mu, sd, positive, rng: np.random.Generator) -> np.ndarray:
    """
    Vectorised one-sided truncated normal draws.

    Args:
        mu: Means
        sd: Positive standard deviations (scalar or array)
        positive: Boolean mask; True restricts to (0, inf), False to (-inf, 0]
        rng (np.random.Generator): Random generator

    Returns:
        np.ndarray: Draws satisfying the side constraint exactly
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    positive = np.broadcast_to(np.asarray(positive, dtype=bool), mu.shape)
    sd = np.broadcast_to(np.asarray(sd, dtype=float), mu.shape)
    if not np.all(sd > 0):
        raise InvalidParameter("Truncated normal needs a positive standard deviation")
    sign = np.where(positive, 1.0, -1.0)
    # Nonpositive side: draw -X > 0 with mean -mu.
    centred = sign * mu
    lower = -centred / sd
    draws = centred + sd * _standard_lower_truncated(lower, rng)
    draws = np.maximum(draws, np.nextafter(0.0, 1.0))
    out = sign * draws
    out[~positive] = np.minimum(out[~positive], 0.0)
    return out

def sample_truncated_normal(mu: float, sd: float, positive: bool, rng: np.random.Generator) -> float:
    """
    Draw N(mu, sd^2) restricted to (0, inf) when positive, else (-inf, 0].

    Raises:
        TailSamplingFailure: If the far-tail rejection sampler hits its round cap
    """
    return float(sample_truncated_normal_array(mu, sd, positive, rng)[0])

def random_generator(seed: Union[None, int, np.random.SeedSequence]) -> np.random.Generator:
    return np.random.default_rng(seed)
