"""
Small dense linear algebra for covariance matrices.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from src.utility_modules.error_handling import NotPositiveDefinite, InvalidParameter

JITTER_FACTOR = 1e-10

@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular L with sigma = L @ L.T."""
    lower: np.ndarray

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def log_det(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self.lower))))

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return linalg.cho_solve((self.lower, True), rhs)

    def reconstruct(self) -> np.ndarray:
        return self.lower @ self.lower.T

@dataclass(frozen=True)
class ConditionalNormalParams:
    """Regression weights of outcome j on the other outcomes' errors, and the conditional variance."""
    offset_weights: np.ndarray
    conditional_variance: float

def _as_square(sigma: np.ndarray) -> np.ndarray:
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    if sigma.shape[0] != sigma.shape[1]:
        raise NotPositiveDefinite(f"Matrix must be square, got shape {sigma.shape}")
    if not np.isfinite(sigma).all():
        raise NotPositiveDefinite("Matrix has non-finite entries")
    return sigma

def cholesky_factor(sigma: np.ndarray) -> CholeskyFactor:
    """
    Cholesky factor of a symmetric positive-definite matrix.

    A single diagonal jitter of 1e-10 * trace / d is tried before giving up.

    Raises:
        NotPositiveDefinite: If the matrix is not SPD even after jitter
    """
    sigma = _as_square(sigma)
    sigma = 0.5 * (sigma + sigma.T)
    try:
        return CholeskyFactor(lower=linalg.cholesky(sigma, lower=True))
    except linalg.LinAlgError:
        pass
    d = sigma.shape[0]
    jitter = JITTER_FACTOR * np.trace(sigma) / d
    if not jitter > 0:
        raise NotPositiveDefinite("Matrix has a nonpositive trace")
    try:
        return CholeskyFactor(lower=linalg.cholesky(sigma + jitter * np.eye(d), lower=True))
    except linalg.LinAlgError:
        raise NotPositiveDefinite("Matrix is not positive definite")

def log_det_spd(sigma: np.ndarray) -> float:
    return cholesky_factor(sigma).log_det()

def conditional_normal_params(sigma: np.ndarray, j: int) -> ConditionalNormalParams:
    """
    Conditional distribution of error j given the other errors.

    Args:
        sigma (np.ndarray): d x d SPD covariance
        j (int): Outcome index, 0-based

    Returns:
        ConditionalNormalParams: Weights sigma_{j,-j} sigma_{-j,-j}^{-1} and
            variance sigma_jj - weights . sigma_{-j,j}

    Raises:
        NotPositiveDefinite: If the conditional variance is not positive
    """
    sigma = _as_square(sigma)
    d = sigma.shape[0]
    if not 0 <= j < d:
        raise InvalidParameter(f"Outcome index {j} out of range for d={d}")
    if d == 1:
        if sigma[0, 0] <= 0:
            raise NotPositiveDefinite("Variance must be positive")
        return ConditionalNormalParams(offset_weights=np.empty(0), conditional_variance=float(sigma[0, 0]))

    others = np.array([k for k in range(d) if k != j])
    factor = cholesky_factor(sigma[np.ix_(others, others)])
    cross = sigma[j, others]
    weights = factor.solve(cross)
    variance = float(sigma[j, j] - cross @ weights)
    if not variance > 0:
        raise NotPositiveDefinite(f"Conditional variance for outcome {j} is not positive")
    return ConditionalNormalParams(offset_weights=weights, conditional_variance=min(variance, float(sigma[j, j])))

def covariance_to_correlation(sigma: np.ndarray) -> np.ndarray:
    sd = np.sqrt(np.diagonal(sigma, axis1=-2, axis2=-1))
    corr = sigma / (sd[..., :, None] * sd[..., None, :])
    return corr

def build_covariance(sds, correlations) -> np.ndarray:
    """Covariance from standard deviations and a correlation matrix."""
    sds = np.asarray(sds, dtype=float)
    correlations = np.asarray(correlations, dtype=float)
    return correlations * np.outer(sds, sds)
