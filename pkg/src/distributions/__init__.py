"""
Random variates and covariance algebra used by the samplers.
"""

from src.distributions.linalg import (
    CholeskyFactor,
    ConditionalNormalParams,
    cholesky_factor,
    conditional_normal_params,
    covariance_to_correlation,
    build_covariance,
    log_det_spd,
)
from src.distributions.variates import (
    sample_mvn,
    sample_inverse_gamma,
    sample_inverse_wishart,
    inverse_wishart_logpdf,
    sample_half_t,
    sample_truncated_normal,
    sample_truncated_normal_array,
    random_generator,
)

__all__ = [
    'CholeskyFactor',
    'ConditionalNormalParams',
    'cholesky_factor',
    'conditional_normal_params',
    'covariance_to_correlation',
    'build_covariance',
    'log_det_spd',
    'sample_mvn',
    'sample_inverse_gamma',
    'sample_inverse_wishart',
    'inverse_wishart_logpdf',
    'sample_half_t',
    'sample_truncated_normal',
    'sample_truncated_normal_array',
    'random_generator',
]
