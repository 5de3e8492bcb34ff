"""
Prior construction and calibration.
"""

from src.priors.tree_prior import tree_split_probability, sample_tree_topology, leaf_prior_sd
from src.priors.half_t import (
    half_t_cdf,
    calibrate_half_t_scale,
    implied_correlation_log_density,
    sample_prior_covariance,
)
from src.priors.sigma_estimate import estimate_sigma_hat
from src.priors.calibration import CalibratedPriors, calibrate_priors, calibration_report

__all__ = [
    'tree_split_probability',
    'sample_tree_topology',
    'leaf_prior_sd',
    'half_t_cdf',
    'calibrate_half_t_scale',
    'implied_correlation_log_density',
    'sample_prior_covariance',
    'estimate_sigma_hat',
    'CalibratedPriors',
    'calibrate_priors',
    'calibration_report',
]
