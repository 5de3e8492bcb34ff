"""
Metropolis-within-Gibbs samplers.
"""

from src.sampler.state import ContinuousState, ProbitState
from src.sampler.backfit import conditional_offsets, sweep_outcome, DrawRecorder
from src.sampler.continuous import (
    a_conditional_params,
    update_a,
    sigma_posterior_params,
    update_sigma_continuous,
    fit_continuous,
    sample_prior_only_a_sigma,
)
from src.sampler.probit import (
    latent_log_likelihood,
    pxmh_log_ratio,
    split_expanded,
    update_sigma_probit_pxmh,
    update_latent_column,
    fit_probit,
)
from src.sampler.propensity import fit_propensity, treatment_dataset
from src.sampler.runner import fit_model, run_chains

__all__ = [
    'ContinuousState',
    'ProbitState',
    'conditional_offsets',
    'sweep_outcome',
    'DrawRecorder',
    'a_conditional_params',
    'update_a',
    'sigma_posterior_params',
    'update_sigma_continuous',
    'fit_continuous',
    'sample_prior_only_a_sigma',
    'latent_log_likelihood',
    'pxmh_log_ratio',
    'split_expanded',
    'update_sigma_probit_pxmh',
    'update_latent_column',
    'fit_probit',
    'fit_propensity',
    'treatment_dataset',
    'fit_model',
    'run_chains',
]
