"""
Probit suBART sampler.

Binary outcomes are modelled through latent Z with Y = 1 exactly when Z > 0.
Trees are fit to Z the same way the continuous sampler fits scaled outcomes;
the error correlation matrix is updated by parameter-expanded
Metropolis-Hastings on W = D^{1/2} sigma D^{1/2}.
"""

import logging
import time
from typing import Dict, Optional, Tuple, Union

import numpy as np
from tqdm import tqdm

from config.config_template import ModelConfig
from src.core_model.chain import PosteriorChain
from src.core_model.dataset import Dataset
from src.core_model.scaling import identity_scaler
from src.distributions.linalg import cholesky_factor, covariance_to_correlation
from src.distributions.variates import (
    inverse_wishart_logpdf,
    random_generator,
    sample_inverse_wishart,
    sample_truncated_normal_array,
)
from src.priors.calibration import CalibratedPriors, calibrate_priors
from src.sampler.backfit import DrawRecorder, conditional_offsets, sweep_outcome
from src.sampler.state import ProbitState
from src.trees.forest import Forest
from src.utility_modules.enums import OutcomeMode
from src.utility_modules.error_handling import InvalidParameter, NotPositiveDefinite

logger = logging.getLogger(__name__)

# Median of the standard half-normal.
LATENT_START = 0.6745

def latent_log_likelihood(sigma: np.ndarray, residuals: np.ndarray) -> float:
    """-n/2 log det sigma - 1/2 sum_i e_i' sigma^-1 e_i."""
    factor = cholesky_factor(sigma)
    n = residuals.shape[0]
    quad = np.sum(residuals * factor.solve(residuals.T).T)
    return -0.5 * n * factor.log_det() - 0.5 * float(quad)

def expanded_prior_df(nu: float, d: int) -> float:
    return nu + d - 1

def pxmh_log_ratio(
    expanded: np.ndarray,
    proposal: np.ndarray,
    residuals: np.ndarray,
    nu: float,
    nu_prop: float,
) -> float:
    """
    Log acceptance ratio of a PX-MH move from W to W*.

    Target: inverse-Wishart(nu + d - 1, I) prior on W times the latent
    likelihood of the implied correlation matrix. Proposal:
    inverse-Wishart(nu_prop, nu_prop W).
    """
    d = expanded.shape[0]
    identity = np.eye(d)
    prior_df = expanded_prior_df(nu, d)
    log_prior = inverse_wishart_logpdf(proposal, prior_df, identity) - inverse_wishart_logpdf(expanded, prior_df, identity)
    log_lik = (
        latent_log_likelihood(covariance_to_correlation(proposal), residuals)
        - latent_log_likelihood(covariance_to_correlation(expanded), residuals)
    )
    log_q = (
        inverse_wishart_logpdf(expanded, nu_prop, nu_prop * proposal)
        - inverse_wishart_logpdf(proposal, nu_prop, nu_prop * expanded)
    )
    return float(log_prior + log_lik + log_q)

def split_expanded(expanded: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """W -> (sigma, diag(D)) with sigma exactly unit-diagonal."""
    expansion = np.diag(expanded).copy()
    sigma = covariance_to_correlation(expanded)
    sigma = 0.5 * (sigma + sigma.T)
    np.fill_diagonal(sigma, 1.0)
    return sigma, expansion

def update_sigma_probit_pxmh(
    state: ProbitState,
    nu: float,
    nu_prop: float,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray, bool]:
    """
    One PX-MH update of the correlation matrix and expansion diagonal.

    A proposal that is not SPD is rejected.

    Returns:
        Tuple[np.ndarray, np.ndarray, bool]: (sigma, diag(D), accepted)
    """
    d = state.d
    if nu_prop <= d - 1:
        raise InvalidParameter(f"nu_prop must exceed d - 1 = {d - 1}, got {nu_prop}")
    expanded = state.expanded
    state.px_attempts += 1
    try:
        proposal = sample_inverse_wishart(nu_prop, nu_prop * expanded, rng)
        cholesky_factor(proposal)
        log_ratio = pxmh_log_ratio(expanded, proposal, state.residuals(), nu, nu_prop)
    except NotPositiveDefinite:
        logger.debug("PX-MH proposal not positive definite, rejected")
        return state.sigma, state.expansion, False
    if np.log(rng.random()) < min(0.0, log_ratio):
        state.sigma, state.expansion = split_expanded(proposal)
        state.px_accept_count += 1
        return state.sigma, state.expansion, True
    return state.sigma, state.expansion, False

def update_latent_column(state: ProbitState, j: int, offsets: np.ndarray, v: float, rng: np.random.Generator) -> None:
    """Redraw Z[:, j] from one-sided truncated normals with mean fit_j + u and variance v."""
    mean = state.forests[j].total + offsets
    state.latent[:, j] = sample_truncated_normal_array(mean, np.sqrt(v), state.labels[:, j] == 1, rng)

def initial_state(labels: np.ndarray, n_trees: int) -> ProbitState:
    n, d = labels.shape
    return ProbitState(
        forests=[Forest(n_trees, n) for _ in range(d)],
        sigma=np.eye(d),
        expansion=np.ones(d),
        latent=np.where(labels == 1, LATENT_START, -LATENT_START).astype(float),
        labels=labels.astype(int),
    )

def fit_probit(
    dataset: Dataset,
    config: ModelConfig,
    priors: Optional[CalibratedPriors] = None,
    prediction_sets: Optional[Dict[str, np.ndarray]] = None,
    seed: Union[None, int, np.random.SeedSequence] = None,
) -> PosteriorChain:
    """
    Run one probit suBART chain.

    PX-MH is skipped when d = 1 or when the independence flag is set; sigma
    then stays at the identity.

    Returns:
        PosteriorChain: Retained draws with latent-scale fits
    """
    if dataset.mode != OutcomeMode.PROBIT:
        raise InvalidParameter("fit_probit needs a binary dataset")
    config = config.model_copy(update={"mode": OutcomeMode.PROBIT}).resolved(dataset.n, dataset.d)
    priors = priors or calibrate_priors(dataset, config)
    rng = random_generator(config.seed if seed is None else seed)

    state = initial_state(dataset.outcomes, config.n_trees)
    use_px = state.d > 1 and not config.independence_flag
    recorder = DrawRecorder(dataset, config, prediction_sets, with_px=use_px)
    covariates = dataset.covariates
    is_categorical = dataset.is_categorical
    use_offsets = config.use_offsets and not config.independence_flag

    logger.info(
        f"Starting probit fit: n={dataset.n}, d={dataset.d}, m={config.n_trees}, "
        f"iterations={config.n_mcmc} (burn-in {config.n_burnin}), nu_prop={config.nu_prop:g}"
    )
    started = time.perf_counter()
    accept = np.empty(state.d)
    for iteration in tqdm(range(config.n_mcmc), desc="probit suBART", disable=not config.show_progress):
        for j, forest in enumerate(state.forests):
            offsets, v = conditional_offsets(state.residuals(), state.sigma, j, use_offsets)
            accept[j] = sweep_outcome(
                forest, state.latent[:, j], offsets, v, priors.leaf_sd[j],
                covariates, is_categorical, config, rng,
            )
            update_latent_column(state, j, offsets, v, rng)
        accepted = None
        if use_px:
            _, _, accepted = update_sigma_probit_pxmh(state, config.nu, config.nu_prop, rng)
        state.iteration = iteration + 1

        recorder.record_iteration(iteration, state.sigma, accept, sigma_accepted=accepted)
        if iteration >= config.n_burnin:
            recorder.record_draw(iteration, state.forests, state.fits(), latent=state.latent)

    elapsed = time.perf_counter() - started
    if use_px:
        logger.info(f"Finished probit fit in {elapsed:.1f}s; PX-MH acceptance {state.px_accept_rate:.3f}")
    else:
        logger.info(f"Finished probit fit in {elapsed:.1f}s")
    return recorder.to_chain(identity_scaler(dataset.d), config.seed)
