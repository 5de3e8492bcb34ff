"""
Continuous suBART sampler.

Outcomes are min-max scaled to [-0.5, 0.5]. Each sweep updates the trees of
every outcome in index order against conditional-normal adjusted residuals,
then the auxiliary a's, then the error covariance.
"""

import logging
import time
from typing import Dict, Optional, Tuple, Union

import numpy as np
from tqdm import tqdm

from config.config_template import ModelConfig
from src.core_model.chain import PosteriorChain
from src.core_model.dataset import Dataset
from src.core_model.scaling import fit_scaler
from src.distributions.linalg import cholesky_factor
from src.distributions.variates import random_generator, sample_inverse_gamma, sample_inverse_wishart
from src.priors.calibration import CalibratedPriors, calibrate_priors
from src.sampler.backfit import DrawRecorder, conditional_offsets, sweep_outcome
from src.sampler.state import ContinuousState
from src.trees.forest import Forest
from src.utility_modules.enums import OutcomeMode
from src.utility_modules.error_handling import InvalidParameter

logger = logging.getLogger(__name__)

SeedLike = Union[None, int, np.random.SeedSequence]

def a_conditional_params(sigma: np.ndarray, scales: np.ndarray, nu: float, independent: bool = False) -> Tuple[float, np.ndarray]:
    """
    Inverse-gamma (shape, scale) of every a_j given sigma.

    Joint prior: shape (nu + d) / 2 and scale 1/A_j^2 + nu (sigma^-1)_jj.
    Independent half-t hierarchy: shape (nu + 1) / 2 and scale 1/A_j^2 + nu / sigma_jj.
    """
    sigma = np.atleast_2d(sigma)
    scales = np.atleast_1d(np.asarray(scales, dtype=float))
    d = sigma.shape[0]
    if independent:
        return 0.5 * (nu + 1.0), 1.0 / scales ** 2 + nu / np.diag(sigma)
    precision_diag = np.diag(cholesky_factor(sigma).solve(np.eye(d)))
    return 0.5 * (nu + d), 1.0 / scales ** 2 + nu * precision_diag

def update_a(sigma: np.ndarray, scales: np.ndarray, nu: float, rng: np.random.Generator, independent: bool = False) -> np.ndarray:
    """Draw the auxiliary a_j of every outcome from their inverse-gamma full conditionals."""
    shape, scale = a_conditional_params(sigma, scales, nu, independent)
    return np.asarray(sample_inverse_gamma(shape, scale, rng, size=scale.shape[0]), dtype=float)

def sigma_posterior_params(residuals: np.ndarray, a: np.ndarray, nu: float) -> Tuple[float, np.ndarray]:
    """Inverse-Wishart (df, scale) of sigma given residuals and a: (nu + d - 1 + n, 2 nu diag(1/a) + S)."""
    n, d = residuals.shape
    return nu + d - 1 + n, 2.0 * nu * np.diag(1.0 / np.asarray(a, dtype=float)) + residuals.T @ residuals

def update_sigma_continuous(
    residuals: np.ndarray,
    a: np.ndarray,
    nu: float,
    rng: np.random.Generator,
    independent: bool = False,
) -> np.ndarray:
    """
    Draw the error covariance from its full conditional.

    In independent mode every variance is drawn separately from
    InvGamma((nu + n) / 2, nu / a_j + S_jj / 2) and off-diagonals are zero.

    Raises:
        NotPositiveDefinite: If the scale matrix is not SPD
    """
    residuals = np.atleast_2d(residuals)
    if independent:
        n = residuals.shape[0]
        ss = np.sum(residuals * residuals, axis=0)
        variances = sample_inverse_gamma(0.5 * (nu + n), nu / np.asarray(a, dtype=float) + 0.5 * ss, rng, size=ss.shape[0])
        return np.diag(np.asarray(variances, dtype=float))
    df, scale = sigma_posterior_params(residuals, a, nu)
    return sample_inverse_wishart(df, scale, rng)

def initial_state(outcomes: np.ndarray, n_trees: int, priors: CalibratedPriors) -> ContinuousState:
    """Stumps at zero, sigma = diag(sigma_hat^2) and a = A^2."""
    n, d = outcomes.shape
    return ContinuousState(
        forests=[Forest(n_trees, n) for _ in range(d)],
        sigma=np.diag(priors.sigma_hat ** 2),
        a=priors.half_t_scale ** 2,
        outcomes=outcomes,
    )

def fit_continuous(
    dataset: Dataset,
    config: ModelConfig,
    priors: Optional[CalibratedPriors] = None,
    prediction_sets: Optional[Dict[str, np.ndarray]] = None,
    seed: SeedLike = None,
) -> PosteriorChain:
    """
    Run one continuous suBART chain.

    Args:
        dataset (Dataset): Validated continuous dataset
        config (ModelConfig): Model settings
        priors (Optional[CalibratedPriors]): Calibrated priors; computed when omitted
        prediction_sets (Optional[Dict[str, np.ndarray]]): Extra covariate matrices
            evaluated at every retained draw
        seed: Seed for this chain; defaults to config.seed

    Returns:
        PosteriorChain: Retained draws with fits in original units
    """
    if dataset.mode != OutcomeMode.CONTINUOUS:
        raise InvalidParameter("fit_continuous needs a continuous dataset")
    config = config.model_copy(update={"mode": OutcomeMode.CONTINUOUS}).resolved(dataset.n, dataset.d)
    priors = priors or calibrate_priors(dataset, config)
    rng = random_generator(config.seed if seed is None else seed)

    scaler = fit_scaler(dataset.outcomes)
    state = initial_state(scaler.forward(dataset.outcomes), config.n_trees, priors)
    recorder = DrawRecorder(dataset, config, prediction_sets, with_a=True)
    covariates = dataset.covariates
    is_categorical = dataset.is_categorical
    independent = config.independence_flag

    logger.info(
        f"Starting continuous fit: n={dataset.n}, d={dataset.d}, m={config.n_trees}, "
        f"iterations={config.n_mcmc} (burn-in {config.n_burnin}), independent={independent}"
    )
    started = time.perf_counter()
    accept = np.empty(state.d)
    for iteration in tqdm(range(config.n_mcmc), desc="suBART", disable=not config.show_progress):
        for j, forest in enumerate(state.forests):
            offsets, v = conditional_offsets(state.residuals(), state.sigma, j, config.use_offsets and not independent)
            accept[j] = sweep_outcome(
                forest, state.outcomes[:, j], offsets, v, priors.leaf_sd[j],
                covariates, is_categorical, config, rng,
            )
        state.a = update_a(state.sigma, priors.half_t_scale, config.nu, rng, independent)
        state.sigma = update_sigma_continuous(state.residuals(), state.a, config.nu, rng, independent)
        state.iteration = iteration + 1

        recorder.record_iteration(iteration, state.sigma, accept, a=state.a)
        if iteration >= config.n_burnin:
            recorder.record_draw(iteration, state.forests, scaler.inverse(state.fits()))

    logger.info(
        f"Finished continuous fit in {time.perf_counter() - started:.1f}s; "
        f"mean tree acceptance {recorder.tree_accept.mean():.3f}"
    )
    return recorder.to_chain(scaler, config.seed)

def sample_prior_only_a_sigma(
    scales: np.ndarray,
    nu: float,
    n_iter: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Gibbs sampler on (a, sigma) with no data.

    The marginal of each sqrt(sigma_jj) is half-t(nu, A_j), which makes this a
    check on the a and sigma conditionals.

    Returns:
        np.ndarray: n_iter x d x d covariance draws
    """
    scales = np.atleast_1d(np.asarray(scales, dtype=float))
    d = scales.shape[0]
    sigma = np.diag(scales ** 2)
    draws = np.empty((n_iter, d, d))
    empty = np.empty((0, d))
    for k in range(n_iter):
        a = update_a(sigma, scales, nu, rng)
        sigma = update_sigma_continuous(empty, a, nu, rng)
        draws[k] = sigma
    return draws
