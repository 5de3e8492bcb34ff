"""
Single- and multi-chain entry points.
"""

import logging
from typing import Dict, Optional, Union

import numpy as np
from joblib import Parallel, delayed

from config.config_template import ModelConfig
from src.core_model.chain import PosteriorChain
from src.core_model.dataset import Dataset
from src.priors.calibration import CalibratedPriors, calibrate_priors
from src.sampler.continuous import fit_continuous
from src.sampler.probit import fit_probit
from src.utility_modules.enums import OutcomeMode

logger = logging.getLogger(__name__)

def fit_model(
    dataset: Dataset,
    config: ModelConfig,
    priors: Optional[CalibratedPriors] = None,
    prediction_sets: Optional[Dict[str, np.ndarray]] = None,
    seed: Union[None, int, np.random.SeedSequence] = None,
) -> PosteriorChain:
    """Run one chain with the sampler matching the dataset's outcome mode."""
    if dataset.mode == OutcomeMode.PROBIT:
        return fit_probit(dataset, config, priors, prediction_sets, seed)
    return fit_continuous(dataset, config, priors, prediction_sets, seed)

def run_chains(
    dataset: Dataset,
    config: ModelConfig,
    priors: Optional[CalibratedPriors] = None,
    n_chains: Optional[int] = None,
    prediction_sets: Optional[Dict[str, np.ndarray]] = None,
    n_jobs: Optional[int] = None,
) -> PosteriorChain:
    """
    Run independent chains and stack their retained draws.

    Chain seeds are spawned from SeedSequence(config.seed), so the result is
    reproducible for a fixed seed and chain count. A single chain uses the
    seed directly.

    Args:
        dataset (Dataset): Validated dataset
        config (ModelConfig): Model settings
        priors (Optional[CalibratedPriors]): Shared priors; calibrated once when omitted
        n_chains (Optional[int]): Chains to run; defaults to config.n_chains
        prediction_sets (Optional[Dict[str, np.ndarray]]): Extra covariate matrices
            evaluated at every retained draw
        n_jobs (Optional[int]): Parallel workers; defaults to one per chain

    Returns:
        PosteriorChain: Concatenated chain
    """
    config = config.model_copy(update={"mode": dataset.mode})
    n_chains = n_chains or config.n_chains
    priors = priors or calibrate_priors(dataset, config)
    if n_chains == 1:
        return fit_model(dataset, config, priors, prediction_sets)

    seeds = np.random.SeedSequence(config.seed).spawn(n_chains)
    logger.info(f"Running {n_chains} chains")
    chains = Parallel(n_jobs=n_jobs or n_chains)(
        delayed(fit_model)(dataset, config, priors, prediction_sets, seed) for seed in seeds
    )
    return PosteriorChain.concatenate(chains)
