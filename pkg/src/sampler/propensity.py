"""
Propensity scores from univariate probit BART.
"""

import logging
from dataclasses import replace
from typing import Optional, Union

import numpy as np
from scipy import special

from config.config_template import ModelConfig
from src.core_model.dataset import Dataset
from src.sampler.probit import fit_probit
from src.utility_modules.enums import OutcomeMode
from src.utility_modules.error_handling import AllOneTreatment, ValidationFailure

logger = logging.getLogger(__name__)

def treatment_dataset(dataset: Dataset) -> Dataset:
    """The covariates of a dataset with its treatment column as the only (binary) outcome."""
    if dataset.treatment is None:
        raise ValidationFailure("Dataset has no treatment column")
    treatment = np.asarray(dataset.treatment, dtype=float).reshape(-1)
    if np.all(treatment == treatment[0]):
        raise AllOneTreatment(f"Every row has treatment {int(treatment[0])}; propensity scores are undefined")
    return replace(
        dataset,
        outcomes=treatment.reshape(-1, 1),
        mode=OutcomeMode.PROBIT,
        outcome_names=(dataset.treatment_name,),
        treatment=None,
    )

def fit_propensity(
    dataset: Dataset,
    config: Optional[ModelConfig] = None,
    seed: Union[None, int, np.random.SeedSequence] = None,
) -> np.ndarray:
    """
    Posterior-mean propensity score of every row.

    Fits probit BART of the treatment on the covariates and averages Phi of
    the latent fit over retained draws. The run length follows the given
    config, so a continuous config keeps its own iteration counts.

    Raises:
        AllOneTreatment: If every row has the same treatment
    """
    config = config or ModelConfig(mode=OutcomeMode.PROBIT)
    n_mcmc, n_burnin = config.iterations()
    probit_config = config.model_copy(update={
        "mode": OutcomeMode.PROBIT,
        "n_mcmc": n_mcmc,
        "n_burnin": n_burnin,
        "independence_flag": False,
        "keep_forests": False,
        "store_latent": False,
    })
    chain = fit_probit(treatment_dataset(dataset), probit_config, seed=seed)
    scores = special.ndtr(chain.fitted_values[:, :, 0]).mean(axis=0)
    logger.info(f"Propensity scores: mean={scores.mean():.3f}, range=[{scores.min():.3f}, {scores.max():.3f}]")
    return scores
