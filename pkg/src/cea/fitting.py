"""
Propensity-augmented suBART fits for cost-effectiveness analysis.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from config.config_template import ModelConfig
from src.core_model.chain import PosteriorChain
from src.core_model.dataset import Dataset
from src.cea.effects import treatment_prediction_sets
from src.sampler.propensity import fit_propensity
from src.sampler.runner import run_chains
from src.utility_modules.enums import OutcomeMode
from src.utility_modules.error_handling import ValidationFailure

logger = logging.getLogger(__name__)

PROPENSITY_COLUMN = "propensity_score"

@dataclass
class CeaFit:
    chain: PosteriorChain
    design: Dataset
    propensity: Optional[np.ndarray]

def cea_design(dataset: Dataset, propensity: Optional[np.ndarray] = None) -> Dataset:
    """Covariates plus the treatment column and, when given, the propensity score column."""
    if dataset.treatment is None:
        raise ValidationFailure("Cost-effectiveness fits need a treatment column")
    design = dataset.with_covariate(dataset.treatment_name, dataset.treatment)
    if propensity is not None:
        design = design.with_covariate(PROPENSITY_COLUMN, propensity)
    return design

def cea_fit(
    dataset: Dataset,
    config: ModelConfig,
    use_propensity: bool = True,
    propensity_seed: Optional[int] = None,
) -> CeaFit:
    """
    Fit continuous suBART on (x, t) or (x, t, ps).

    The propensity score is a fixed point estimate from probit BART of t on x.
    Treated and control evaluations of every retained draw are stored on the
    chain, with the score column held at its observed value.

    Args:
        dataset (Dataset): Continuous dataset with a treatment column
        config (ModelConfig): Model settings for both fits
        use_propensity (bool): Append the estimated propensity score
        propensity_seed (Optional[int]): Seed for the propensity fit; defaults to config.seed

    Returns:
        CeaFit: Chain, fitted design and propensity scores (None when not used)
    """
    if dataset.mode != OutcomeMode.CONTINUOUS:
        raise ValidationFailure("Cost-effectiveness outcomes must be continuous")
    propensity = None
    if use_propensity:
        propensity = fit_propensity(dataset, config, seed=propensity_seed if propensity_seed is not None else config.seed)
    design = cea_design(dataset, propensity)
    column = design.covariate_names.index(dataset.treatment_name)
    logger.info(f"Fitting CEA model on {design.p} covariates (propensity={'on' if use_propensity else 'off'})")
    chain = run_chains(design, config, prediction_sets=treatment_prediction_sets(design.covariates, column))
    return CeaFit(chain=chain, design=design, propensity=propensity)
