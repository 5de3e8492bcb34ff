"""
Prior calibration for a fit.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from config.config_template import ModelConfig
from src.core_model.dataset import Dataset
from src.core_model.scaling import fit_scaler
from src.priors.half_t import calibrate_half_t_scale
from src.priors.sigma_estimate import estimate_sigma_hat
from src.priors.tree_prior import leaf_prior_sd
from src.utility_modules.enums import OutcomeMode

logger = logging.getLogger(__name__)

@dataclass(frozen=True)
class CalibratedPriors:
    """Per-outcome prior settings. Scales are in scaled outcome units."""
    mode: OutcomeMode
    leaf_sd: np.ndarray
    nu: float
    alpha_sigma: float
    kappa: float
    q_z: float
    sigma_hat: Optional[np.ndarray] = None
    half_t_scale: Optional[np.ndarray] = None

def calibrate_priors(dataset: Dataset, config: ModelConfig) -> CalibratedPriors:
    """
    Compute sigma overestimates, half-t scales and leaf prior scales.

    Continuous outcomes are scaled to [-0.5, 0.5] before estimating sigma.
    Probit fits only need the leaf prior scale.
    """
    leaf_sd = np.full(dataset.d, leaf_prior_sd(config.mode, config.n_trees, config.kappa, config.q_z))
    if config.mode == OutcomeMode.PROBIT:
        return CalibratedPriors(
            mode=config.mode,
            leaf_sd=leaf_sd,
            nu=config.nu,
            alpha_sigma=config.alpha_sigma,
            kappa=config.kappa,
            q_z=config.q_z,
        )

    scaled = fit_scaler(dataset.outcomes).forward(dataset.outcomes)
    sigma_hat = estimate_sigma_hat(dataset, scaled, seed=config.seed)
    half_t_scale = np.array([calibrate_half_t_scale(s, config.nu, config.alpha_sigma) for s in sigma_hat])
    logger.info(f"Calibrated priors: sigma_hat={np.round(sigma_hat, 6).tolist()}, A={np.round(half_t_scale, 6).tolist()}")
    return CalibratedPriors(
        mode=config.mode,
        leaf_sd=leaf_sd,
        nu=config.nu,
        alpha_sigma=config.alpha_sigma,
        kappa=config.kappa,
        q_z=config.q_z,
        sigma_hat=sigma_hat,
        half_t_scale=half_t_scale,
    )

def calibration_report(priors: CalibratedPriors, outcome_names=None) -> Dict[str, Any]:
    """JSON-ready per-outcome calibration summary."""
    d = priors.leaf_sd.shape[0]
    names = list(outcome_names) if outcome_names else [f"y{j + 1}" for j in range(d)]
    outcomes = []
    for j in range(d):
        entry = {"outcome": names[j], "leaf_sd": float(priors.leaf_sd[j])}
        if priors.sigma_hat is not None:
            entry["sigma_hat"] = float(priors.sigma_hat[j])
            entry["half_t_scale"] = float(priors.half_t_scale[j])
        outcomes.append(entry)
    return {
        "mode": priors.mode.value,
        "nu": priors.nu,
        "alpha_sigma": priors.alpha_sigma,
        "kappa": priors.kappa,
        "q_z": priors.q_z,
        "units": "scaled outcomes in [-0.5, 0.5]" if priors.mode == OutcomeMode.CONTINUOUS else "latent",
        "outcomes": outcomes,
    }
