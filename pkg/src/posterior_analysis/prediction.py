"""
Posterior predictive summaries.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy import special

from src.core_model.chain import PosteriorChain
from src.distributions.linalg import cholesky_factor
from src.utility_modules.enums import OutcomeMode
from src.utility_modules.error_handling import InvalidParameter

@dataclass
class PredictiveSummary:
    """
    Per-row, per-outcome posterior mean and equal-tailed predictive interval.

    For probit chains the values are probabilities Phi(z) and the interval is
    a credible interval for the probability.
    """
    mode: OutcomeMode
    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    level: float
    draws: Optional[np.ndarray] = None

    def to_frame(self, outcome_names: Optional[Sequence[str]] = None) -> pd.DataFrame:
        """Long format with columns row, outcome, mean, lo, hi (n * d rows)."""
        n, d = self.mean.shape
        names = list(outcome_names) if outcome_names else [f"y{j + 1}" for j in range(d)]
        return pd.DataFrame({
            "row": np.repeat(np.arange(n), d),
            "outcome": np.tile(names, n),
            "mean": self.mean.reshape(-1),
            "lo": self.lower.reshape(-1),
            "hi": self.upper.reshape(-1),
        })

def add_error_noise(fits: np.ndarray, sigma_draws: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Add one MVN(0, sigma_r) error vector to every row of every draw r."""
    out = np.array(fits, dtype=float, copy=True)
    n_draws, n, d = out.shape
    for r in range(n_draws):
        sigma = sigma_draws[r]
        if not np.any(sigma):
            continue
        lower = cholesky_factor(sigma).lower
        out[r] += rng.standard_normal((n, d)) @ lower.T
    return out

def predict(
    chain: PosteriorChain,
    covariates: Optional[np.ndarray] = None,
    level: float = 0.5,
    rng: Optional[np.random.Generator] = None,
    include_noise: bool = True,
    keep_draws: bool = False,
    prediction_set: Optional[str] = None,
) -> PredictiveSummary:
    """
    Predict from every retained draw.

    Args:
        chain (PosteriorChain): Fitted chain
        covariates (Optional[np.ndarray]): New rows in encoded form; the training
            fits are used when omitted
        level (float): Interval level
        rng (Optional[np.random.Generator]): Generator for predictive noise
        include_noise (bool): Add MVN(0, sigma) noise (continuous chains only)
        keep_draws (bool): Keep the per-draw predictive values on the summary
        prediction_set (Optional[str]): Name of fits evaluated during sampling
            (``chain.extra_fits``); takes precedence over ``covariates``

    Returns:
        PredictiveSummary: Means and intervals in original units (probabilities for probit)

    Raises:
        UnknownCategoryLevel: If a categorical column holds a level unseen in training
    """
    if not 0 < level < 1:
        raise InvalidParameter(f"Interval level must lie in (0, 1), got {level}")
    if prediction_set is not None:
        if prediction_set not in chain.extra_fits:
            raise InvalidParameter(f"Chain has no stored prediction set {prediction_set!r}")
        fits = chain.extra_fits[prediction_set]
    elif covariates is not None:
        fits = chain.evaluate(covariates)
    else:
        fits = chain.fitted_values

    if chain.mode == OutcomeMode.PROBIT:
        draws = special.ndtr(fits)
    elif include_noise:
        draws = add_error_noise(fits, chain.sigma_original_units(), rng or np.random.default_rng(chain.seed))
    else:
        draws = fits

    tail = 0.5 * (1.0 - level)
    lower, upper = np.quantile(draws, [tail, 1.0 - tail], axis=0)
    return PredictiveSummary(
        mode=chain.mode,
        mean=draws.mean(axis=0) if chain.mode == OutcomeMode.PROBIT else fits.mean(axis=0),
        lower=lower,
        upper=upper,
        level=level,
        draws=draws if keep_draws else None,
    )
