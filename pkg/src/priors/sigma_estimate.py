"""
Data-based overestimates of the residual standard deviations.
"""

import logging
from typing import Optional

import numpy as np
from sklearn.linear_model import LassoCV
from sklearn.model_selection import KFold

from src.core_model.dataset import Dataset
from src.utility_modules.error_handling import DegenerateDesign

logger = logging.getLogger(__name__)

CV_FOLDS = 5

def _ols_residual_sd(design: np.ndarray, outcome: np.ndarray) -> float:
    with_intercept = np.column_stack([np.ones(design.shape[0]), design])
    coef, _, rank, _ = np.linalg.lstsq(with_intercept, outcome, rcond=None)
    residuals = outcome - with_intercept @ coef
    dof = outcome.shape[0] - rank
    return float(np.sqrt(residuals @ residuals / dof))

def _lasso_residual_sd(design: np.ndarray, outcome: np.ndarray, seed: Optional[int]) -> float:
    folds = KFold(n_splits=min(CV_FOLDS, outcome.shape[0]), shuffle=True, random_state=seed)
    model = LassoCV(cv=folds, random_state=seed).fit(design, outcome)
    residuals = outcome - model.predict(design)
    dof = max(outcome.shape[0] - int(np.count_nonzero(model.coef_)) - 1, 1)
    return float(np.sqrt(residuals @ residuals / dof))

def estimate_sigma_hat(dataset: Dataset, outcomes: Optional[np.ndarray] = None, seed: Optional[int] = None) -> np.ndarray:
    """
    Residual standard deviation of a linear fit of each outcome on all covariates.

    Categorical covariates are dummy-encoded. When the encoded design has as
    many columns as rows (n <= p + 1), a 5-fold cross-validated lasso replaces
    ordinary least squares.

    Args:
        dataset (Dataset): Training data
        outcomes (Optional[np.ndarray]): Outcomes to use instead of dataset.outcomes
            (the scaled outcomes during calibration)
        seed (Optional[int]): Seed for the cross-validation folds

    Returns:
        np.ndarray: Positive overestimate per outcome

    Raises:
        DegenerateDesign: If every covariate is constant
    """
    outcomes = dataset.outcomes if outcomes is None else np.asarray(outcomes, dtype=float)
    design = dataset.dummy_matrix()
    varying = design.max(axis=0) > design.min(axis=0) if design.size else np.zeros(0, dtype=bool)
    if not varying.any():
        raise DegenerateDesign("All covariates are constant")
    design = design[:, varying]
    n, p_encoded = design.shape
    use_lasso = n <= p_encoded + 1
    if use_lasso:
        logger.info(f"n={n} <= p+1={p_encoded + 1}, estimating sigma with cross-validated lasso")

    result = np.empty(outcomes.shape[1])
    for j in range(outcomes.shape[1]):
        y = outcomes[:, j]
        sd = _lasso_residual_sd(design, y, seed) if use_lasso else _ols_residual_sd(design, y)
        if not np.isfinite(sd) or sd <= 0:
            sd = float(np.std(y, ddof=1))
            logger.warning(f"Linear fit of outcome {j} is exact; using the marginal sd {sd:.6g} instead")
        result[j] = sd
    return result
