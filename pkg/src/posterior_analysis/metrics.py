"""
Evaluation metrics for predictions and parameter estimates.

Per-outcome metrics accept n-vectors or n x d matrices and return one value
per outcome column.
"""

from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.utility_modules.error_handling import InsufficientDraws, InvalidParameter, LengthMismatch

PROBABILITY_CLIP = 1e-12

def _as_columns(values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return values.reshape(-1, 1) if values.ndim == 1 else values

def _paired(predicted, truth) -> Tuple[np.ndarray, np.ndarray]:
    predicted, truth = _as_columns(predicted), _as_columns(truth)
    if predicted.shape != truth.shape:
        raise LengthMismatch(f"Predictions have shape {predicted.shape}, truth has shape {truth.shape}")
    return predicted, truth

def rmse(predicted, truth) -> np.ndarray:
    """Root mean squared error per outcome."""
    predicted, truth = _paired(predicted, truth)
    return np.sqrt(np.mean((predicted - truth) ** 2, axis=0))

def crps(draws, truth) -> np.ndarray:
    """
    Mean CRPS per outcome from predictive draws.

    Uses the all-pairs estimator mean|X - y| - 1/2 mean|X - X'| where the
    second mean runs over all R^2 ordered pairs, computed from sorted draws.

    Args:
        draws: R x n or R x n x d predictive draws
        truth: n or n x d observed values

    Raises:
        InsufficientDraws: If fewer than two draws are given
    """
    draws = np.asarray(draws, dtype=float)
    if draws.ndim == 2:
        draws = draws[:, :, None]
    truth = _as_columns(truth)
    n_draws = draws.shape[0]
    if n_draws < 2:
        raise InsufficientDraws(f"CRPS needs at least 2 draws, got {n_draws}")
    if draws.shape[1:] != truth.shape:
        raise LengthMismatch(f"Draws have shape {draws.shape[1:]} per draw, truth has shape {truth.shape}")

    spread_to_truth = np.mean(np.abs(draws - truth[None]), axis=0)
    ordered = np.sort(draws, axis=0)
    weights = 2.0 * np.arange(1, n_draws + 1) - n_draws - 1
    pair_sum = 2.0 * np.tensordot(weights, ordered, axes=(0, 0))
    score = spread_to_truth - 0.5 * pair_sum / n_draws ** 2
    return score.mean(axis=0)

def log_loss(probabilities, truth) -> np.ndarray:
    """Mean binary log loss per outcome, probabilities clipped at 1e-12."""
    probabilities, truth = _paired(probabilities, truth)
    p = np.clip(probabilities, PROBABILITY_CLIP, 1.0 - PROBABILITY_CLIP)
    return -np.mean(truth * np.log(p) + (1.0 - truth) * np.log1p(-p), axis=0)

def accuracy(probabilities, truth, threshold: float = 0.5) -> np.ndarray:
    probabilities, truth = _paired(probabilities, truth)
    return np.mean((probabilities > threshold).astype(float) == truth, axis=0)

def constant_rate_log_loss(train_truth, test_truth) -> np.ndarray:
    """Log loss of predicting every test row with the training rate of each outcome."""
    train_truth, test_truth = _as_columns(train_truth), _as_columns(test_truth)
    rate = np.broadcast_to(train_truth.mean(axis=0), test_truth.shape)
    return log_loss(rate, test_truth)

def interval_coverage(lower, upper, truth) -> np.ndarray:
    """Fraction of truths inside [lower, upper], per outcome."""
    lower, truth = _paired(lower, truth)
    upper, _ = _paired(upper, truth)
    return np.mean((truth >= lower) & (truth <= upper), axis=0)

def parameter_ci(draws, level: float = 0.5) -> Tuple[float, float]:
    """Equal-tailed empirical quantile interval of scalar draws."""
    if not 0 < level < 1:
        raise InvalidParameter(f"Interval level must lie in (0, 1), got {level}")
    tail = 0.5 * (1.0 - level)
    lo, hi = np.quantile(np.asarray(draws, dtype=float).reshape(-1), [tail, 1.0 - tail])
    return float(lo), float(hi)

def metrics_table(
    metrics: Dict[str, np.ndarray],
    outcome_names: Optional[Sequence[str]] = None,
    **keys,
) -> pd.DataFrame:
    """
    Long-format metric rows.

    Args:
        metrics (Dict[str, np.ndarray]): Metric name to per-outcome values
        outcome_names (Optional[Sequence[str]]): Outcome labels
        **keys: Constant key columns such as replicate or variant

    Returns:
        pd.DataFrame: Columns ``*keys, outcome, metric, value``
    """
    rows = []
    for metric, values in metrics.items():
        values = np.atleast_1d(np.asarray(values, dtype=float))
        names = list(outcome_names) if outcome_names else [f"y{j + 1}" for j in range(values.shape[0])]
        for name, value in zip(names, values):
            rows.append({**keys, "outcome": name, "metric": metric, "value": float(value)})
    return pd.DataFrame(rows, columns=[*keys, "outcome", "metric", "value"])
