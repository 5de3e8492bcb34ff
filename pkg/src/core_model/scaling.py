"""
Min-max outcome scaling onto [-0.5, 0.5].
"""

from dataclasses import dataclass

import numpy as np

from src.utility_modules.error_handling import ConstantOutcome, DimensionMismatch

@dataclass(frozen=True)
class OutcomeScaler:
    """Per-outcome affine map using the training min and max."""
    mins: np.ndarray
    maxs: np.ndarray

    @property
    def scale(self) -> np.ndarray:
        return self.maxs - self.mins

    def _check(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.shape[-1] != self.mins.shape[0]:
            raise DimensionMismatch(f"Expected {self.mins.shape[0]} outcome columns, got {values.shape[-1]}")
        return values

    def forward(self, outcomes: np.ndarray) -> np.ndarray:
        outcomes = self._check(outcomes)
        return (outcomes - self.mins) / self.scale - 0.5

    def inverse(self, scaled: np.ndarray) -> np.ndarray:
        scaled = self._check(scaled)
        return (scaled + 0.5) * self.scale + self.mins

    def scale_sigma(self, sigma: np.ndarray) -> np.ndarray:
        """Convert a covariance (or a stack of them) from scaled to original units."""
        return np.asarray(sigma) * np.outer(self.scale, self.scale)

    def unscale_sigma(self, sigma: np.ndarray) -> np.ndarray:
        return np.asarray(sigma) / np.outer(self.scale, self.scale)

def fit_scaler(outcomes: np.ndarray) -> OutcomeScaler:
    """
    Fit the scaler to training outcomes.

    Raises:
        ConstantOutcome: If any column has max equal to min
    """
    outcomes = np.asarray(outcomes, dtype=float)
    if outcomes.ndim == 1:
        outcomes = outcomes.reshape(-1, 1)
    mins = outcomes.min(axis=0)
    maxs = outcomes.max(axis=0)
    constant = np.flatnonzero(maxs <= mins)
    if constant.size:
        raise ConstantOutcome(f"Outcome column {constant[0]} is constant")
    return OutcomeScaler(mins=mins, maxs=maxs)

def identity_scaler(d: int) -> OutcomeScaler:
    """Scaler mapping [-0.5, 0.5] onto itself, used for probit chains."""
    return OutcomeScaler(mins=np.full(d, -0.5), maxs=np.full(d, 0.5))
