"""
Mutable sampler state for continuous and probit chains.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from src.trees.forest import Forest

@dataclass
class ContinuousState:
    """Forests, error covariance (scaled units) and auxiliary a's of a continuous chain."""
    forests: List[Forest]
    sigma: np.ndarray
    a: np.ndarray
    outcomes: np.ndarray
    iteration: int = 0

    @property
    def d(self) -> int:
        return len(self.forests)

    def fits(self) -> np.ndarray:
        return np.column_stack([forest.total for forest in self.forests])

    def residuals(self) -> np.ndarray:
        return self.outcomes - self.fits()

@dataclass
class ProbitState:
    """
    Forests, correlation matrix, expansion diagonal and latents of a probit chain.

    ``expansion`` holds the diagonal of D, so W = D^{1/2} sigma D^{1/2}.
    """
    forests: List[Forest]
    sigma: np.ndarray
    expansion: np.ndarray
    latent: np.ndarray
    labels: np.ndarray
    iteration: int = 0
    px_accept_count: int = 0
    px_attempts: int = 0

    @property
    def d(self) -> int:
        return len(self.forests)

    @property
    def expanded(self) -> np.ndarray:
        root = np.sqrt(self.expansion)
        return self.sigma * np.outer(root, root)

    def fits(self) -> np.ndarray:
        return np.column_stack([forest.total for forest in self.forests])

    def residuals(self) -> np.ndarray:
        return self.latent - self.fits()

    @property
    def px_accept_rate(self) -> Optional[float]:
        if self.px_attempts == 0:
            return None
        return self.px_accept_count / self.px_attempts
