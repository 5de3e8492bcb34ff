"""
Scenario specifications for the simulation experiments.
"""

from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from src.distributions.linalg import build_covariance, cholesky_factor
from src.utility_modules.enums import ScenarioId
from src.utility_modules.error_handling import NotPositiveDefinite

# (scenario, d) -> (error sds, correlation matrix)
ERROR_PRESETS: Dict[Tuple[ScenarioId, int], Tuple[List[float], List[List[float]]]] = {
    (ScenarioId.FRIEDMAN1, 2): ([1.0, 10.0], [[1.0, 0.75], [0.75, 1.0]]),
    (ScenarioId.FRIEDMAN1, 3): (
        [1.0, 2.5, 5.0],
        [[1.0, 0.8, 0.5], [0.8, 1.0, 0.25], [0.5, 0.25, 1.0]],
    ),
    (ScenarioId.FRIEDMAN2, 2): ([1.0, 1.0], [[1.0, 0.75], [0.75, 1.0]]),
    (ScenarioId.FRIEDMAN2, 3): (
        [1.0, 1.0, 1.0],
        [[1.0, 0.8, 0.5], [0.8, 1.0, 0.25], [0.5, 0.25, 1.0]],
    ),
}

TTCM_SDS = [500.0, 0.05]

# Stream tag for the covariates shared by every replicate of a ttcm_like run.
COVARIATE_STREAM = 2 ** 32 - 1

class ScenarioSpec(BaseModel):
    """One data-generating setting and replicate."""
    scenario: ScenarioId = Field(default=ScenarioId.FRIEDMAN1, description="Data-generating scenario")
    n_train: int = Field(default=250, description="Training rows")
    n_test: int = Field(default=250, description="Test rows (friedman scenarios)")
    d: int = Field(default=2, description="Outcome count")
    sds: Optional[List[float]] = Field(default=None, description="Error sds; preset when unset")
    correlations: Optional[List[List[float]]] = Field(default=None, description="Error correlations; preset when unset")
    rho: float = Field(default=-0.25, description="Cost-effect error correlation (ttcm_like)")
    replicate: int = Field(default=0, description="Replicate index")
    seed: int = Field(default=0, description="Base seed of the experiment")
    fixed_covariates: bool = Field(default=True, description="Share ttcm_like covariates across replicates")

    @model_validator(mode="after")
    def check_domains(self) -> "ScenarioSpec":
        if self.scenario == ScenarioId.TTCM_LIKE:
            if self.d != 2:
                raise ValueError("ttcm_like has exactly two outcomes")
        elif self.d not in (2, 3):
            raise ValueError("friedman scenarios need d of 2 or 3")
        if self.n_train < 2 or self.n_test < 0:
            raise ValueError("n_train must be at least 2 and n_test nonnegative")
        if not -1 < self.rho < 1:
            raise ValueError("rho must lie in (-1, 1)")
        if self.scenario == ScenarioId.FRIEDMAN2 and self.sds is not None and any(s != 1.0 for s in self.sds):
            raise ValueError("friedman2 error variances are fixed at 1")
        try:
            cholesky_factor(self.covariance())
        except NotPositiveDefinite:
            raise ValueError("error covariance is not positive definite")
        return self

    def covariance(self) -> np.ndarray:
        """True error covariance from the sds and correlations (presets filled in)."""
        if self.scenario == ScenarioId.TTCM_LIKE:
            sds = self.sds or TTCM_SDS
            corr = self.correlations or [[1.0, self.rho], [self.rho, 1.0]]
        else:
            preset_sds, preset_corr = ERROR_PRESETS[(self.scenario, self.d)]
            sds = self.sds or preset_sds
            corr = self.correlations or preset_corr
        if len(sds) != self.d or np.shape(corr) != (self.d, self.d):
            raise ValueError(f"sds and correlations must match d={self.d}")
        return build_covariance(sds, corr)

    def rng(self) -> np.random.Generator:
        """Generator seeded from (seed, replicate)."""
        return np.random.default_rng(np.random.SeedSequence([self.seed, self.replicate]))

    def covariate_rng(self) -> np.random.Generator:
        """Generator for covariates that stay fixed across replicates."""
        return np.random.default_rng(np.random.SeedSequence([self.seed, COVARIATE_STREAM]))

    def for_replicate(self, replicate: int) -> "ScenarioSpec":
        return self.model_copy(update={"replicate": replicate})
