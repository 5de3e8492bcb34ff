from typing import Dict, List, Optional
from pydantic import BaseModel, Field, model_validator

from src.utility_modules.enums import OutcomeMode, ScenarioId, ModelVariant
from src.utility_modules.error_handling import InvalidParameter

DEFAULT_ITERATIONS = {
    OutcomeMode.CONTINUOUS: (5000, 1000),
    OutcomeMode.PROBIT: (10000, 2000),
}

class ModelConfig(BaseModel):
    """suBART model and sampler settings"""
    n_trees: int = Field(default=100, description="Trees per outcome (m)")
    kappa: float = Field(default=2.0, description="Leaf prior concentration")
    alpha: float = Field(default=0.95, description="Tree depth prior base")
    beta: float = Field(default=2.0, description="Tree depth prior power")
    nu: float = Field(default=2.0, description="Covariance prior degrees of freedom")
    alpha_sigma: float = Field(default=0.95, description="Prior mass below the sigma overestimate")
    q_z: float = Field(default=3.0, description="Probit latent range")
    n_mcmc: Optional[int] = Field(default=None, description="Total MCMC iterations (mode default if unset)")
    n_burnin: Optional[int] = Field(default=None, description="Burn-in iterations (mode default if unset)")
    nu_prop: Optional[float] = Field(default=None, description="PX-MH proposal degrees of freedom (n-based default if unset)")
    mode: OutcomeMode = Field(default=OutcomeMode.CONTINUOUS, description="Outcome mode")
    independence_flag: bool = Field(default=False, description="Force a diagonal error covariance")
    use_offsets: bool = Field(default=True, description="Use conditional-normal offsets in the tree updates")
    seed: Optional[int] = Field(default=None, description="RNG seed")
    move_probs: Dict[str, float] = Field(
        default={"grow": 0.25, "prune": 0.25, "change": 0.5},
        description="Tree move proposal probabilities"
    )
    store_latent: bool = Field(default=False, description="Keep latent Z snapshots in probit chains")
    keep_forests: bool = Field(default=True, description="Keep per-draw forest snapshots for prediction on new data")
    interval_level: float = Field(default=0.5, description="Predictive interval level")
    n_chains: int = Field(default=1, description="Independent chains to run")
    show_progress: bool = Field(default=False, description="Show a progress bar while sampling")

    @model_validator(mode="after")
    def check_domains(self) -> "ModelConfig":
        if self.n_trees < 1:
            raise ValueError("n_trees must be at least 1")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if self.nu < 1:
            raise ValueError("nu must be at least 1")
        if not 0 < self.alpha_sigma < 1:
            raise ValueError("alpha_sigma must lie in (0, 1)")
        if self.q_z <= 0:
            raise ValueError("q_z must be positive")
        if not 0 < self.interval_level < 1:
            raise ValueError("interval_level must lie in (0, 1)")
        if self.n_chains < 1:
            raise ValueError("n_chains must be at least 1")
        if self.n_mcmc is not None and self.n_mcmc < 1:
            raise ValueError("n_mcmc must be at least 1")
        if self.n_burnin is not None and self.n_burnin < 0:
            raise ValueError("n_burnin must be nonnegative")
        n_mcmc, n_burnin = self.iterations()
        if n_burnin >= n_mcmc:
            raise ValueError("n_burnin must be smaller than n_mcmc")
        if set(self.move_probs) != {"grow", "prune", "change"}:
            raise ValueError("move_probs needs exactly grow, prune and change")
        if any(p <= 0 for p in self.move_probs.values()):
            raise ValueError("move probabilities must be positive")
        if abs(sum(self.move_probs.values()) - 1.0) > 1e-9:
            raise ValueError("move probabilities must sum to 1")
        return self

    def iterations(self) -> tuple:
        """(n_mcmc, n_burnin) with mode defaults filled in."""
        default_mcmc, default_burnin = DEFAULT_ITERATIONS[self.mode]
        n_mcmc = self.n_mcmc if self.n_mcmc is not None else default_mcmc
        n_burnin = self.n_burnin if self.n_burnin is not None else default_burnin
        return n_mcmc, n_burnin

    def resolved(self, n: int, d: int) -> "ModelConfig":
        """
        Fill mode-dependent defaults for a dataset with n rows and d outcomes.

        Args:
            n (int): Training rows
            d (int): Outcome count

        Returns:
            ModelConfig: Copy with n_mcmc, n_burnin and nu_prop set

        Raises:
            InvalidParameter: If burn-in is not shorter than the run or nu_prop does not exceed d - 1
        """
        n_mcmc, n_burnin = self.iterations()
        if n_burnin >= n_mcmc:
            raise InvalidParameter(f"n_burnin ({n_burnin}) must be smaller than n_mcmc ({n_mcmc})")
        nu_prop = self.nu_prop
        if nu_prop is None:
            nu_prop = max(n / 10.0 if d == 2 else n / 2.0, d + 1.0)
        if nu_prop <= d - 1:
            raise InvalidParameter(f"nu_prop must exceed d - 1 = {d - 1}, got {nu_prop}")
        return self.model_copy(update={"n_mcmc": n_mcmc, "n_burnin": n_burnin, "nu_prop": nu_prop})

class SimulationConfig(BaseModel):
    """Simulation harness settings"""
    scenario: ScenarioId = Field(default=ScenarioId.FRIEDMAN1, description="Data-generating scenario")
    n_train: int = Field(default=250, description="Training rows per replicate")
    n_test: int = Field(default=250, description="Test rows per replicate")
    d: int = Field(default=2, description="Outcome count")
    rho: float = Field(default=-0.25, description="Cost-effect noise correlation (ttcm_like)")
    replicates: int = Field(default=5, description="Number of replicates")
    variants: List[ModelVariant] = Field(
        default=[ModelVariant.SUBART],
        description="Model variants fitted per replicate"
    )
    n_jobs: int = Field(default=1, description="Parallel workers for replicates")
    write_datasets: bool = Field(default=False, description="Write generated datasets to disk")

    @model_validator(mode="after")
    def check_domains(self) -> "SimulationConfig":
        if self.n_train < 2:
            raise ValueError("n_train must be at least 2")
        if self.n_test < 1:
            raise ValueError("n_test must be at least 1")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if not self.variants:
            raise ValueError("at least one model variant is required")
        if not -1 < self.rho < 1:
            raise ValueError("rho must lie in (-1, 1)")
        return self

class CeaConfig(BaseModel):
    """Cost-effectiveness analysis settings"""
    lambda_grid: List[float] = Field(
        default=[float(v) for v in range(0, 80001, 1000)],
        description="Willingness-to-pay grid for the acceptability curve"
    )
    report_lambdas: List[float] = Field(default=[20000.0, 50000.0], description="Lambdas reported in the summary")
    cost_col: str = Field(default="cost", description="Cost outcome column")
    effect_col: str = Field(default="effect", description="Effect outcome column")
    treatment_col: str = Field(default="treatment", description="Treatment indicator column")
    use_propensity: bool = Field(default=True, description="Append estimated propensity scores to the covariates")
    ci_level: float = Field(default=0.95, description="Credible interval level for summaries")

class DatabaseConfig(BaseModel):
    """Results database settings"""
    url: str = Field(default="sqlite:///subart_runs.db", description="SQLAlchemy database URL")
    echo: bool = Field(default=False, description="Echo SQL statements")

class Config(BaseModel):
    """Main configuration"""
    model: ModelConfig = Field(default_factory=ModelConfig)
    simulation: SimulationConfig = Field(default_factory=SimulationConfig)
    cea: CeaConfig = Field(default_factory=CeaConfig)
    database: DatabaseConfig = Field(default_factory=DatabaseConfig)
