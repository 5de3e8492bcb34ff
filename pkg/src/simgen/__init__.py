"""
Simulation scenarios, data generators and the replicate runner.
"""

from src.simgen.scenarios import ScenarioSpec, ERROR_PRESETS, TTCM_SDS
from src.simgen.generators import (
    SimulatedData,
    friedman1_means,
    friedman2_latent_means,
    gen_friedman1,
    gen_friedman2,
    gen_ttcm_like,
    generate,
    synthetic_trauma_covariates,
    ttcm_effects,
    ttcm_estimands,
    ttcm_propensity,
)
from src.simgen.harness import (
    ReplicateRunResult,
    replicate_runner,
    run_replicate,
    fit_and_score,
    aggregate_results,
    aggregate_estimands,
    aggregate_predictions,
)

__all__ = [
    'ScenarioSpec',
    'ERROR_PRESETS',
    'TTCM_SDS',
    'SimulatedData',
    'friedman1_means',
    'friedman2_latent_means',
    'gen_friedman1',
    'gen_friedman2',
    'gen_ttcm_like',
    'generate',
    'synthetic_trauma_covariates',
    'ttcm_effects',
    'ttcm_estimands',
    'ttcm_propensity',
    'ReplicateRunResult',
    'replicate_runner',
    'run_replicate',
    'fit_and_score',
    'aggregate_results',
    'aggregate_estimands',
    'aggregate_predictions',
]
