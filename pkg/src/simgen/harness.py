"""
Replicate runner: generate, fit every variant, score against the truth.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from config.config_template import ModelConfig, SimulationConfig
from src.cea.effects import mate
from src.cea.fitting import cea_fit
from src.cea.reporting import lambda_key
from src.core_model.dataset import dataset_to_frame
from src.database_management.repositories.simulation_repository import RESULT_COLUMNS, SimulationRepository
from src.posterior_analysis.diagnostics import acceptance_and_traces, parameter_draws
from src.posterior_analysis.metrics import (
    accuracy,
    constant_rate_log_loss,
    crps,
    interval_coverage,
    log_loss,
    parameter_ci,
    rmse,
)
from src.posterior_analysis.prediction import predict
from src.sampler.runner import run_chains
from src.simgen.generators import TTCM_LAMBDAS, SimulatedData, generate
from src.simgen.scenarios import ScenarioSpec
from src.utility_modules.enums import ModelVariant, ScenarioId
from src.utility_modules.error_handling import InvalidParameter, SubartErrorHandler
from src.utility_modules.io_utils import write_csv_atomic

logger = logging.getLogger(__name__)

TEST_SET = "test"
ESTIMAND = "estimand"
PREDICTION = "prediction"

@dataclass
class ReplicateRunResult:
    """Long result rows, their aggregate and the failures of one runner call."""
    results: pd.DataFrame
    aggregate: pd.DataFrame
    failures: List[Dict[str, Any]] = field(default_factory=list)
    run_id: Optional[int] = None
    dataset_paths: List[Path] = field(default_factory=list)

def variant_seed(base_seed: int, replicate: int, variant_index: int) -> int:
    """Model seed of one (replicate, variant), independent of the data stream."""
    sequence = np.random.SeedSequence([base_seed, replicate, variant_index + 1])
    return int(sequence.generate_state(1)[0])

def variant_config(model_config: ModelConfig, variant: ModelVariant, seed: int) -> ModelConfig:
    return model_config.model_copy(update={
        "independence_flag": variant.independent,
        "seed": seed,
        "keep_forests": False,
        "show_progress": False,
    })

def _estimand_row(name: str, draws: np.ndarray, truth: float, level: float, outcome: Optional[str] = None) -> Dict[str, Any]:
    lower, upper = parameter_ci(draws, level)
    return {
        "kind": ESTIMAND,
        "name": name,
        "outcome": outcome,
        "value": float(np.mean(draws)),
        "truth": float(truth),
        "lower": lower,
        "upper": upper,
    }

def _metric_rows(metrics: Dict[str, np.ndarray], outcome_names: Sequence[str]) -> List[Dict[str, Any]]:
    rows = []
    for name, values in metrics.items():
        for outcome, value in zip(outcome_names, np.atleast_1d(values)):
            rows.append({"kind": PREDICTION, "name": name, "outcome": outcome, "value": float(value)})
    return rows

def true_parameters(data: SimulatedData, outcome_names: Sequence[str], with_sigma: bool) -> Dict[str, float]:
    """True sigma_<outcome> and rho_<a>_<b> keyed like the posterior parameter draws."""
    truth = {}
    if with_sigma:
        for j, name in enumerate(outcome_names):
            truth[f"sigma_{name}"] = float(np.sqrt(data.true_sigma[j, j]))
    corr = data.true_correlation
    for j, k in combinations(range(len(outcome_names)), 2):
        truth[f"rho_{outcome_names[j]}_{outcome_names[k]}"] = float(corr[j, k])
    return truth

def _parameter_rows(chain, data: SimulatedData, level: float, with_sigma: bool) -> List[Dict[str, Any]]:
    truth = true_parameters(data, data.train.outcome_names, with_sigma)
    return [
        _estimand_row(name, draws, truth[name], level)
        for name, draws in parameter_draws(chain).items()
        if name in truth
    ]

def score_friedman1(data: SimulatedData, config: ModelConfig) -> List[Dict[str, Any]]:
    """Test RMSE, CRPS and predictive-interval coverage against observed y, plus sigma and rho estimates."""
    chain = run_chains(data.train, config, prediction_sets={TEST_SET: data.test.covariates})
    summary = predict(
        chain,
        level=config.interval_level,
        rng=np.random.default_rng(config.seed),
        keep_draws=True,
        prediction_set=TEST_SET,
    )
    observed = data.test.outcomes
    rows = _metric_rows({
        "rmse": rmse(summary.mean, observed),
        "crps": crps(summary.draws, observed),
        "pi_coverage": interval_coverage(summary.lower, summary.upper, observed),
    }, data.train.outcome_names)
    return rows + _parameter_rows(chain, data, config.interval_level, with_sigma=True)

def score_friedman2(data: SimulatedData, config: ModelConfig) -> List[Dict[str, Any]]:
    """Test log loss and accuracy, credible-interval coverage of the true probabilities, rho estimates."""
    chain = run_chains(data.train, config, prediction_sets={TEST_SET: data.test.covariates})
    summary = predict(chain, level=config.interval_level, prediction_set=TEST_SET)
    observed = data.test.outcomes
    rows = _metric_rows({
        "log_loss": log_loss(summary.mean, observed),
        "baseline_log_loss": constant_rate_log_loss(data.train.outcomes, observed),
        "accuracy": accuracy(summary.mean, observed),
        "ci_coverage": interval_coverage(summary.lower, summary.upper, data.true_probabilities_test),
    }, data.train.outcome_names)
    px_acceptance = acceptance_and_traces(chain).px_acceptance
    if px_acceptance is not None:
        rows.append({"kind": PREDICTION, "name": "px_acceptance", "outcome": None, "value": px_acceptance})
    return rows + _parameter_rows(chain, data, config.interval_level, with_sigma=False)

def score_ttcm(data: SimulatedData, config: ModelConfig, use_propensity: bool) -> List[Dict[str, Any]]:
    """Posterior mean and interval of delta_c, delta_q and INB at each reporting lambda."""
    fit = cea_fit(data.train, config, use_propensity=use_propensity, propensity_seed=config.seed)
    draws = mate(fit.chain, keep_rows=False)
    level = config.interval_level
    rows = [
        _estimand_row("delta_c", draws.delta_c, data.estimands["delta_c"], level),
        _estimand_row("delta_q", draws.delta_q, data.estimands["delta_q"], level),
    ]
    for lam in TTCM_LAMBDAS:
        key = lambda_key(lam)
        rows.append(_estimand_row(key, lam * draws.delta_q - draws.delta_c, data.estimands[key], level))
    return rows

def fit_and_score(data: SimulatedData, variant: ModelVariant, config: ModelConfig) -> List[Dict[str, Any]]:
    """
    Fit one variant to one replicate and score it.

    Raises:
        InvalidParameter: If a propensity variant is requested for a scenario without treatment
    """
    scenario = data.spec.scenario
    if variant.uses_propensity and scenario != ScenarioId.TTCM_LIKE:
        raise InvalidParameter(f"Variant {variant.value} needs a treatment column; {scenario.value} has none")
    if scenario != ScenarioId.TTCM_LIKE and data.test is None:
        raise InvalidParameter(f"{scenario.value} replicates need test rows")
    if scenario == ScenarioId.FRIEDMAN1:
        return score_friedman1(data, config)
    if scenario == ScenarioId.FRIEDMAN2:
        return score_friedman2(data, config)
    return score_ttcm(data, config, variant.uses_propensity)

def write_replicate_datasets(data: SimulatedData, directory: Path) -> List[Path]:
    stem = f"{data.spec.scenario.value}_rep{data.spec.replicate:04d}"
    paths = [Path(directory) / f"{stem}_train.csv"]
    write_csv_atomic(paths[0], dataset_to_frame(data.train))
    if data.test is not None:
        paths.append(Path(directory) / f"{stem}_test.csv")
        write_csv_atomic(paths[1], dataset_to_frame(data.test))
    return paths

def run_replicate(
    spec: ScenarioSpec,
    variants: Sequence[ModelVariant],
    model_config: ModelConfig,
    dataset_dir: Optional[Path] = None,
) -> Tuple[List[Dict[str, Any]], List[Dict[str, Any]], List[Path]]:
    """
    Generate one replicate and fit every variant to it.

    Failures of a variant are logged and returned, never raised.

    Returns:
        Tuple: (result rows, failures, written dataset paths)
    """
    rows, failures, paths = [], [], []
    try:
        data = generate(spec)
        if dataset_dir is not None:
            paths = write_replicate_datasets(data, dataset_dir)
    except Exception as e:
        logger.warning(f"Replicate {spec.replicate}: data generation failed ({SubartErrorHandler.determine_error_type(e).value}): {e}")
        failures.append({"replicate": spec.replicate, "variant": None, "error": e})
        return rows, failures, paths

    for index, variant in enumerate(variants):
        config = variant_config(model_config, variant, variant_seed(spec.seed, spec.replicate, index))
        try:
            scored = fit_and_score(data, variant, config)
        except Exception as e:
            logger.warning(
                f"Replicate {spec.replicate}, variant {variant.value} failed "
                f"({SubartErrorHandler.determine_error_type(e).value}): {e}"
            )
            failures.append({"replicate": spec.replicate, "variant": variant.value, "error": e})
            continue
        for row in scored:
            rows.append({"replicate": spec.replicate, "variant": variant.value, **row})
    return rows, failures, paths

def _results_frame(rows: List[Dict[str, Any]]) -> pd.DataFrame:
    frame = pd.DataFrame(rows, columns=RESULT_COLUMNS)
    return frame.sort_values(["replicate", "variant", "kind", "name", "outcome"], kind="stable", na_position="first").reset_index(drop=True)

def aggregate_estimands(results: pd.DataFrame) -> pd.DataFrame:
    """
    Bias, SD, RMSE, interval coverage and mean width per (variant, estimand).

    SD is the ddof=1 standard deviation of the errors, so
    rmse^2 = bias^2 + sd^2 (R - 1) / R.
    """
    estimands = results[results["kind"] == ESTIMAND].copy()
    columns = ["variant", "name", "outcome", "n", "bias", "sd", "rmse", "coverage", "width"]
    if estimands.empty:
        return pd.DataFrame(columns=columns)
    estimands["error"] = estimands["value"] - estimands["truth"]
    estimands["covered"] = (estimands["lower"] <= estimands["truth"]) & (estimands["truth"] <= estimands["upper"])
    estimands["width"] = estimands["upper"] - estimands["lower"]
    grouped = estimands.groupby(["variant", "name", "outcome"], dropna=False, sort=True)
    table = grouped.agg(
        n=("error", "size"),
        bias=("error", "mean"),
        sd=("error", lambda e: e.std(ddof=1) if len(e) > 1 else np.nan),
        rmse=("error", lambda e: float(np.sqrt(np.mean(np.square(e))))),
        coverage=("covered", "mean"),
        width=("width", "mean"),
    ).reset_index()
    return table[columns]

def aggregate_predictions(results: pd.DataFrame) -> pd.DataFrame:
    """Mean and spread of every prediction metric per (variant, metric, outcome)."""
    metrics = results[results["kind"] == PREDICTION]
    columns = ["variant", "name", "outcome", "n", "mean", "sd"]
    if metrics.empty:
        return pd.DataFrame(columns=columns)
    table = metrics.groupby(["variant", "name", "outcome"], dropna=False, sort=True).agg(
        n=("value", "size"),
        mean=("value", "mean"),
        sd=("value", lambda v: v.std(ddof=1) if len(v) > 1 else np.nan),
    ).reset_index()
    return table[columns]

def aggregate_results(results: pd.DataFrame) -> pd.DataFrame:
    """Estimand and prediction aggregates stacked, tagged by ``kind``."""
    estimands = aggregate_estimands(results).assign(kind=ESTIMAND)
    predictions = aggregate_predictions(results).assign(kind=PREDICTION)
    frames = [frame for frame in (estimands, predictions) if not frame.empty]
    if not frames:
        return pd.DataFrame(columns=["kind", "variant", "name", "outcome", "n"])
    table = pd.concat(frames, ignore_index=True)
    leading = ["kind", "variant", "name", "outcome", "n"]
    return table[leading + [c for c in table.columns if c not in leading]]

def replicate_runner(
    sim_config: SimulationConfig,
    model_config: ModelConfig,
    base_seed: int,
    repository: Optional[SimulationRepository] = None,
    dataset_dir: Optional[Path] = None,
    spec_overrides: Optional[Dict[str, Any]] = None,
) -> ReplicateRunResult:
    """
    Run every replicate of a scenario and every variant on it.

    Replicate r draws its data from SeedSequence([base_seed, r]); each
    variant's sampler gets its own seed derived from the same pair.
    Replicates run in parallel across ``sim_config.n_jobs`` workers.

    Args:
        sim_config (SimulationConfig): Scenario, sizes, replicate count and variants
        model_config (ModelConfig): Sampler settings shared by all variants
        base_seed (int): Experiment seed
        repository (Optional[SimulationRepository]): Store for the run, its rows and failures
        dataset_dir (Optional[Path]): Directory for generated datasets when
            ``sim_config.write_datasets`` is set
        spec_overrides (Optional[Dict[str, Any]]): Extra ScenarioSpec fields (sds, correlations, fixed_covariates)

    Returns:
        ReplicateRunResult: Long results, aggregate table and failures

    Raises:
        InvalidParameter: If the variant list is empty or a propensity variant is paired with a
            scenario that has no treatment
    """
    variants = [ModelVariant(v) for v in sim_config.variants]
    if not variants:
        raise InvalidParameter("At least one model variant is required")
    if sim_config.scenario != ScenarioId.TTCM_LIKE and any(v.uses_propensity for v in variants):
        raise InvalidParameter(f"Propensity variants need the ttcm_like scenario, got {sim_config.scenario.value}")
    base_spec = ScenarioSpec(
        scenario=sim_config.scenario,
        n_train=sim_config.n_train,
        n_test=0 if sim_config.scenario == ScenarioId.TTCM_LIKE else sim_config.n_test,
        d=sim_config.d,
        rho=sim_config.rho,
        seed=base_seed,
        **(spec_overrides or {}),
    )

    run = None
    if repository is not None:
        run = repository.create_run({
            "scenario": sim_config.scenario.value,
            "base_seed": base_seed,
            "replicates": sim_config.replicates,
            "variants": [v.value for v in variants],
            "config": {
                "simulation": sim_config.model_dump(mode="json"),
                "model": model_config.model_dump(mode="json"),
            },
        })

    logger.info(
        f"Running {sim_config.replicates} replicates of {sim_config.scenario.value} "
        f"with variants {[v.value for v in variants]}"
    )
    write_dir = dataset_dir if sim_config.write_datasets else None
    outcomes = Parallel(n_jobs=sim_config.n_jobs)(
        delayed(run_replicate)(base_spec.for_replicate(r), variants, model_config, write_dir)
        for r in range(sim_config.replicates)
    )

    rows, failures, paths = [], [], []
    for replicate_rows, replicate_failures, replicate_paths in outcomes:
        rows.extend(replicate_rows)
        failures.extend(replicate_failures)
        paths.extend(replicate_paths)
    results = _results_frame(rows)
    aggregate = aggregate_results(results)

    if repository is not None:
        repository.add_results(run.id, results.astype(object).where(results.notna(), None).to_dict(orient="records"))
        for failure in failures:
            repository.log_error(run.id, failure["error"], failure["replicate"], failure["variant"])
        completed = len(results[["replicate", "variant"]].drop_duplicates())
        repository.finish_run(run.id, completed=completed, failed=sim_config.replicates * len(variants) - completed)

    logger.info(f"Simulation finished: {len(results)} result rows, {len(failures)} failures")
    return ReplicateRunResult(
        results=results,
        aggregate=aggregate,
        failures=failures,
        run_id=run.id if run is not None else None,
        dataset_paths=paths,
    )
