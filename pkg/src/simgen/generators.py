"""
Data-generating processes for the Friedman and trauma-care experiments.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import special, stats

from src.core_model.dataset import Dataset, validate_dataset
from src.distributions.linalg import cholesky_factor
from src.distributions.variates import sample_mvn
from src.simgen.scenarios import ScenarioSpec
from src.utility_modules.enums import CovariateKind, OutcomeMode, ScenarioId
from src.utility_modules.error_handling import InvalidParameter

logger = logging.getLogger(__name__)

FRIEDMAN_COVARIATES = 10
TTCM_LAMBDAS = (20000.0, 50000.0)

# Baseline covariate marginals of the trauma-care trial, pooled over arms.
EDUCATION_LEVELS = ("low", "middle", "high")
EDUCATION_PROBS = (0.10, 0.26, 0.64)
HISTORY_LEVELS = ("none", "chronic", "musculoskeletal")
HISTORY_PROBS = (0.59, 0.19, 0.21)
TRAUMA_LEVELS = ("traffic", "work", "fall", "sports", "other")
TRAUMA_PROBS = (0.493, 0.014, 0.314, 0.143, 0.036)
FRACTURE_LEVELS = ("upper", "lower", "vertebral", "multitrauma")
FRACTURE_PROBS = (0.40, 0.43, 0.057, 0.114)

TTCM_COVARIATES = (
    "age",
    "gender",
    "education",
    "medical_history",
    "trauma_type",
    "fracture_region",
    "injury_severity",
    "hospital_admission",
    "length_of_stay",
    "surgery",
    "tto",
)

@dataclass
class SimulatedData:
    """One generated replicate with the quantities needed to score fits against the truth."""
    spec: ScenarioSpec
    train: Dataset
    test: Optional[Dataset]
    true_means_train: np.ndarray
    true_means_test: Optional[np.ndarray]
    true_sigma: np.ndarray
    true_probabilities_train: Optional[np.ndarray] = None
    true_probabilities_test: Optional[np.ndarray] = None
    estimands: Dict[str, float] = field(default_factory=dict)
    propensity: Optional[np.ndarray] = None

    @property
    def true_correlation(self) -> np.ndarray:
        sd = np.sqrt(np.diag(self.true_sigma))
        return self.true_sigma / np.outer(sd, sd)

def friedman1_means(x: np.ndarray) -> np.ndarray:
    """Three Friedman #1 mean functions evaluated on the first five columns."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return np.column_stack([
        10.0 * np.sin(np.pi * x[:, 0] * x[:, 1]) + 20.0 * (x[:, 2] - 0.5) ** 2,
        8.0 * x[:, 3] + 20.0 * np.sin(np.pi * x[:, 0]),
        10.0 * x[:, 4] - 5.0 * x[:, 1] - 5.0 * x[:, 3],
    ])

def friedman2_latent_means(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return np.column_stack([
        np.sin(np.pi * x[:, 0] * x[:, 1]) + x[:, 2] ** 3,
        -1.0 + 2.0 * x[:, 0] * x[:, 3] + np.exp(x[:, 4]),
        0.5 * (x[:, 1] + x[:, 3]) + x[:, 4],
    ])

def _friedman_sample(spec: ScenarioSpec, rng: np.random.Generator, n: int, mean_fn) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Uniform covariates, their true means (first d outcomes) and MVN noise."""
    x = rng.uniform(0.0, 1.0, size=(n, FRIEDMAN_COVARIATES))
    means = mean_fn(x)[:, : spec.d]
    noise = sample_mvn(np.zeros(spec.d), cholesky_factor(spec.covariance()), rng, size=n)
    return x, means, noise

def _friedman_dataset(x: np.ndarray, outcomes: np.ndarray, mode: OutcomeMode) -> Dataset:
    return validate_dataset(Dataset(
        covariates=x,
        outcomes=outcomes,
        covariate_kinds=(CovariateKind.CONTINUOUS,) * x.shape[1],
        mode=mode,
    ))

def gen_friedman1(spec: ScenarioSpec, rng: np.random.Generator) -> SimulatedData:
    """
    Friedman #1 with correlated Gaussian errors.

    Training and test samples are drawn independently from the same law.

    Args:
        spec (ScenarioSpec): Scenario with scenario friedman1 and d in {2, 3}
        rng (np.random.Generator): Replicate generator

    Returns:
        SimulatedData: Datasets, true means and the true error covariance
    """
    if spec.scenario != ScenarioId.FRIEDMAN1:
        raise InvalidParameter(f"gen_friedman1 got scenario {spec.scenario.value}")
    x, means, noise = _friedman_sample(spec, rng, spec.n_train, friedman1_means)
    train = _friedman_dataset(x, means + noise, OutcomeMode.CONTINUOUS)
    test, test_means = None, None
    if spec.n_test > 0:
        x_test, test_means, test_noise = _friedman_sample(spec, rng, spec.n_test, friedman1_means)
        test = _friedman_dataset(x_test, test_means + test_noise, OutcomeMode.CONTINUOUS)
    return SimulatedData(
        spec=spec,
        train=train,
        test=test,
        true_means_train=means,
        true_means_test=test_means,
        true_sigma=spec.covariance(),
    )

def gen_friedman2(spec: ScenarioSpec, rng: np.random.Generator) -> SimulatedData:
    """
    Friedman #2: binary outcomes from thresholded correlated latents.

    Error variances are 1, so the true probabilities are Phi of the latent means.
    """
    if spec.scenario != ScenarioId.FRIEDMAN2:
        raise InvalidParameter(f"gen_friedman2 got scenario {spec.scenario.value}")
    x, means, noise = _friedman_sample(spec, rng, spec.n_train, friedman2_latent_means)
    train = _friedman_dataset(x, (means + noise > 0).astype(float), OutcomeMode.PROBIT)
    test, test_means, test_probs = None, None, None
    if spec.n_test > 0:
        x_test, test_means, test_noise = _friedman_sample(spec, rng, spec.n_test, friedman2_latent_means)
        test = _friedman_dataset(x_test, (test_means + test_noise > 0).astype(float), OutcomeMode.PROBIT)
        test_probs = special.ndtr(test_means)
    return SimulatedData(
        spec=spec,
        train=train,
        test=test,
        true_means_train=means,
        true_means_test=test_means,
        true_sigma=spec.covariance(),
        true_probabilities_train=special.ndtr(means),
        true_probabilities_test=test_probs,
    )

def _standardize(values: np.ndarray) -> np.ndarray:
    return (values - values.mean()) / values.std(ddof=1)

def _lognormal_params(mean: float, sd: float) -> Tuple[float, float]:
    """Log-scale (mu, sigma) of the lognormal with the given mean and sd."""
    sigma2 = np.log1p((sd / mean) ** 2)
    return float(np.log(mean) - sigma2 / 2.0), float(np.sqrt(sigma2))

def _categorical(rng: np.random.Generator, probs: Sequence[float], n: int) -> np.ndarray:
    probs = np.asarray(probs, dtype=float)
    return rng.choice(probs.shape[0], size=n, p=probs / probs.sum()).astype(float)

def synthetic_trauma_covariates(n: int, rng: np.random.Generator) -> Dict[str, np.ndarray]:
    """
    Eleven baseline covariates drawn from the trial's published marginals.

    Continuous covariates are returned standardized; binary ones as 0/1;
    categorical ones as level indices.
    """
    age = stats.truncnorm.rvs((18 - 46) / 17, (90 - 46) / 17, loc=46, scale=17, size=n, random_state=rng)
    severity_mu, severity_sigma = _lognormal_params(8.2, 5.2)
    stay_mu, stay_sigma = _lognormal_params(8.3, 8.5)
    tto_mean, tto_sd = 20.3, 15.1
    return {
        "age": _standardize(age),
        "gender": rng.binomial(1, 0.5, size=n).astype(float),
        "education": _categorical(rng, EDUCATION_PROBS, n),
        "medical_history": _categorical(rng, HISTORY_PROBS, n),
        "trauma_type": _categorical(rng, TRAUMA_PROBS, n),
        "fracture_region": _categorical(rng, FRACTURE_PROBS, n),
        "injury_severity": _standardize(rng.lognormal(severity_mu, severity_sigma, size=n)),
        "hospital_admission": rng.binomial(1, 0.65, size=n).astype(float),
        "length_of_stay": _standardize(rng.lognormal(stay_mu, stay_sigma, size=n)),
        "surgery": rng.binomial(1, 0.53, size=n).astype(float),
        "tto": _standardize(rng.gamma(tto_mean ** 2 / tto_sd ** 2, tto_sd ** 2 / tto_mean, size=n)),
    }

def ttcm_propensity(mu_q: np.ndarray, surgery: np.ndarray) -> np.ndarray:
    """Targeted selection: 0.9 Phi(-0.5 + x10 - 1.5 z(mu_q)) + 0.05, so every score lies in [0.05, 0.95]."""
    return 0.9 * special.ndtr(-0.5 + surgery - 1.5 * _standardize(mu_q)) + 0.05

def ttcm_effects(covariates: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
    """Untreated means and treatment effects of cost and effect per row."""
    x1 = covariates["age"]
    x2 = covariates["gender"]
    x3 = _standardize(covariates["education"])
    x10 = covariates["surgery"]
    x11 = covariates["tto"]
    n = x1.shape[0]
    return {
        "mu_c": 2000.0 + 500.0 * x1 - 200.0 * x3 + 500.0 * x10,
        "tau_c": np.full(n, 500.0),
        "mu_q": 0.5 + 0.2 * (x2 + 1.0) * np.sin(x1),
        "tau_q": -0.1 + 0.1 * np.exp(-x11),
    }

def ttcm_estimands(tau_c: np.ndarray, tau_q: np.ndarray, lambdas: Sequence[float] = TTCM_LAMBDAS) -> Dict[str, float]:
    """Sample-average effects and the implied net benefit at each willingness to pay."""
    delta_c = float(np.mean(tau_c))
    delta_q = float(np.mean(tau_q))
    estimands = {"delta_c": delta_c, "delta_q": delta_q}
    for lam in lambdas:
        estimands[f"inb_{int(lam)}"] = lam * delta_q - delta_c
    return estimands

def gen_ttcm_like(spec: ScenarioSpec, rng: np.random.Generator) -> SimulatedData:
    """
    Trauma-care cost-effectiveness data with targeted treatment selection.

    Covariates come from ``spec.covariate_rng()`` when ``fixed_covariates`` is
    set, so every replicate shares them; treatment and noise always come from
    ``rng``.

    Args:
        spec (ScenarioSpec): Scenario with scenario ttcm_like
        rng (np.random.Generator): Replicate generator

    Returns:
        SimulatedData: Training data with treatment, true propensities and the
            sample-average estimands (delta_c, delta_q, inb_20000, inb_50000)
    """
    if spec.scenario != ScenarioId.TTCM_LIKE:
        raise InvalidParameter(f"gen_ttcm_like got scenario {spec.scenario.value}")
    n = spec.n_train
    covariates = synthetic_trauma_covariates(n, spec.covariate_rng() if spec.fixed_covariates else rng)
    effects = ttcm_effects(covariates)
    propensity = ttcm_propensity(effects["mu_q"], covariates["surgery"])
    treatment = rng.binomial(1, propensity).astype(float)

    sigma = spec.covariance()
    noise = sample_mvn(np.zeros(2), cholesky_factor(sigma), rng, size=n)
    means = np.column_stack([
        effects["mu_c"] + treatment * effects["tau_c"],
        effects["mu_q"] + treatment * effects["tau_q"],
    ])

    categorical = {
        "education": EDUCATION_LEVELS,
        "medical_history": HISTORY_LEVELS,
        "trauma_type": TRAUMA_LEVELS,
        "fracture_region": FRACTURE_LEVELS,
    }
    kinds = tuple(
        CovariateKind.CATEGORICAL if name in categorical else CovariateKind.CONTINUOUS for name in TTCM_COVARIATES
    )
    train = validate_dataset(Dataset(
        covariates=np.column_stack([covariates[name] for name in TTCM_COVARIATES]),
        outcomes=means + noise,
        covariate_kinds=kinds,
        mode=OutcomeMode.CONTINUOUS,
        covariate_names=TTCM_COVARIATES,
        outcome_names=("cost", "effect"),
        level_labels=tuple(categorical.get(name) for name in TTCM_COVARIATES),
        treatment=treatment,
        treatment_name="treatment",
    ))
    logger.debug(f"ttcm_like replicate {spec.replicate}: {int(treatment.sum())}/{n} treated")
    return SimulatedData(
        spec=spec,
        train=train,
        test=None,
        true_means_train=means,
        true_means_test=None,
        true_sigma=sigma,
        estimands=ttcm_estimands(effects["tau_c"], effects["tau_q"]),
        propensity=propensity,
    )

def generate(spec: ScenarioSpec, rng: Optional[np.random.Generator] = None) -> SimulatedData:
    """Dispatch to the scenario's generator, seeding from the spec when no generator is passed."""
    rng = rng if rng is not None else spec.rng()
    generators = {
        ScenarioId.FRIEDMAN1: gen_friedman1,
        ScenarioId.FRIEDMAN2: gen_friedman2,
        ScenarioId.TTCM_LIKE: gen_ttcm_like,
    }
    return generators[spec.scenario](spec, rng)
