"""
Fit service module.

This module provides the fit, predict, calibrate and diagnose workflows
behind the command-line interface.
"""

import logging
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from config.config_template import Config, ModelConfig
from src.core_model.chain import PosteriorChain
from src.core_model.dataset import Dataset, load_dataset_csv
from src.posterior_analysis.diagnostics import acceptance_and_traces, posterior_parameter_summary
from src.posterior_analysis.prediction import predict
from src.priors.calibration import calibrate_priors, calibration_report
from src.sampler.runner import run_chains
from src.utility_modules.enums import OutcomeMode
from src.utility_modules.error_handling import SchemaMismatch
from src.utility_modules.io_utils import write_csv_atomic, write_json_atomic

# Configure logging
logger = logging.getLogger(__name__)

CHAIN_FILE = "chain.npz"
CALIBRATION_FILE = "calibration.json"
DIAGNOSTICS_FILE = "diagnostics.json"
TRACE_FILE = "trace.csv"
PARAMETERS_FILE = "parameters.csv"
PREDICTIONS_FILE = "predictions.csv"

class FitService:
    """Service for single-dataset model runs."""

    def __init__(self, config: Config):
        """
        Initialize the service with a resolved configuration.

        Args:
            config (Config): Configuration object
        """
        self.config = config

    def load_dataset(
        self,
        path: Path,
        outcome_cols: Sequence[str],
        categorical_cols: Sequence[str] = (),
        treatment_col: Optional[str] = None,
        mode: Optional[OutcomeMode] = None,
    ) -> Dataset:
        """Read and validate a training CSV; the outcome mode is inferred unless given."""
        return load_dataset_csv(
            Path(path),
            outcome_cols=outcome_cols,
            categorical_cols=categorical_cols,
            treatment_col=treatment_col,
            mode=mode,
        )

    def model_config_for(self, dataset: Dataset) -> ModelConfig:
        return self.config.model.model_copy(update={"mode": dataset.mode})

    def write_diagnostics(self, chain: PosteriorChain, outdir: Path) -> List[str]:
        """Write acceptance rates, traces and the parameter summary of a chain."""
        outdir = Path(outdir)
        report = acceptance_and_traces(chain)
        write_json_atomic(outdir / DIAGNOSTICS_FILE, {**report.to_dict(), "mode": chain.mode.value})
        write_csv_atomic(outdir / TRACE_FILE, report.trace)
        level = self.config.model.interval_level
        write_csv_atomic(outdir / PARAMETERS_FILE, posterior_parameter_summary(chain, level=level))
        return [DIAGNOSTICS_FILE, TRACE_FILE, PARAMETERS_FILE]

    def fit(self, dataset: Dataset, outdir: Path, n_chains: Optional[int] = None) -> List[str]:
        """
        Calibrate priors, run the sampler and write the chain with its reports.

        Args:
            dataset (Dataset): Validated training data
            outdir (Path): Output directory
            n_chains (Optional[int]): Independent chains; defaults to the configured count

        Returns:
            List[str]: Artifact names written to outdir
        """
        outdir = Path(outdir)
        model_config = self.model_config_for(dataset)
        priors = calibrate_priors(dataset, model_config)
        chain = run_chains(dataset, model_config, priors, n_chains=n_chains)
        logger.info(f"Fitted {chain.n_chains} chain(s): {chain.n_retained} retained draws")

        chain.save(outdir / CHAIN_FILE)
        write_json_atomic(outdir / CALIBRATION_FILE, calibration_report(priors, dataset.outcome_names))
        return [CHAIN_FILE, CALIBRATION_FILE] + self.write_diagnostics(chain, outdir)

    def calibrate(self, dataset: Dataset, outdir: Path) -> List[str]:
        """Write the prior calibration report without sampling."""
        priors = calibrate_priors(dataset, self.model_config_for(dataset))
        write_json_atomic(Path(outdir) / CALIBRATION_FILE, calibration_report(priors, dataset.outcome_names))
        return [CALIBRATION_FILE]

    def predict(self, chain_path: Path, newdata_path: Path, outdir: Path, level: Optional[float] = None) -> List[str]:
        """
        Predict every row of a new CSV from a stored chain.

        Args:
            chain_path (Path): Chain written by ``fit``
            newdata_path (Path): CSV with the training covariate columns
            outdir (Path): Output directory
            level (Optional[float]): Interval level; the configured one when omitted

        Returns:
            List[str]: Artifact names written to outdir

        Raises:
            SchemaMismatch: If the new data misses a covariate column or cannot be parsed
            UnknownCategoryLevel: If a categorical level was not seen in training
        """
        chain = PosteriorChain.load(Path(chain_path))
        try:
            frame = pd.read_csv(newdata_path, on_bad_lines="error")
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
            raise SchemaMismatch(f"Could not parse {newdata_path}: {e}")
        covariates = chain.encode_frame(frame)
        summary = predict(
            chain,
            covariates,
            level=level if level is not None else self.config.model.interval_level,
            rng=np.random.default_rng(chain.seed),
        )
        write_csv_atomic(Path(outdir) / PREDICTIONS_FILE, summary.to_frame(chain.outcome_names))
        logger.info(f"Predicted {covariates.shape[0]} rows x {chain.d} outcomes")
        return [PREDICTIONS_FILE]

    def diagnose(self, chain_path: Path, outdir: Path) -> List[str]:
        return self.write_diagnostics(PosteriorChain.load(Path(chain_path)), outdir)
