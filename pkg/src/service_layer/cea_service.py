"""
Cost-effectiveness service module.

This module runs the propensity-augmented cost-effectiveness workflow and
writes its result bundle.
"""

import logging
from pathlib import Path
from typing import List, Optional, Sequence

from config.config_template import Config
from src.cea.effects import cate_cinb, mate, variable_importance
from src.cea.fitting import PROPENSITY_COLUMN, cea_fit
from src.cea.reporting import cea_summary, ceac_frame, cep_frame, lambda_key
from src.core_model.dataset import dataset_to_frame, load_dataset_csv
from src.posterior_analysis.diagnostics import acceptance_and_traces
from src.utility_modules.enums import ModelVariant, OutcomeMode
from src.utility_modules.error_handling import InvalidParameter
from src.utility_modules.io_utils import write_csv_atomic, write_json_atomic

# Configure logging
logger = logging.getLogger(__name__)

CEAC_FILE = "ceac.csv"
CEP_FILE = "cep_draws.csv"
SUMMARY_FILE = "summary.json"
DESIGN_FILE = "design.csv"
IMPORTANCE_FILE = "variable_importance.csv"

def model_variant(use_propensity: bool, independent: bool) -> ModelVariant:
    if use_propensity:
        return ModelVariant.PS_IND_BART if independent else ModelVariant.PS_SUBART
    return ModelVariant.IND_BART if independent else ModelVariant.SUBART

class CeaService:
    """Service for cost-effectiveness analyses."""

    def __init__(self, config: Config):
        """
        Initialize the service with a resolved configuration.

        Args:
            config (Config): Configuration object
        """
        self.config = config

    def run(
        self,
        data_path: Path,
        outdir: Path,
        categorical_cols: Sequence[str] = (),
        lambdas: Optional[Sequence[float]] = None,
    ) -> List[str]:
        """
        Fit the cost and effect model and write the full result bundle.

        Writes the acceptability curve over the configured grid (joint and
        dependence-free), the cost-effectiveness plane draws, a JSON summary
        of dc, dq and INB at the reporting lambdas, per-row CATE/CINB, split
        shares and the fitted design matrix.

        Args:
            data_path (Path): CSV with covariates, treatment, cost and effect columns
            outdir (Path): Output directory
            categorical_cols (Sequence[str]): Covariates to treat as categorical
            lambdas (Optional[Sequence[float]]): Reporting lambdas; the configured ones when omitted

        Returns:
            List[str]: Artifact names written to outdir
        """
        cea_config = self.config.cea
        if cea_config.cost_col == cea_config.effect_col:
            raise InvalidParameter("Cost and effect columns must differ")
        report_lambdas = list(lambdas) if lambdas else list(cea_config.report_lambdas)
        if any(lam < 0 for lam in report_lambdas):
            raise InvalidParameter(f"Willingness to pay must be nonnegative, got {report_lambdas}")

        dataset = load_dataset_csv(
            Path(data_path),
            outcome_cols=[cea_config.cost_col, cea_config.effect_col],
            categorical_cols=categorical_cols,
            treatment_col=cea_config.treatment_col,
            mode=OutcomeMode.CONTINUOUS,
        )
        model_config = self.config.model.model_copy(update={"mode": OutcomeMode.CONTINUOUS})
        fit = cea_fit(dataset, model_config, use_propensity=cea_config.use_propensity)
        draws = mate(fit.chain, treatment_name=dataset.treatment_name)
        variant = model_variant(cea_config.use_propensity, model_config.independence_flag)

        outdir = Path(outdir)
        grid = sorted(set(float(v) for v in cea_config.lambda_grid) | set(float(v) for v in report_lambdas))
        write_csv_atomic(outdir / CEAC_FILE, ceac_frame({variant.value: draws}, grid, include_independent=True))
        write_csv_atomic(outdir / CEP_FILE, cep_frame(draws))
        artifacts = [CEAC_FILE, CEP_FILE]

        for lam in report_lambdas:
            name = f"cate_{lambda_key(lam)}.csv"
            write_csv_atomic(outdir / name, cate_cinb(draws, lam))
            artifacts.append(name)

        write_csv_atomic(outdir / IMPORTANCE_FILE, variable_importance(fit.chain).reset_index())
        write_csv_atomic(outdir / DESIGN_FILE, dataset_to_frame(fit.design))
        artifacts += [IMPORTANCE_FILE, DESIGN_FILE]

        summary = cea_summary(draws, report_lambdas, level=cea_config.ci_level)
        summary.update({
            "variant": variant.value,
            "n": dataset.n,
            "n_treated": int(dataset.treatment.sum()),
            "cost_col": cea_config.cost_col,
            "effect_col": cea_config.effect_col,
            "design_columns": list(fit.design.covariate_names),
            "propensity_column": PROPENSITY_COLUMN if cea_config.use_propensity else None,
            "diagnostics": acceptance_and_traces(fit.chain).to_dict(),
        })
        write_json_atomic(outdir / SUMMARY_FILE, summary)
        artifacts.append(SUMMARY_FILE)
        logger.info(
            f"CEA finished: delta_c={summary['delta_c']['mean']:.4g}, delta_q={summary['delta_q']['mean']:.4g}"
        )
        return artifacts
