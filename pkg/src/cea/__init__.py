"""
Cost-effectiveness analysis on fitted suBART chains.
"""

from src.cea.effects import (
    CeaDraws,
    mate,
    inb,
    ceac,
    independent_ceac,
    normal_theory_ce_probability,
    cate_cinb,
    variable_importance,
    conditional_effects,
    toggled_covariates,
    treatment_prediction_sets,
)
from src.cea.fitting import CeaFit, cea_fit, cea_design, PROPENSITY_COLUMN
from src.cea.reporting import cea_summary, cep_frame, ceac_frame, lambda_key

__all__ = [
    'CeaDraws',
    'mate',
    'inb',
    'ceac',
    'independent_ceac',
    'normal_theory_ce_probability',
    'cate_cinb',
    'variable_importance',
    'conditional_effects',
    'toggled_covariates',
    'treatment_prediction_sets',
    'CeaFit',
    'cea_fit',
    'cea_design',
    'PROPENSITY_COLUMN',
    'cea_summary',
    'cep_frame',
    'ceac_frame',
    'lambda_key',
]
