"""
Predictions, metrics and chain diagnostics.
"""

from src.posterior_analysis.prediction import PredictiveSummary, predict, add_error_noise
from src.posterior_analysis.metrics import (
    rmse,
    crps,
    log_loss,
    accuracy,
    constant_rate_log_loss,
    interval_coverage,
    parameter_ci,
    metrics_table,
)
from src.posterior_analysis.diagnostics import (
    DiagnosticsReport,
    acceptance_and_traces,
    parameter_draws,
    posterior_parameter_summary,
)

__all__ = [
    'PredictiveSummary',
    'predict',
    'add_error_noise',
    'rmse',
    'crps',
    'log_loss',
    'accuracy',
    'constant_rate_log_loss',
    'interval_coverage',
    'parameter_ci',
    'metrics_table',
    'DiagnosticsReport',
    'acceptance_and_traces',
    'parameter_draws',
    'posterior_parameter_summary',
]
