"""
Traces, acceptance rates and parameter summaries of a chain.
"""

from dataclasses import dataclass
from itertools import combinations
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from src.core_model.chain import PosteriorChain
from src.posterior_analysis.metrics import parameter_ci
from src.utility_modules.enums import OutcomeMode

def _names(chain: PosteriorChain):
    return list(chain.outcome_names) if chain.outcome_names else [f"y{j + 1}" for j in range(chain.d)]

def parameter_draws(chain: PosteriorChain, retained: bool = True) -> Dict[str, np.ndarray]:
    """
    Named scalar draws: sigma_<outcome> (continuous, original units) and
    rho_<outcome>_<outcome> for every pair.
    """
    names = _names(chain)
    draws = {}
    if chain.mode == OutcomeMode.CONTINUOUS:
        sds = chain.sd_draws(retained)
        for j, name in enumerate(names):
            draws[f"sigma_{name}"] = sds[:, j]
    corr = chain.correlation_draws(retained)
    for j, k in combinations(range(chain.d), 2):
        draws[f"rho_{names[j]}_{names[k]}"] = corr[:, j, k]
    return draws

@dataclass
class DiagnosticsReport:
    """Per-iteration traces plus acceptance summaries."""
    trace: pd.DataFrame
    tree_acceptance: Dict[str, float]
    px_acceptance: Optional[float]
    n_burnin: int
    n_mcmc: int
    n_chains: int

    def long_trace(self) -> pd.DataFrame:
        """Trace in (chain, iteration, parameter, value) form."""
        return self.trace.melt(id_vars=["chain", "iteration", "burnin"], var_name="parameter", value_name="value")

    def to_dict(self) -> Dict[str, Any]:
        report = {
            "n_mcmc": self.n_mcmc,
            "n_burnin": self.n_burnin,
            "n_chains": self.n_chains,
            "tree_acceptance": self.tree_acceptance,
        }
        if self.px_acceptance is not None:
            report["px_mh"] = {"acceptance_rate": self.px_acceptance}
        return report

def acceptance_and_traces(chain: PosteriorChain) -> DiagnosticsReport:
    """
    Traces of every sigma, rho and a over all iterations (burn-in flagged)
    with mean tree-move acceptance per outcome and the post-burn-in PX-MH
    acceptance rate for probit chains with d > 1.
    """
    names = _names(chain)
    columns = {
        "chain": chain.chain_index,
        "iteration": chain.iteration,
        "burnin": ~chain.retained_mask,
    }
    columns.update(parameter_draws(chain, retained=False))
    if chain.a_trace is not None:
        for j, name in enumerate(names):
            columns[f"a_{name}"] = chain.a_trace[:, j]
    trace = pd.DataFrame(columns)

    tree_acceptance = {name: float(chain.tree_accept[:, j].mean()) for j, name in enumerate(names)}
    px_acceptance = None
    if chain.sigma_accept is not None:
        px_acceptance = float(chain.sigma_accept[chain.retained_mask].mean())
    return DiagnosticsReport(
        trace=trace,
        tree_acceptance=tree_acceptance,
        px_acceptance=px_acceptance,
        n_burnin=chain.n_burnin,
        n_mcmc=chain.n_mcmc,
        n_chains=chain.n_chains,
    )

def posterior_parameter_summary(
    chain: PosteriorChain,
    level: float = 0.5,
    truth: Optional[Dict[str, float]] = None,
) -> pd.DataFrame:
    """
    Posterior mean and equal-tailed interval of every sigma_j and rho_jk.

    Args:
        chain (PosteriorChain): Fitted chain
        level (float): Interval level
        truth (Optional[Dict[str, float]]): True values keyed by parameter name;
            adds error and covered columns

    Returns:
        pd.DataFrame: One row per parameter
    """
    rows = []
    for parameter, draws in parameter_draws(chain).items():
        lo, hi = parameter_ci(draws, level)
        row = {"parameter": parameter, "mean": float(draws.mean()), "lower": lo, "upper": hi}
        if truth is not None and parameter in truth:
            row["truth"] = truth[parameter]
            row["error"] = row["mean"] - truth[parameter]
            row["covered"] = bool(lo <= truth[parameter] <= hi)
        rows.append(row)
    return pd.DataFrame(rows)
