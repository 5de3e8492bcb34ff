"""
Treatment effects and net benefit from toggled forest evaluations.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy import special

from src.core_model.chain import PosteriorChain
from src.utility_modules.error_handling import InvalidParameter, SchemaMismatch, ZeroVariance

TREATED_SET = "treated"
CONTROL_SET = "control"

@dataclass
class CeaDraws:
    """
    Per-draw incremental cost and effect (original units).

    ``tau_c`` and ``tau_q`` hold the per-row conditional effects
    (draws x rows) when they were computed.
    """
    delta_c: np.ndarray
    delta_q: np.ndarray
    tau_c: Optional[np.ndarray] = None
    tau_q: Optional[np.ndarray] = None

    @property
    def n_draws(self) -> int:
        return self.delta_c.shape[0]

    def moments(self):
        """(mean dq, mean dc, var dq, var dc, cov(dq, dc)) of the draws."""
        cov = np.cov(self.delta_q, self.delta_c)
        return (
            float(self.delta_q.mean()),
            float(self.delta_c.mean()),
            float(cov[0, 0]),
            float(cov[1, 1]),
            float(cov[0, 1]),
        )

def treatment_index(chain: PosteriorChain, treatment_name: str) -> int:
    if treatment_name not in chain.covariate_names:
        raise SchemaMismatch(f"Treatment column {treatment_name!r} is not among the fitted covariates")
    return chain.covariate_names.index(treatment_name)

def toggled_covariates(covariates: np.ndarray, column: int, value: float) -> np.ndarray:
    """Copy of the design with one column set to a constant; every other column held fixed."""
    toggled = np.array(covariates, dtype=float, copy=True)
    toggled[:, column] = value
    return toggled

def treatment_prediction_sets(covariates: np.ndarray, column: int):
    return {
        TREATED_SET: toggled_covariates(covariates, column, 1.0),
        CONTROL_SET: toggled_covariates(covariates, column, 0.0),
    }

def conditional_effects(
    chain: PosteriorChain,
    covariates: Optional[np.ndarray] = None,
    treatment_name: str = "treatment",
) -> np.ndarray:
    """
    Per-draw, per-row, per-outcome effect f(x, t=1) - f(x, t=0).

    Uses the toggled fits stored during sampling when present, otherwise
    evaluates the stored forests on the toggled design.
    """
    if covariates is None and TREATED_SET in chain.extra_fits and CONTROL_SET in chain.extra_fits:
        return chain.extra_fits[TREATED_SET] - chain.extra_fits[CONTROL_SET]
    if covariates is None:
        raise InvalidParameter("No toggled fits stored on the chain; pass the fitted design matrix")
    column = treatment_index(chain, treatment_name)
    sets = treatment_prediction_sets(covariates, column)
    return chain.evaluate(sets[TREATED_SET]) - chain.evaluate(sets[CONTROL_SET])

def mate(
    chain: PosteriorChain,
    covariates: Optional[np.ndarray] = None,
    cost_index: int = 0,
    effect_index: int = 1,
    treatment_name: str = "treatment",
    keep_rows: bool = True,
) -> CeaDraws:
    """
    Mixed average treatment effects of cost and effect per retained draw.

    Each draw's forests are evaluated with the treatment column set to 1 and
    to 0; the difference is averaged over rows.
    """
    tau = conditional_effects(chain, covariates, treatment_name)
    delta = tau.mean(axis=1)
    return CeaDraws(
        delta_c=delta[:, cost_index],
        delta_q=delta[:, effect_index],
        tau_c=tau[:, :, cost_index] if keep_rows else None,
        tau_q=tau[:, :, effect_index] if keep_rows else None,
    )

def inb(draws: CeaDraws, lam: float) -> np.ndarray:
    """Incremental net benefit lam * dq - dc per draw."""
    if lam < 0:
        raise InvalidParameter(f"Willingness to pay must be nonnegative, got {lam}")
    return lam * draws.delta_q - draws.delta_c

def ceac(draws: CeaDraws, lambdas: Sequence[float]) -> np.ndarray:
    """Fraction of draws with positive net benefit at each willingness to pay."""
    return np.array([np.mean(inb(draws, lam) > 0) for lam in lambdas])

def independent_ceac(draws: CeaDraws, lambdas: Sequence[float]) -> np.ndarray:
    """
    Acceptability curve with the joint dependence of dc and dq removed.

    Counts the share of all (dq_i, dc_k) pairs with lam * dq_i > dc_k, which is
    the probability under the product of the two marginals.
    """
    costs = np.sort(draws.delta_c)
    n_pairs = costs.shape[0] * draws.delta_q.shape[0]
    out = []
    for lam in lambdas:
        if lam < 0:
            raise InvalidParameter(f"Willingness to pay must be nonnegative, got {lam}")
        out.append(np.searchsorted(costs, lam * draws.delta_q, side="left").sum() / n_pairs)
    return np.array(out)

def normal_theory_ce_probability(
    mean_q: float,
    mean_c: float,
    var_q: float,
    var_c: float,
    cov: float,
    lam: float,
) -> float:
    """
    Pr(INB > 0) if (dq, dc) were bivariate normal.

    Raises:
        ZeroVariance: If the net-benefit variance is not positive
    """
    variance = lam * lam * var_q + var_c - 2.0 * lam * cov
    if not variance > 0:
        raise ZeroVariance(f"Net benefit variance at lambda={lam} is {variance}")
    return float(special.ndtr((lam * mean_q - mean_c) / np.sqrt(variance)))

def cate_cinb(
    source: Union[CeaDraws, PosteriorChain],
    lam: float,
    covariates: Optional[np.ndarray] = None,
    treatment_name: str = "treatment",
) -> pd.DataFrame:
    """
    Per-row posterior means of tau_c, tau_q and CINB at one willingness to pay.

    Args:
        source: A fitted chain, or draws from ``mate`` that kept their rows
        lam: Willingness to pay
        covariates: Design to toggle when the chain has no stored toggled fits
        treatment_name: Name of the treatment column in the chain's schema
    """
    if isinstance(source, PosteriorChain):
        source = mate(source, covariates, treatment_name=treatment_name, keep_rows=True)
    if source.tau_c is None or source.tau_q is None:
        raise InvalidParameter("Conditional effects were not kept on these draws")
    if lam < 0:
        raise InvalidParameter(f"Willingness to pay must be nonnegative, got {lam}")
    cinb = lam * source.tau_q - source.tau_c
    return pd.DataFrame({
        "row": np.arange(source.tau_c.shape[1]),
        "tau_c": source.tau_c.mean(axis=0),
        "tau_q": source.tau_q.mean(axis=0),
        "cinb": cinb.mean(axis=0),
    })

def variable_importance(chain: PosteriorChain) -> pd.DataFrame:
    """
    Share of split rules using each covariate, per outcome.

    Counts are pooled over trees and retained draws, so draws without
    internal nodes carry no weight. A forest that never splits gets zeros.
    """
    counts = chain.split_counts.sum(axis=0).astype(float)
    totals = counts.sum(axis=1, keepdims=True)
    shares = np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)
    outcomes = list(chain.outcome_names) if chain.outcome_names else [f"y{j + 1}" for j in range(counts.shape[0])]
    covariates = list(chain.covariate_names) if chain.covariate_names else [f"x{k + 1}" for k in range(counts.shape[1])]
    return pd.DataFrame(shares, index=pd.Index(outcomes, name="outcome"), columns=covariates)
