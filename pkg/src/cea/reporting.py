"""
Summary tables for cost-effectiveness results.
"""

from typing import Any, Dict, Mapping, Sequence

import numpy as np
import pandas as pd

from src.cea.effects import CeaDraws, ceac, independent_ceac, inb, normal_theory_ce_probability
from src.posterior_analysis.metrics import parameter_ci
from src.utility_modules.error_handling import ZeroVariance

def _describe(values: np.ndarray, level: float) -> Dict[str, float]:
    lo, hi = parameter_ci(values, level)
    return {"mean": float(np.mean(values)), "lower": lo, "upper": hi}

def lambda_key(lam: float) -> str:
    return f"inb_{int(lam)}" if float(lam).is_integer() else f"inb_{lam:g}"

def cea_summary(draws: CeaDraws, lambdas: Sequence[float], level: float = 0.95) -> Dict[str, Any]:
    """
    Posterior mean and equal-tailed interval of dc, dq and INB at each lambda.

    INB summaries come from the joint draws, together with the counting
    and normal-theory probabilities of cost-effectiveness.
    """
    summary = {
        "level": level,
        "n_draws": draws.n_draws,
        "delta_c": _describe(draws.delta_c, level),
        "delta_q": _describe(draws.delta_q, level),
    }
    moments = draws.moments()
    for lam in lambdas:
        entry = _describe(inb(draws, lam), level)
        entry["lambda"] = float(lam)
        entry["prob_cost_effective"] = float(ceac(draws, [lam])[0])
        try:
            entry["prob_cost_effective_normal"] = normal_theory_ce_probability(*moments, lam)
        except ZeroVariance:
            entry["prob_cost_effective_normal"] = None
        summary[lambda_key(lam)] = entry
    return summary

def cep_frame(draws: CeaDraws) -> pd.DataFrame:
    """Cost-effectiveness plane: one row per draw."""
    return pd.DataFrame({
        "draw": np.arange(draws.n_draws),
        "delta_c": draws.delta_c,
        "delta_q": draws.delta_q,
    })

def ceac_frame(
    draws_by_variant: Mapping[str, CeaDraws],
    lambdas: Sequence[float],
    include_independent: bool = False,
) -> pd.DataFrame:
    """Acceptability curves of several variants in long form (lambda, variant, probability)."""
    frames = []
    for variant, draws in draws_by_variant.items():
        frames.append(pd.DataFrame({"lambda": lambdas, "variant": variant, "probability": ceac(draws, lambdas)}))
        if include_independent:
            frames.append(pd.DataFrame({
                "lambda": lambdas,
                "variant": f"{variant}-independent",
                "probability": independent_ceac(draws, lambdas),
            }))
    return pd.concat(frames, ignore_index=True)
