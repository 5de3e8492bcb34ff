"""
Back-fitting tree sweep and draw recording shared by the samplers.
"""

from typing import Dict, List, Optional, Tuple

import numpy as np

from config.config_template import ModelConfig
from src.core_model.chain import PosteriorChain
from src.core_model.dataset import Dataset
from src.core_model.scaling import OutcomeScaler
from src.distributions.linalg import conditional_normal_params
from src.trees.forest import Forest, ForestSnapshot
from src.trees.likelihood import draw_leaf_parameters, rows_log_marginal
from src.trees.moves import mh_accept, propose_move
from src.utility_modules.enums import OutcomeMode

def conditional_offsets(residuals: np.ndarray, sigma: np.ndarray, j: int, use_offsets: bool = True) -> Tuple[np.ndarray, float]:
    """
    Per-row offsets u and conditional variance v for outcome j.

    Args:
        residuals (np.ndarray): n x d current errors (target minus fit)
        sigma (np.ndarray): d x d error covariance
        j (int): Outcome index
        use_offsets (bool): When False, u = 0 and v = sigma_jj

    Returns:
        Tuple[np.ndarray, float]: (u, v)
    """
    n, d = residuals.shape
    if d == 1 or not use_offsets:
        return np.zeros(n), float(sigma[j, j])
    params = conditional_normal_params(sigma, j)
    others = [k for k in range(d) if k != j]
    return residuals[:, others] @ params.offset_weights, params.conditional_variance

def sweep_outcome(
    forest: Forest,
    target: np.ndarray,
    offsets: np.ndarray,
    v: float,
    leaf_sd: float,
    covariates: np.ndarray,
    is_categorical: np.ndarray,
    config: ModelConfig,
    rng: np.random.Generator,
) -> float:
    """
    One Metropolis-within-Gibbs pass over the trees of one outcome.

    Each tree gets a grow/prune/change proposal judged on the changed leaves
    only, followed by a conjugate redraw of all its leaves.

    Returns:
        float: Fraction of trees whose proposal was accepted
    """
    accepted = 0
    for t, tree in enumerate(forest.trees):
        residuals = forest.partial_residuals(target, t)
        adjusted = residuals - offsets
        proposal = propose_move(
            tree,
            covariates,
            is_categorical,
            rng,
            target=adjusted,
            move_probs=config.move_probs,
            alpha=config.alpha,
            beta=config.beta,
        )
        if not proposal.auto_reject:
            after = sum(rows_log_marginal(adjusted, rows, v, leaf_sd) for rows in proposal.rows_after)
            before = sum(rows_log_marginal(adjusted, rows, v, leaf_sd) for rows in proposal.rows_before)
            if mh_accept(after - before, proposal.log_prior_ratio, proposal.log_q_ratio, rng):
                proposal.apply(tree)
                accepted += 1
        draw_leaf_parameters(tree, residuals, offsets, v, leaf_sd, rng)
        forest.update_fit(t)
    return accepted / forest.n_trees

class DrawRecorder:
    """Preallocated storage for one chain, turned into a PosteriorChain at the end."""

    def __init__(
        self,
        dataset: Dataset,
        config: ModelConfig,
        prediction_sets: Optional[Dict[str, np.ndarray]] = None,
        with_a: bool = False,
        with_px: bool = False,
    ):
        self.config = config
        self.n_mcmc = config.n_mcmc
        self.n_burnin = config.n_burnin
        n_retained = self.n_mcmc - self.n_burnin
        n, d, p = dataset.n, dataset.d, dataset.p

        self.sigma_trace = np.empty((self.n_mcmc, d, d))
        self.tree_accept = np.empty((self.n_mcmc, d))
        self.a_trace = np.empty((self.n_mcmc, d)) if with_a else None
        self.sigma_accept = np.zeros(self.n_mcmc, dtype=bool) if with_px else None
        self.fitted_values = np.empty((n_retained, n, d))
        self.split_counts = np.zeros((n_retained, d, p), dtype=np.int64)
        self.latent = np.empty((n_retained, n, d)) if config.store_latent and config.mode == OutcomeMode.PROBIT else None
        self.forests: Optional[List[List[ForestSnapshot]]] = [] if config.keep_forests else None
        self.prediction_sets = {key: np.atleast_2d(np.asarray(value, dtype=float)) for key, value in (prediction_sets or {}).items()}
        self.extra_fits = {key: np.empty((n_retained, value.shape[0], d)) for key, value in self.prediction_sets.items()}
        self.dataset = dataset

    def record_iteration(
        self,
        iteration: int,
        sigma: np.ndarray,
        accept: np.ndarray,
        a: Optional[np.ndarray] = None,
        sigma_accepted: Optional[bool] = None,
    ) -> None:
        self.sigma_trace[iteration] = sigma
        self.tree_accept[iteration] = accept
        if self.a_trace is not None and a is not None:
            self.a_trace[iteration] = a
        if self.sigma_accept is not None and sigma_accepted is not None:
            self.sigma_accept[iteration] = sigma_accepted

    def record_draw(
        self,
        iteration: int,
        forests: List[Forest],
        fits: np.ndarray,
        latent: Optional[np.ndarray] = None,
    ) -> None:
        """Store a retained draw; fits must already be in reporting units."""
        r = iteration - self.n_burnin
        if r < 0:
            return
        self.fitted_values[r] = fits
        p = self.dataset.p
        for j, forest in enumerate(forests):
            self.split_counts[r, j] = forest.split_counts(p)
        if self.latent is not None and latent is not None:
            self.latent[r] = latent
        if self.forests is None and not self.prediction_sets:
            return
        snapshots = [forest.snapshot() for forest in forests]
        if self.forests is not None:
            self.forests.append(snapshots)
        for key, covariates in self.prediction_sets.items():
            self.extra_fits[key][r] = np.column_stack([s.evaluate(covariates) for s in snapshots])

    def to_chain(self, scaler: OutcomeScaler, seed: Optional[int]) -> PosteriorChain:
        extra = self.extra_fits
        if self.config.mode == OutcomeMode.CONTINUOUS:
            extra = {key: scaler.inverse(value) for key, value in extra.items()}
        return PosteriorChain(
            mode=self.config.mode,
            scaler=scaler,
            n_mcmc=self.n_mcmc,
            n_burnin=self.n_burnin,
            sigma_trace=self.sigma_trace,
            tree_accept=self.tree_accept,
            fitted_values=self.fitted_values,
            split_counts=self.split_counts,
            chain_index=np.zeros(self.n_mcmc, dtype=np.int64),
            a_trace=self.a_trace,
            sigma_accept=self.sigma_accept,
            latent_draws=self.latent,
            forests=self.forests,
            extra_fits=extra,
            config=self.config.model_dump(mode="json"),
            seed=seed,
            covariate_names=self.dataset.covariate_names,
            outcome_names=self.dataset.outcome_names,
            n_levels=self.dataset.n_levels,
            level_labels=self.dataset.level_labels,
        )
