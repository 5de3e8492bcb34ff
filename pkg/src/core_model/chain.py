"""
Posterior chain storage and persistence.
"""

import io
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from src.core_model.dataset import Dataset
from src.core_model.scaling import OutcomeScaler
from src.trees.forest import ForestSnapshot
from src.utility_modules.enums import CovariateKind, OutcomeMode
from src.utility_modules.error_handling import SubartError, SchemaMismatch, UnknownCategoryLevel
from src.utility_modules.io_utils import write_bytes_atomic

_SNAPSHOT_FIELDS = ("variable", "threshold", "left", "right", "value", "is_categorical", "mask")

@dataclass
class PosteriorChain:
    """
    Draws from one or more suBART chains.

    Per-iteration arrays (``sigma_trace``, ``a_trace``, ``tree_accept``,
    ``sigma_accept``) cover every iteration including burn-in; the remaining
    arrays hold retained draws only. Sigma is stored in scaled units for
    continuous chains and as a correlation matrix for probit chains.
    """
    mode: OutcomeMode
    scaler: OutcomeScaler
    n_mcmc: int
    n_burnin: int
    sigma_trace: np.ndarray
    tree_accept: np.ndarray
    fitted_values: np.ndarray
    split_counts: np.ndarray
    chain_index: np.ndarray
    a_trace: Optional[np.ndarray] = None
    sigma_accept: Optional[np.ndarray] = None
    latent_draws: Optional[np.ndarray] = None
    forests: Optional[List[List[ForestSnapshot]]] = None
    extra_fits: Dict[str, np.ndarray] = field(default_factory=dict)
    config: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    covariate_names: Tuple[str, ...] = ()
    outcome_names: Tuple[str, ...] = ()
    n_levels: Tuple[int, ...] = ()
    level_labels: Tuple[Optional[Tuple[str, ...]], ...] = ()

    @property
    def d(self) -> int:
        return self.fitted_values.shape[2]

    @property
    def n_retained(self) -> int:
        return self.fitted_values.shape[0]

    @property
    def n_chains(self) -> int:
        return int(self.chain_index.max()) + 1 if self.chain_index.size else 1

    @property
    def iteration(self) -> np.ndarray:
        """Iteration number within its own chain, for every stored iteration."""
        return np.concatenate([np.arange(self.n_mcmc)] * self.n_chains)

    @property
    def retained_mask(self) -> np.ndarray:
        return self.iteration >= self.n_burnin

    def retained_sigma(self) -> np.ndarray:
        return self.sigma_trace[self.retained_mask]

    def sigma_original_units(self, retained: bool = True) -> np.ndarray:
        sigma = self.retained_sigma() if retained else self.sigma_trace
        if self.mode == OutcomeMode.PROBIT:
            return sigma
        return self.scaler.scale_sigma(sigma)

    def sd_draws(self, retained: bool = True) -> np.ndarray:
        sigma = self.sigma_original_units(retained)
        return np.sqrt(np.diagonal(sigma, axis1=1, axis2=2))

    def correlation_draws(self, retained: bool = True) -> np.ndarray:
        sigma = self.retained_sigma() if retained else self.sigma_trace
        sd = np.sqrt(np.diagonal(sigma, axis1=1, axis2=2))
        return sigma / (sd[:, :, None] * sd[:, None, :])

    def check_covariates(self, covariates: np.ndarray) -> np.ndarray:
        covariates = np.atleast_2d(np.asarray(covariates, dtype=float))
        if self.n_levels and covariates.shape[1] != len(self.n_levels):
            raise SchemaMismatch(f"Expected {len(self.n_levels)} covariate columns, got {covariates.shape[1]}")
        for k, levels in enumerate(self.n_levels):
            if levels:
                column = covariates[:, k]
                bad = (column < 0) | (column >= levels) | (column != np.round(column))
                if bad.any():
                    name = self.covariate_names[k] if self.covariate_names else str(k)
                    raise UnknownCategoryLevel(f"Column {name} has level {column[bad][0]!r} not seen in training")
        return covariates

    def encode_frame(self, frame: pd.DataFrame) -> np.ndarray:
        """
        Encode new rows with the training covariate schema.

        Raises:
            SchemaMismatch: If a training covariate column is missing
            UnknownCategoryLevel: If a categorical label was not seen in training
        """
        kinds = tuple(
            CovariateKind.CATEGORICAL if levels else CovariateKind.CONTINUOUS for levels in self.n_levels
        )
        labels = self.level_labels or (None,) * len(kinds)
        schema = Dataset(
            covariates=np.empty((0, len(kinds))),
            outcomes=np.empty((0, self.d)),
            covariate_kinds=kinds,
            covariate_names=self.covariate_names,
            n_levels=self.n_levels,
            level_labels=labels,
        )
        return self.check_covariates(schema.encode_new(frame))

    def evaluate(self, covariates: np.ndarray) -> np.ndarray:
        """
        Forest fits of every retained draw on new covariates.

        Returns:
            np.ndarray: retained x n x d array in original units (latent scale for probit)

        Raises:
            SubartError: If the chain was stored without forests
        """
        if self.forests is None:
            raise SubartError("Chain was stored without forest snapshots; refit with keep_forests enabled")
        covariates = self.check_covariates(covariates)
        fits = np.empty((self.n_retained, covariates.shape[0], self.d))
        for r, draw in enumerate(self.forests):
            for j, snapshot in enumerate(draw):
                fits[r, :, j] = snapshot.evaluate(covariates)
        if self.mode == OutcomeMode.CONTINUOUS:
            fits = self.scaler.inverse(fits)
        return fits

    @classmethod
    def concatenate(cls, chains: List["PosteriorChain"]) -> "PosteriorChain":
        """Stack independent chains run with identical settings."""
        first = chains[0]
        if len(chains) == 1:
            return first

        def stack(name):
            values = [getattr(c, name) for c in chains]
            return None if values[0] is None else np.concatenate(values, axis=0)

        forests = None
        if first.forests is not None:
            forests = [draw for c in chains for draw in c.forests]
        extra = {key: np.concatenate([c.extra_fits[key] for c in chains], axis=0) for key in first.extra_fits}
        offsets = np.cumsum([0] + [c.n_chains for c in chains[:-1]])
        chain_index = np.concatenate([c.chain_index + off for c, off in zip(chains, offsets)])
        return replace(
            first,
            sigma_trace=stack("sigma_trace"),
            tree_accept=stack("tree_accept"),
            fitted_values=stack("fitted_values"),
            split_counts=stack("split_counts"),
            chain_index=chain_index,
            a_trace=stack("a_trace"),
            sigma_accept=stack("sigma_accept"),
            latent_draws=stack("latent_draws"),
            forests=forests,
            extra_fits=extra,
        )

    def _arrays(self) -> Dict[str, np.ndarray]:
        arrays = {
            "sigma_trace": self.sigma_trace,
            "tree_accept": self.tree_accept,
            "fitted_values": self.fitted_values,
            "split_counts": self.split_counts,
            "chain_index": self.chain_index,
            "scaler_mins": self.scaler.mins,
            "scaler_maxs": self.scaler.maxs,
        }
        for name in ("a_trace", "sigma_accept", "latent_draws"):
            value = getattr(self, name)
            if value is not None:
                arrays[name] = value
        for key, value in self.extra_fits.items():
            arrays[f"extra__{key}"] = value
        if self.forests is not None:
            flat = [snapshot for draw in self.forests for snapshot in draw]
            for name in _SNAPSHOT_FIELDS:
                arrays[f"forest_{name}"] = np.concatenate([getattr(s, name) for s in flat])
            arrays["forest_node_offsets"] = np.cumsum([0] + [s.n_nodes for s in flat])
            arrays["forest_roots"] = np.stack([s.roots for s in flat])
        return arrays

    def save(self, path: Path) -> None:
        """Write the chain as a compressed .npz with a JSON metadata entry."""
        meta = {
            "mode": self.mode.value,
            "n_mcmc": self.n_mcmc,
            "n_burnin": self.n_burnin,
            "config": self.config,
            "seed": self.seed,
            "covariate_names": list(self.covariate_names),
            "outcome_names": list(self.outcome_names),
            "n_levels": list(self.n_levels),
            "level_labels": [list(labels) if labels is not None else None for labels in self.level_labels],
        }
        buffer = io.BytesIO()
        np.savez_compressed(buffer, meta=np.array(json.dumps(meta, sort_keys=True, default=str)), **self._arrays())
        write_bytes_atomic(path, buffer.getvalue())

    @classmethod
    def load(cls, path: Path) -> "PosteriorChain":
        with np.load(path, allow_pickle=False) as data:
            meta = json.loads(str(data["meta"]))
            arrays = {key: data[key] for key in data.files if key != "meta"}

        forests = None
        if "forest_roots" in arrays:
            offsets = arrays["forest_node_offsets"]
            roots = arrays["forest_roots"]
            n_retained, d = arrays["fitted_values"].shape[0], arrays["fitted_values"].shape[2]
            flat = []
            for k in range(roots.shape[0]):
                lo, hi = offsets[k], offsets[k + 1]
                fields = {name: arrays[f"forest_{name}"][lo:hi] for name in _SNAPSHOT_FIELDS}
                flat.append(ForestSnapshot(roots=roots[k], **fields))
            forests = [flat[r * d:(r + 1) * d] for r in range(n_retained)]

        extra = {key[len("extra__"):]: value for key, value in arrays.items() if key.startswith("extra__")}
        return cls(
            mode=OutcomeMode(meta["mode"]),
            scaler=OutcomeScaler(mins=arrays["scaler_mins"], maxs=arrays["scaler_maxs"]),
            n_mcmc=meta["n_mcmc"],
            n_burnin=meta["n_burnin"],
            sigma_trace=arrays["sigma_trace"],
            tree_accept=arrays["tree_accept"],
            fitted_values=arrays["fitted_values"],
            split_counts=arrays["split_counts"],
            chain_index=arrays["chain_index"],
            a_trace=arrays.get("a_trace"),
            sigma_accept=arrays.get("sigma_accept"),
            latent_draws=arrays.get("latent_draws"),
            forests=forests,
            extra_fits=extra,
            config=meta["config"],
            seed=meta["seed"],
            covariate_names=tuple(meta["covariate_names"]),
            outcome_names=tuple(meta["outcome_names"]),
            n_levels=tuple(meta["n_levels"]),
            level_labels=tuple(tuple(labels) if labels is not None else None for labels in meta.get("level_labels", [])),
        )
