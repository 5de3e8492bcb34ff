"""
Sum-of-trees ensembles and their flat snapshots.
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from src.trees.tree import DecisionTree, children

class Forest:
    """m trees for one outcome with cached per-tree and total training fits."""

    def __init__(self, n_trees: int, n_rows: int, init_value: float = 0.0):
        self.n_rows = n_rows
        self.trees: List[DecisionTree] = [DecisionTree.stump(n_rows, init_value) for _ in range(n_trees)]
        self.tree_fits = np.full((n_trees, n_rows), init_value, dtype=float)
        self.total = self.tree_fits.sum(axis=0)

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def partial_residuals(self, outcome: np.ndarray, tree_index: int) -> np.ndarray:
        return outcome - (self.total - self.tree_fits[tree_index])

    def update_fit(self, tree_index: int) -> None:
        """Refresh the cached fit of one tree after its leaves changed."""
        new_fit = self.trees[tree_index].fit_vector(self.n_rows)
        self.total += new_fit - self.tree_fits[tree_index]
        self.tree_fits[tree_index] = new_fit

    def refresh_total(self) -> None:
        self.total = self.tree_fits.sum(axis=0)

    def split_counts(self, n_covariates: int) -> np.ndarray:
        counts = np.zeros(n_covariates, dtype=np.int64)
        for tree in self.trees:
            for covariate in tree.split_covariates():
                counts[covariate] += 1
        return counts

    def snapshot(self) -> "ForestSnapshot":
        return ForestSnapshot.from_trees(self.trees)

def partial_residuals(outcome_vec: np.ndarray, forest: Forest, excluded_tree: int) -> np.ndarray:
    """Outcome minus the fits of every tree except one."""
    return forest.partial_residuals(np.asarray(outcome_vec, dtype=float), excluded_tree)

@dataclass
class ForestSnapshot:
    """
    Flat node table for a forest.

    ``variable`` is -1 at leaves. Categorical rules send a level left when its
    bit is set in ``mask``.
    """
    variable: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    is_categorical: np.ndarray
    mask: np.ndarray
    roots: np.ndarray

    @classmethod
    def from_trees(cls, trees: List[DecisionTree]) -> "ForestSnapshot":
        variable, threshold, left, right, value, is_cat, mask, roots = [], [], [], [], [], [], [], []
        offset = 0
        for tree in trees:
            ids = sorted(tree.nodes)
            local = {node_id: offset + k for k, node_id in enumerate(ids)}
            roots.append(local[0])
            for node_id in ids:
                node = tree.nodes[node_id]
                if node.is_leaf:
                    variable.append(-1)
                    threshold.append(0.0)
                    left.append(-1)
                    right.append(-1)
                    value.append(node.value)
                    is_cat.append(False)
                    mask.append(0)
                else:
                    rule = node.rule
                    lc, rc = children(node_id)
                    variable.append(rule.covariate)
                    threshold.append(rule.threshold if not rule.categorical else 0.0)
                    left.append(local[lc])
                    right.append(local[rc])
                    value.append(0.0)
                    is_cat.append(rule.categorical)
                    mask.append(sum(1 << int(level) for level in rule.left_levels) if rule.categorical else 0)
            offset += len(ids)
        return cls(
            variable=np.asarray(variable, dtype=np.int32),
            threshold=np.asarray(threshold, dtype=float),
            left=np.asarray(left, dtype=np.int32),
            right=np.asarray(right, dtype=np.int32),
            value=np.asarray(value, dtype=float),
            is_categorical=np.asarray(is_cat, dtype=bool),
            mask=np.asarray(mask, dtype=np.uint64),
            roots=np.asarray(roots, dtype=np.int32),
        )

    @property
    def n_nodes(self) -> int:
        return self.variable.shape[0]

    def split_counts(self, n_covariates: int) -> np.ndarray:
        used = self.variable[self.variable >= 0]
        return np.bincount(used, minlength=n_covariates).astype(np.int64)

    def evaluate(self, covariates: np.ndarray) -> np.ndarray:
        """Sum of tree predictions for every row of a covariate matrix."""
        covariates = np.atleast_2d(np.asarray(covariates, dtype=float))
        n = covariates.shape[0]
        current = np.broadcast_to(self.roots, (n, self.roots.shape[0])).copy()
        while True:
            internal = self.variable[current] >= 0
            if not internal.any():
                break
            row_idx, tree_idx = np.nonzero(internal)
            nodes = current[row_idx, tree_idx]
            x = covariates[row_idx, self.variable[nodes]]
            go_left = np.empty(nodes.shape[0], dtype=bool)
            cat = self.is_categorical[nodes]
            go_left[~cat] = x[~cat] <= self.threshold[nodes[~cat]]
            if cat.any():
                levels = x[cat].astype(np.uint64)
                go_left[cat] = ((self.mask[nodes[cat]] >> levels) & np.uint64(1)).astype(bool)
            current[row_idx, tree_idx] = np.where(go_left, self.left[nodes], self.right[nodes])
        return self.value[current].sum(axis=1)
