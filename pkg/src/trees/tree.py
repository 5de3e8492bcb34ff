"""
Binary regression trees with axis-aligned splits.

Nodes use heap numbering: the children of node i are 2i + 1 (left) and
2i + 2 (right), so the depth of a node follows from its id. Every node keeps
the training row indices that reach it.
"""

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from src.utility_modules.error_handling import SingleLevel, UnknownCategoryLevel

@dataclass(frozen=True)
class SplitRule:
    """x[covariate] <= threshold, or x[covariate] in left_levels for categoricals."""
    covariate: int
    threshold: Optional[float] = None
    left_levels: Optional[FrozenSet[int]] = None

    @property
    def categorical(self) -> bool:
        return self.left_levels is not None

    def goes_left(self, values: np.ndarray) -> np.ndarray:
        if self.categorical:
            return np.isin(values.astype(int), list(self.left_levels))
        return values <= self.threshold

    def to_dict(self) -> dict:
        if self.categorical:
            return {"covariate": self.covariate, "left_levels": sorted(int(v) for v in self.left_levels)}
        return {"covariate": self.covariate, "threshold": float(self.threshold)}

@dataclass
class TreeNode:
    rows: np.ndarray
    value: float = 0.0
    rule: Optional[SplitRule] = None

    @property
    def is_leaf(self) -> bool:
        return self.rule is None

def node_depth(node_id: int) -> int:
    return int(np.floor(np.log2(node_id + 1)))

def children(node_id: int) -> Tuple[int, int]:
    return 2 * node_id + 1, 2 * node_id + 2

def parent(node_id: int) -> Optional[int]:
    return None if node_id == 0 else (node_id - 1) // 2

class DecisionTree:
    """A single regression tree over a fixed training design."""

    def __init__(self, nodes: Dict[int, TreeNode]):
        self.nodes = nodes

    @classmethod
    def stump(cls, n_rows: int, value: float = 0.0) -> "DecisionTree":
        return cls({0: TreeNode(rows=np.arange(n_rows), value=value)})

    def copy(self) -> "DecisionTree":
        return DecisionTree({
            node_id: TreeNode(rows=node.rows, value=node.value, rule=node.rule)
            for node_id, node in self.nodes.items()
        })

    def leaves(self) -> List[int]:
        return sorted(node_id for node_id, node in self.nodes.items() if node.is_leaf)

    def internal_nodes(self) -> List[int]:
        return sorted(node_id for node_id, node in self.nodes.items() if not node.is_leaf)

    def nog_nodes(self) -> List[int]:
        """Internal nodes whose two children are both leaves."""
        result = []
        for node_id in self.internal_nodes():
            left, right = children(node_id)
            if self.nodes[left].is_leaf and self.nodes[right].is_leaf:
                result.append(node_id)
        return result

    @property
    def n_leaves(self) -> int:
        return len(self.leaves())

    @property
    def is_stump(self) -> bool:
        return len(self.nodes) == 1

    def max_depth(self) -> int:
        return max(node_depth(node_id) for node_id in self.nodes)

    def grow(self, node_id: int, rule: SplitRule, left_rows: np.ndarray, right_rows: np.ndarray) -> None:
        node = self.nodes[node_id]
        node.rule = rule
        left, right = children(node_id)
        self.nodes[left] = TreeNode(rows=left_rows, value=node.value)
        self.nodes[right] = TreeNode(rows=right_rows, value=node.value)

    def prune(self, node_id: int) -> None:
        left, right = children(node_id)
        del self.nodes[left]
        del self.nodes[right]
        self.nodes[node_id].rule = None

    def change(self, node_id: int, rule: SplitRule, left_rows: np.ndarray, right_rows: np.ndarray) -> None:
        self.nodes[node_id].rule = rule
        left, right = children(node_id)
        self.nodes[left].rows = left_rows
        self.nodes[right].rows = right_rows

    def fit_vector(self, n_rows: int) -> np.ndarray:
        """Leaf value of every training row."""
        out = np.zeros(n_rows)
        for node_id in self.leaves():
            node = self.nodes[node_id]
            out[node.rows] = node.value
        return out

    def route(self, covariates: np.ndarray) -> np.ndarray:
        """Leaf id reached by each row of a covariate matrix."""
        covariates = np.atleast_2d(covariates)
        current = np.zeros(covariates.shape[0], dtype=np.int64)
        while True:
            moved = False
            for node_id in np.unique(current):
                node = self.nodes[int(node_id)]
                if node.is_leaf:
                    continue
                here = current == node_id
                left, right = children(int(node_id))
                go_left = node.rule.goes_left(covariates[here, node.rule.covariate])
                current[here] = np.where(go_left, left, right)
                moved = True
            if not moved:
                return current

    def predict(self, covariates: np.ndarray) -> np.ndarray:
        leaf_ids = self.route(covariates)
        values = {node_id: self.nodes[node_id].value for node_id in self.leaves()}
        return np.array([values[int(i)] for i in leaf_ids], dtype=float)

    def split_covariates(self) -> List[int]:
        return [self.nodes[node_id].rule.covariate for node_id in self.internal_nodes()]

    def topology(self) -> Tuple:
        """Hashable description of the splits, ignoring leaf values."""
        return tuple((node_id, self.nodes[node_id].rule) for node_id in self.internal_nodes())

    def to_dict(self) -> dict:
        return {
            "nodes": [
                {
                    "id": node_id,
                    "depth": node_depth(node_id),
                    "rule": None if node.is_leaf else node.rule.to_dict(),
                    "value": float(node.value) if node.is_leaf else None,
                }
                for node_id, node in sorted(self.nodes.items())
            ]
        }

def evaluate_tree(tree: DecisionTree, x: np.ndarray, n_levels: Optional[Sequence[int]] = None) -> float:
    """
    Leaf value of the unique leaf containing covariate row x.

    Args:
        tree (DecisionTree): Tree to evaluate
        x (np.ndarray): Covariate row in encoded form
        n_levels (Optional[Sequence[int]]): Level counts per covariate (0 for continuous),
            used to reject unseen categorical levels

    Raises:
        UnknownCategoryLevel: If a categorical entry is outside the training levels
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    node_id = 0
    while not tree.nodes[node_id].is_leaf:
        rule = tree.nodes[node_id].rule
        value = x[rule.covariate]
        if rule.categorical and n_levels is not None:
            if not (0 <= value < n_levels[rule.covariate]) or value != int(value):
                raise UnknownCategoryLevel(f"Covariate {rule.covariate} has unseen level {value!r}")
        left, right = children(node_id)
        node_id = left if rule.goes_left(np.array([value]))[0] else right
    return tree.nodes[node_id].value

@dataclass(frozen=True)
class CategoricalOrdering:
    """Observed levels sorted by mean partial residual."""
    order: Tuple[int, ...]

    def cuts(self) -> List[FrozenSet[int]]:
        """Left-level sets for the L - 1 cut positions."""
        return [frozenset(self.order[:k]) for k in range(1, len(self.order))]

def order_categorical_levels(levels: Sequence[int], means: Sequence[float]) -> CategoricalOrdering:
    """
    Sort levels ascending by mean partial residual, ties by level index.

    Raises:
        SingleLevel: If fewer than 2 levels are observed
    """
    if len(levels) < 2:
        raise SingleLevel("A categorical split needs at least 2 observed levels")
    ranked = sorted(zip(means, levels), key=lambda pair: (pair[0], pair[1]))
    return CategoricalOrdering(order=tuple(int(level) for _, level in ranked))

def splittable_covariates(covariates: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Covariates taking at least two distinct values among the rows."""
    if rows.size < 2:
        return np.empty(0, dtype=np.int64)
    block = covariates[rows]
    return np.flatnonzero(block.max(axis=0) > block.min(axis=0))

def candidate_count(covariates: np.ndarray, rows: np.ndarray, covariate: int) -> int:
    """Number of split candidates for a covariate: distinct values (or levels) minus one."""
    return max(np.unique(covariates[rows, covariate]).size - 1, 0)

def split_candidates(
    covariates: np.ndarray,
    rows: np.ndarray,
    covariate: int,
    categorical: bool,
    target: Optional[np.ndarray] = None,
) -> List[SplitRule]:
    """
    Candidate split rules for one covariate within a node.

    Continuous covariates cut at every distinct value except the largest.
    Categorical covariates cut along the ordering of levels by mean target.
    """
    values = covariates[rows, covariate]
    if categorical:
        levels, inverse = np.unique(values.astype(int), return_inverse=True)
        if levels.size < 2:
            return []
        if target is None:
            means = np.zeros(levels.size)
        else:
            sums = np.bincount(inverse, weights=target[rows], minlength=levels.size)
            counts = np.bincount(inverse, minlength=levels.size)
            means = sums / counts
        ordering = order_categorical_levels(levels.tolist(), means.tolist())
        return [SplitRule(covariate=covariate, left_levels=cut) for cut in ordering.cuts()]
    distinct = np.unique(values)
    return [SplitRule(covariate=covariate, threshold=float(t)) for t in distinct[:-1]]
