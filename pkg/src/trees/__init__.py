"""
Regression tree machinery for the sum-of-trees samplers.
"""

from src.trees.tree import (
    SplitRule,
    TreeNode,
    DecisionTree,
    CategoricalOrdering,
    evaluate_tree,
    order_categorical_levels,
    split_candidates,
    splittable_covariates,
    candidate_count,
)
from src.trees.likelihood import (
    leaf_log_marginal,
    rows_log_marginal,
    tree_log_marginal_likelihood,
    leaf_posterior,
    draw_leaf_parameters,
)
from src.trees.moves import TreeProposal, propose_move, tree_log_prior, mh_accept, available_move_probs
from src.trees.forest import Forest, ForestSnapshot, partial_residuals

__all__ = [
    'SplitRule',
    'TreeNode',
    'DecisionTree',
    'CategoricalOrdering',
    'evaluate_tree',
    'order_categorical_levels',
    'split_candidates',
    'splittable_covariates',
    'candidate_count',
    'leaf_log_marginal',
    'rows_log_marginal',
    'tree_log_marginal_likelihood',
    'leaf_posterior',
    'draw_leaf_parameters',
    'TreeProposal',
    'propose_move',
    'tree_log_prior',
    'mh_accept',
    'available_move_probs',
    'Forest',
    'ForestSnapshot',
    'partial_residuals',
]
