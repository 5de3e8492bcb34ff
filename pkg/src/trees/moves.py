"""
Grow, prune and change proposals with their Metropolis-Hastings terms.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.priors.tree_prior import tree_split_probability
from src.trees.tree import (
    DecisionTree,
    SplitRule,
    children,
    node_depth,
    parent,
    candidate_count,
    split_candidates,
    splittable_covariates,
)
from src.utility_modules.enums import MoveKind

DEFAULT_MOVE_PROBS = {"grow": 0.25, "prune": 0.25, "change": 0.5}

@dataclass
class TreeProposal:
    """A proposed modification of one tree and its log acceptance terms."""
    kind: MoveKind
    node_id: int = 0
    rule: Optional[SplitRule] = None
    child_rows: Optional[Tuple[np.ndarray, np.ndarray]] = None
    log_q_ratio: float = 0.0
    log_prior_ratio: float = 0.0
    auto_reject: bool = False
    rows_before: List[np.ndarray] = field(default_factory=list)
    rows_after: List[np.ndarray] = field(default_factory=list)

    def apply(self, tree: DecisionTree) -> None:
        """Apply the move to the tree in place."""
        if self.auto_reject:
            return
        if self.kind == MoveKind.GROW:
            tree.grow(self.node_id, self.rule, *self.child_rows)
        elif self.kind == MoveKind.PRUNE:
            tree.prune(self.node_id)
        else:
            tree.change(self.node_id, self.rule, *self.child_rows)

    def candidate(self, tree: DecisionTree) -> DecisionTree:
        """Copy of the tree with the move applied."""
        result = tree.copy()
        self.apply(result)
        return result

def available_move_probs(tree: DecisionTree, move_probs: Dict[str, float]) -> Dict[MoveKind, float]:
    """Move probabilities renormalised over the moves the tree admits; a stump can only grow."""
    if tree.is_stump:
        return {MoveKind.GROW: 1.0}
    total = sum(move_probs.values())
    return {MoveKind(kind): prob / total for kind, prob in move_probs.items()}

def _rule_log_prob(covariates: np.ndarray, rows: np.ndarray, covariate: int) -> float:
    """log of 1 / (splittable covariates * candidates for the chosen covariate)."""
    p_adj = splittable_covariates(covariates, rows).size
    n_adj = candidate_count(covariates, rows, covariate)
    return -np.log(p_adj) - np.log(n_adj)

def _node_log_prior_gain(depth: int, alpha: float, beta: float) -> float:
    """Change in the depth prior when a leaf at depth becomes a parent of two leaves."""
    p_here = tree_split_probability(depth, alpha, beta)
    p_child = tree_split_probability(depth + 1, alpha, beta)
    return np.log(p_here) - np.log1p(-p_here) + 2.0 * np.log1p(-p_child)

def _split_rows(covariates: np.ndarray, rows: np.ndarray, rule: SplitRule) -> Tuple[np.ndarray, np.ndarray]:
    go_left = rule.goes_left(covariates[rows, rule.covariate])
    return rows[go_left], rows[~go_left]

def _draw_rule(
    covariates: np.ndarray,
    rows: np.ndarray,
    is_categorical: np.ndarray,
    target: Optional[np.ndarray],
    rng: np.random.Generator,
) -> Optional[Tuple[SplitRule, int, int]]:
    usable = splittable_covariates(covariates, rows)
    if usable.size == 0:
        return None
    covariate = int(usable[rng.integers(usable.size)])
    candidates = split_candidates(covariates, rows, covariate, bool(is_categorical[covariate]), target)
    if not candidates:
        return None
    rule = candidates[rng.integers(len(candidates))]
    return rule, usable.size, len(candidates)

def propose_move(
    tree: DecisionTree,
    covariates: np.ndarray,
    is_categorical: np.ndarray,
    rng: np.random.Generator,
    target: Optional[np.ndarray] = None,
    move_probs: Optional[Dict[str, float]] = None,
    alpha: float = 0.95,
    beta: float = 2.0,
) -> TreeProposal:
    """
    Propose a grow, prune or change move.

    Args:
        tree (DecisionTree): Current tree
        covariates (np.ndarray): Training design, n x p
        is_categorical (np.ndarray): Per-covariate categorical flags
        rng (np.random.Generator): Random generator
        target (Optional[np.ndarray]): Adjusted partial residuals, used to order categorical levels
        move_probs (Optional[Dict[str, float]]): grow/prune/change probabilities
        alpha (float): Depth prior base
        beta (float): Depth prior power

    Returns:
        TreeProposal: Proposal with log q-ratio and log prior ratio; auto_reject is set
            when the move cannot produce a valid tree
    """
    probs = available_move_probs(tree, move_probs or DEFAULT_MOVE_PROBS)
    kinds = list(probs)
    kind = kinds[rng.choice(len(kinds), p=[probs[k] for k in kinds])]

    if kind == MoveKind.GROW:
        return _propose_grow(tree, covariates, is_categorical, rng, target, probs, move_probs or DEFAULT_MOVE_PROBS, alpha, beta)
    if kind == MoveKind.PRUNE:
        return _propose_prune(tree, covariates, probs, move_probs or DEFAULT_MOVE_PROBS, alpha, beta, rng)
    return _propose_change(tree, covariates, is_categorical, rng, target)

def _propose_grow(tree, covariates, is_categorical, rng, target, probs, move_probs, alpha, beta) -> TreeProposal:
    leaves = tree.leaves()
    node_id = leaves[rng.integers(len(leaves))]
    rows = tree.nodes[node_id].rows
    drawn = _draw_rule(covariates, rows, is_categorical, target, rng)
    if drawn is None:
        return TreeProposal(kind=MoveKind.GROW, node_id=node_id, auto_reject=True)
    rule, p_adj, n_adj = drawn
    left_rows, right_rows = _split_rows(covariates, rows, rule)
    if left_rows.size == 0 or right_rows.size == 0:
        return TreeProposal(kind=MoveKind.GROW, node_id=node_id, auto_reject=True)

    nog_after = len(tree.nog_nodes()) + 1
    up = parent(node_id)
    if up is not None:
        sibling = children(up)[0] if children(up)[1] == node_id else children(up)[1]
        if tree.nodes[sibling].is_leaf:
            nog_after -= 1
    log_prob_prune_after = np.log(move_probs["prune"] / sum(move_probs.values()))
    log_q_ratio = (
        log_prob_prune_after - np.log(nog_after)
        - (np.log(probs[MoveKind.GROW]) - np.log(len(leaves)) - np.log(p_adj) - np.log(n_adj))
    )
    depth = node_depth(node_id)
    log_prior_ratio = _node_log_prior_gain(depth, alpha, beta) - np.log(p_adj) - np.log(n_adj)
    return TreeProposal(
        kind=MoveKind.GROW,
        node_id=node_id,
        rule=rule,
        child_rows=(left_rows, right_rows),
        log_q_ratio=float(log_q_ratio),
        log_prior_ratio=float(log_prior_ratio),
        rows_before=[rows],
        rows_after=[left_rows, right_rows],
    )

def _propose_prune(tree, covariates, probs, move_probs, alpha, beta, rng) -> TreeProposal:
    nog = tree.nog_nodes()
    node_id = nog[rng.integers(len(nog))]
    node = tree.nodes[node_id]
    left, right = children(node_id)
    leaves_after = tree.n_leaves - 1
    log_prob_grow_after = 0.0 if node_id == 0 else np.log(move_probs["grow"] / sum(move_probs.values()))
    log_rule = _rule_log_prob(covariates, node.rows, node.rule.covariate)
    log_q_ratio = (
        log_prob_grow_after - np.log(leaves_after) + log_rule
        - (np.log(probs[MoveKind.PRUNE]) - np.log(len(nog)))
    )
    log_prior_ratio = -(_node_log_prior_gain(node_depth(node_id), alpha, beta) + log_rule)
    return TreeProposal(
        kind=MoveKind.PRUNE,
        node_id=node_id,
        log_q_ratio=float(log_q_ratio),
        log_prior_ratio=float(log_prior_ratio),
        rows_before=[tree.nodes[left].rows, tree.nodes[right].rows],
        rows_after=[node.rows],
    )

def _propose_change(tree, covariates, is_categorical, rng, target) -> TreeProposal:
    nog = tree.nog_nodes()
    node_id = nog[rng.integers(len(nog))]
    node = tree.nodes[node_id]
    drawn = _draw_rule(covariates, node.rows, is_categorical, target, rng)
    if drawn is None:
        return TreeProposal(kind=MoveKind.CHANGE, node_id=node_id, auto_reject=True)
    rule, _, n_adj_new = drawn
    left_rows, right_rows = _split_rows(covariates, node.rows, rule)
    if left_rows.size == 0 or right_rows.size == 0:
        return TreeProposal(kind=MoveKind.CHANGE, node_id=node_id, auto_reject=True)
    n_adj_old = candidate_count(covariates, node.rows, node.rule.covariate)
    left, right = children(node_id)
    log_ratio = np.log(n_adj_new) - np.log(n_adj_old)
    return TreeProposal(
        kind=MoveKind.CHANGE,
        node_id=node_id,
        rule=rule,
        child_rows=(left_rows, right_rows),
        log_q_ratio=float(log_ratio),
        log_prior_ratio=float(-log_ratio),
        rows_before=[tree.nodes[left].rows, tree.nodes[right].rows],
        rows_after=[left_rows, right_rows],
    )

def tree_log_prior(tree: DecisionTree, covariates: np.ndarray, alpha: float, beta: float) -> float:
    """
    Log prior of a tree: depth-dependent split probabilities plus a uniform
    choice of covariate and cut at every internal node.
    """
    total = 0.0
    for node_id, node in tree.nodes.items():
        p_split = tree_split_probability(node_depth(node_id), alpha, beta)
        if node.is_leaf:
            total += np.log1p(-p_split)
        else:
            total += np.log(p_split) + _rule_log_prob(covariates, node.rows, node.rule.covariate)
    return float(total)

def mh_accept(
    log_marginal_diff: float,
    log_prior_ratio: float,
    log_q_ratio: float,
    rng: np.random.Generator,
    auto_reject: bool = False,
) -> bool:
    """Accept with probability min(1, exp(sum of the three log terms))."""
    if auto_reject:
        return False
    log_alpha = log_marginal_diff + log_prior_ratio + log_q_ratio
    return bool(rng.random() < np.exp(min(0.0, log_alpha)))
