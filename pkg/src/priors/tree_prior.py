"""
Tree depth prior and leaf prior scale.
"""

from typing import FrozenSet

import numpy as np

from src.utility_modules.enums import OutcomeMode
from src.utility_modules.error_handling import InvalidParameter

def tree_split_probability(depth: int, alpha: float, beta: float) -> float:
    """Prior probability that a node at the given depth is internal: alpha (1 + depth)^(-beta)."""
    if depth < 0:
        raise InvalidParameter(f"Depth must be nonnegative, got {depth}")
    return alpha * (1.0 + depth) ** (-beta)

def sample_tree_topology(alpha: float, beta: float, rng: np.random.Generator, max_depth: int = 30) -> FrozenSet[int]:
    """
    Internal node ids of a topology drawn from the depth prior alone.

    Ids follow the heap numbering of the trees (children 2i + 1 and 2i + 2);
    nodes at max_depth are always leaves.
    """
    internal = set()
    pending = [(0, 0)]
    while pending:
        node_id, depth = pending.pop()
        if depth < max_depth and rng.random() < tree_split_probability(depth, alpha, beta):
            internal.add(node_id)
            pending.append((2 * node_id + 1, depth + 1))
            pending.append((2 * node_id + 2, depth + 1))
    return frozenset(internal)

def leaf_prior_sd(mode: OutcomeMode, m: int, kappa: float, q_z: float = 3.0) -> float:
    """
    Leaf parameter prior standard deviation.

    Continuous outcomes live on [-0.5, 0.5], so 1 / (2 kappa sqrt(m)); probit
    latents use q_z / (kappa sqrt(m)).
    """
    if m < 1 or kappa <= 0 or q_z <= 0:
        raise InvalidParameter("leaf_prior_sd needs m >= 1, kappa > 0 and q_z > 0")
    if mode == OutcomeMode.PROBIT:
        return q_z / (kappa * np.sqrt(m))
    return 1.0 / (2.0 * kappa * np.sqrt(m))
