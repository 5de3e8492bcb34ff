"""
Integrated likelihood and conjugate leaf updates.

Within a leaf the adjusted residuals r - u are modelled as N(mu, v) with
mu ~ N(0, leaf_sd^2); mu integrates out in closed form.
"""

import numpy as np

from src.trees.tree import DecisionTree

LOG_2PI = np.log(2.0 * np.pi)

def leaf_log_marginal(n: int, w: float, s: float, v: float, leaf_sd: float) -> float:
    """
    Log marginal likelihood of one leaf.

    Args:
        n (int): Rows in the leaf
        w (float): Sum of adjusted residuals
        s (float): Sum of squared adjusted residuals
        v (float): Conditional error variance
        leaf_sd (float): Leaf prior standard deviation
    """
    s2 = leaf_sd * leaf_sd
    denom = v + n * s2
    return (
        -0.5 * n * (LOG_2PI + np.log(v))
        + 0.5 * np.log(v / denom)
        - s / (2.0 * v)
        + s2 * w * w / (2.0 * v * denom)
    )

def rows_log_marginal(target: np.ndarray, rows: np.ndarray, v: float, leaf_sd: float) -> float:
    values = target[rows]
    return leaf_log_marginal(values.size, float(values.sum()), float(values @ values), v, leaf_sd)

def tree_log_marginal_likelihood(
    residuals: np.ndarray,
    offsets: np.ndarray,
    v: float,
    tree: DecisionTree,
    leaf_sd: float,
) -> float:
    """Sum of leaf log marginals of (residuals - offsets) over the tree's partition."""
    target = np.asarray(residuals, dtype=float) - np.asarray(offsets, dtype=float)
    return float(sum(rows_log_marginal(target, tree.nodes[leaf].rows, v, leaf_sd) for leaf in tree.leaves()))

def leaf_posterior(n: int, w: float, v: float, leaf_sd: float):
    """(mean, variance) of a leaf parameter given n rows with adjusted-residual sum w."""
    s2 = leaf_sd * leaf_sd
    denom = v + n * s2
    return s2 * w / denom, v * s2 / denom

def draw_leaf_parameters(
    tree: DecisionTree,
    residuals: np.ndarray,
    offsets: np.ndarray,
    v: float,
    leaf_sd: float,
    rng: np.random.Generator,
) -> DecisionTree:
    """Redraw every leaf value from its conjugate normal posterior, in place."""
    target = np.asarray(residuals, dtype=float) - np.asarray(offsets, dtype=float)
    leaves = tree.leaves()
    z = rng.standard_normal(len(leaves))
    for k, leaf in enumerate(leaves):
        node = tree.nodes[leaf]
        mean, var = leaf_posterior(node.rows.size, float(target[node.rows].sum()), v, leaf_sd)
        node.value = mean + np.sqrt(var) * z[k]
    return tree
