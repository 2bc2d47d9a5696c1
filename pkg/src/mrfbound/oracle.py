"""Ground-truth marginals: exhaustive enumeration and the walk-tree construction.

Two completely independent routes to the same quantity.  Exhaustive
enumeration multiplies every edge table over the full assignment grid; the
walk-tree route (binary models only) conditions the self-avoiding walk tree's
cycle-closing leaves on a fixed boundary configuration and runs exact
sum-product on the resulting tree.  Their agreement is the strongest internal
consistency check in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Model, ModelError
from .trees import CYCLE_INDUCED, DEFAULT_NODE_BUDGET, TRUNCATED, build_saw_tree

__all__ = [
    "ExactMarginals",
    "StateSpaceError",
    "exact_marginals_bruteforce",
    "weitz_exact_binary",
]

DEFAULT_STATE_CAP = 2**24


class StateSpaceError(ModelError):
    """The assignment grid is too large for exhaustive enumeration."""


@dataclass(frozen=True)
class ExactMarginals:
    """Exact per-node marginals plus the unnormalized total weight."""

    marginals: tuple
    partition_value: float


def exact_marginals_bruteforce(model: Model, max_states: int = DEFAULT_STATE_CAP) -> ExactMarginals:
    """Exact marginals by summing the joint weight over the full assignment grid."""
    cards = model.cardinalities
    total_states = math.prod(cards)
    if total_states > max_states:
        raise StateSpaceError(
            f"state space has {total_states} assignments, above the cap of "
            f"{max_states}; pass max_states >= {total_states} to force it"
        )
    n = model.node_count
    joint = np.ones(cards)
    for (u, v), table in zip(model.edges, model.potentials):
        t = table
        if u > v:
            u, v, t = v, u, t.T
        shape = [1] * n
        shape[u] = cards[u]
        shape[v] = cards[v]
        joint = joint * t.reshape(shape)
    for node, w in model.isolated_unaries.items():
        shape = [1] * n
        shape[node] = cards[node]
        joint = joint * w.reshape(shape)
    z = float(joint.sum())
    marginals = []
    for v in range(n):
        axes = tuple(a for a in range(n) if a != v)
        marginals.append(joint.sum(axis=axes) / z)
    return ExactMarginals(marginals=tuple(marginals), partition_value=z)


def _boundary_state(tree, leaf: int) -> int:
    """Boundary value for a cycle-closing leaf, from the edge order at the revisit.

    The leaf copies a vertex s seen earlier on its root path.  Compare the
    neighbor through which the walk closed back into s against the neighbor
    through which it originally departed s (neighbors ordered by original
    vertex index): closing from below fixes state 0, from above state 1.
    """
    s = tree.gammas[leaf]
    closing = tree.gammas[tree.parents[leaf]]
    node = tree.parents[leaf]
    child = leaf
    while tree.gammas[node] != s:
        child = node
        node = tree.parents[node]
    departing = tree.gammas[child]
    return 0 if closing < departing else 1


def weitz_exact_binary(model: Model, v: int,
                       budget: int = DEFAULT_NODE_BUDGET) -> np.ndarray:
    """Exact marginal of a binary model at v via its conditioned walk tree.

    Every cycle-closing leaf of the complete self-avoiding walk tree is
    clamped to the boundary state picked by ``_boundary_state``; exact upward
    sum-product on the clamped tree then returns the true marginal at the
    root.  Binary domains only, and the tree must fit in the budget --
    exactness cannot survive truncation.
    """
    if any(k != 2 for k in model.cardinalities):
        raise ModelError("the walk-tree marginalization requires binary variables")
    tree = build_saw_tree(model, v, budget)
    if TRUNCATED in tree.kinds:
        raise StateSpaceError(
            f"walk tree at root {v} does not fit in the node budget of {budget}"
        )
    n = tree.node_count
    messages = [None] * n
    for i in range(n - 1, 0, -1):
        table = model.potential(tree.gammas[tree.parents[i]], tree.gammas[i])
        if tree.kinds[i] == CYCLE_INDUCED:
            vec = table[:, _boundary_state(tree, i)].copy()
        else:
            inner = np.ones(model.cardinality(tree.gammas[i]))
            for c in tree.children[i]:
                inner = inner * messages[c]
            vec = table @ inner
        messages[i] = vec / vec.sum()
    if tree.children[0]:
        bel = np.ones(2)
        for c in tree.children[0]:
            bel = bel * messages[c]
    else:
        w = model.isolated_unaries.get(v)
        bel = np.ones(2) if w is None else np.array(w, dtype=float)
    return bel / bel.sum()
