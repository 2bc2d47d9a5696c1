"""Contraction bounds over walk trees and certified marginal intervals.

The central object is a worst-case ratio bound delta in [1, +inf] propagated
from unknown tree leaves to the root: each edge convolution contracts the
incoming bound according to the edge's potential strength, and sibling
branches multiply.  A finished root bound converts into a per-state
confidence interval around the BP belief that is guaranteed to contain the
true marginal.

Conventions used throughout:

* Unknown material contributes delta = infinity.  A truncated frontier node
  or an externally forced node is unknown *below* its tree edge, so its edge
  still earns one contraction.  A cycle-closing leaf makes the node it hangs
  from fully unknown (the recycled information re-enters beside it), so no
  contraction is credited for the closing edge itself.
* Root bounds accumulate on the squared-ratio scale; the interval formula
  takes a plain ratio bound and squares it internally.  ``marginal_intervals``
  glues the two together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import Model
from .trees import (
    CYCLE_INDUCED,
    DEFAULT_NODE_BUDGET,
    TRUNCATED,
    UnrolledTree,
    build_bethe_tree,
    build_saw_tree,
)

__all__ = [
    "DeltaBound",
    "contract",
    "tree_delta_recursion",
    "saw_accuracy_bound",
    "bethe_convergence_bound",
    "interval_from_bound",
    "IntervalRow",
    "IntervalReport",
    "marginal_intervals",
]

# beyond this log value a bound behaves as infinite in every formula
_LOG_HUGE = 350.0


@dataclass(frozen=True)
class DeltaBound:
    """A ratio bound in [1, +inf], stored as its natural log.

    Infinity is an explicit sentinel (log_value == math.inf); it absorbs
    multiplication, and contracting it yields a finite result.
    """

    log_value: float

    @classmethod
    def one(cls) -> "DeltaBound":
        return cls(0.0)

    @classmethod
    def infinite(cls) -> "DeltaBound":
        return cls(math.inf)

    @classmethod
    def from_value(cls, value: float) -> "DeltaBound":
        if value < 1.0:
            raise ValueError(f"ratio bound must be >= 1, got {value}")
        return cls(math.log(value)) if math.isfinite(value) else cls(math.inf)

    @property
    def value(self) -> float:
        if self.log_value >= _LOG_HUGE:
            return math.inf
        return math.exp(self.log_value)

    @property
    def is_infinite(self) -> bool:
        return not math.isfinite(self.log_value)

    def sqrt(self) -> "DeltaBound":
        return DeltaBound(self.log_value / 2.0)

    def __mul__(self, other: "DeltaBound") -> "DeltaBound":
        return DeltaBound(self.log_value + other.log_value)

    def __float__(self) -> float:
        return self.value


def _as_log(d_e) -> float:
    if isinstance(d_e, DeltaBound):
        return d_e.log_value
    x = float(d_e)
    if math.isinf(x):
        return math.inf
    if x < 1.0:
        raise ValueError(f"ratio bound must be >= 1, got {x}")
    return math.log(x)


def contract(d_psi: float, d_e) -> DeltaBound:
    """One convolution step: an incoming bound d_e passes an edge of strength d_psi.

    Returns (d_psi^2 * d_e + 1) / (d_psi^2 + d_e), which is at most
    min(d_psi^2, d_e) and monotone nondecreasing in both arguments; an
    infinite d_e comes out as exactly d_psi^2.
    """
    d_psi = float(d_psi)
    if not d_psi >= 1.0 - 1e-12:
        raise ValueError(f"potential strength must be >= 1, got {d_psi}")
    log_L = 2.0 * math.log(max(d_psi, 1.0))
    log_e = _as_log(d_e)
    if log_L == 0.0 or log_e == 0.0:
        # either argument at its identity leaves no error to pass or to shrink
        return DeltaBound(0.0)
    if log_e >= _LOG_HUGE:
        return DeltaBound(log_L)
    if log_L >= _LOG_HUGE:
        return DeltaBound(log_e)
    L = math.exp(log_L)
    x = math.exp(log_e)
    return DeltaBound(math.log((L * x + 1.0) / (L + x)))


def tree_delta_recursion(tree: UnrolledTree, s_nodes) -> DeltaBound:
    """Propagate worst-case ratio bounds from a set of unknown tree nodes to the root.

    Post-order over the tree: a node in ``s_nodes`` is fully unknown
    (infinity; its subtree never matters), any other leaf contributes no
    error, and an internal node multiplies its children's bounds after each
    one contracts through its own edge.  Unknown cycle-closing leaves are the
    exception: they poison their parent directly, without a contraction for
    the closing edge.
    """
    s_nodes = set(s_nodes)
    n = tree.node_count
    logs = [0.0] * n
    for i in range(n - 1, -1, -1):
        if i in s_nodes and tree.kinds[i] != CYCLE_INDUCED:
            logs[i] = math.inf
            continue
        kids = tree.children[i]
        if not kids:
            logs[i] = math.inf if i in s_nodes else 0.0
            continue
        total = 0.0
        for c in kids:
            if c in s_nodes and tree.kinds[c] == CYCLE_INDUCED:
                total = math.inf
                break
            total += contract(tree.parent_strengths[c], DeltaBound(logs[c])).log_value
        logs[i] = total
    return DeltaBound(logs[0])


def saw_accuracy_bound(model: Model, v: int, budget: int = DEFAULT_NODE_BUDGET,
                       unknown_nodes=()) -> DeltaBound:
    """Bound on the gap between the true marginal at v and its converged BP belief.

    Builds the self-avoiding walk tree at v and treats as unknown every
    cycle-closing leaf, every budget-truncated frontier node, and every tree
    copy of a vertex in ``unknown_nodes`` (external forces).  Exhausting the
    budget only loosens the bound, never invalidates it.
    """
    tree = build_saw_tree(model, v, budget)
    unknown = set(unknown_nodes)
    s_nodes = {
        i
        for i, kind in enumerate(tree.kinds)
        if kind in (CYCLE_INDUCED, TRUNCATED) or tree.gammas[i] in unknown
    }
    return tree_delta_recursion(tree, s_nodes)


def bethe_convergence_bound(model: Model, v: int, n: int,
                            node_budget: int = DEFAULT_NODE_BUDGET) -> DeltaBound:
    """Bound on the spread of BP beliefs at v across arbitrary initializations.

    Unrolls n levels of message passing (walks of n vertices, n - 1 edges)
    and treats the cut frontier as unknown; walks that die out inside the
    horizon carry no uncertainty.  The builder's budget guard applies, since
    these trees grow exponentially with n.
    """
    if n < 1:
        raise ValueError("iteration count must be >= 1")
    tree = build_bethe_tree(model, v, n - 1, node_budget)
    s_nodes = set(tree.nodes_of_kind(TRUNCATED))
    return tree_delta_recursion(tree, s_nodes)


def interval_from_bound(belief_j: float, delta) -> tuple:
    """Convert a ratio bound into a confidence interval around one belief value.

    With D = delta**2, returns
        lower = m / (D + (1 - D) m),   upper = D m / (1 + (D - 1) m),
    clamped to [0, 1].  Both endpoints are attained by a two-state witness
    whose ratio distance from m is exactly delta, so the interval is tight.
    An infinite delta yields the vacuous interval (0, 1).
    """
    log_d = _as_log(delta)
    m = min(max(float(belief_j), 0.0), 1.0)
    if 2.0 * log_d >= _LOG_HUGE:
        return (0.0, 1.0)
    D = math.exp(2.0 * log_d)
    lower = m / (D + (1.0 - D) * m)
    upper = D * m / (1.0 + (D - 1.0) * m)
    lower = min(max(lower, 0.0), m)
    upper = max(min(upper, 1.0), m)
    return (lower, upper)


@dataclass(frozen=True)
class IntervalRow:
    node: int
    state: int
    belief: float
    lower: float
    upper: float
    delta: float
    exact: float | None = None


@dataclass(frozen=True)
class IntervalReport:
    """Per-node, per-state certified intervals around BP beliefs.

    ``converged`` is carried over from the BP run: the intervals are valid
    around whatever belief the run produced, but with a non-converged run the
    belief itself is iteration-dependent, so the report flags it.
    """

    rows: tuple
    converged: bool

    CSV_HEADER = "node,state,belief,lower,upper,delta,exact"

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        for r in self.rows:
            exact = "" if r.exact is None else repr(r.exact)
            lines.append(
                f"{r.node},{r.state},{r.belief!r},{r.lower!r},{r.upper!r},"
                f"{r.delta!r},{exact}"
            )
        return "\n".join(lines) + "\n"

    def max_width(self) -> float:
        return max((r.upper - r.lower for r in self.rows), default=0.0)

    def containment_ok(self, slack: float = 1e-9):
        """True/False if exact values are attached, else None."""
        checked = [r for r in self.rows if r.exact is not None]
        if not checked:
            return None
        return all(r.lower - slack <= r.exact <= r.upper + slack for r in checked)


def marginal_intervals(model: Model, bp_report, budget: int = DEFAULT_NODE_BUDGET,
                       unknown_nodes=(), exact=None, roots=None) -> IntervalReport:
    """Certified interval around every requested belief of a finished BP run.

    For each root the walk-tree bound is computed once and applied to all of
    the node's states.  ``exact`` may carry reference marginals (one vector
    per node) to embed in the report.  Roots default to every node.
    """
    if roots is None:
        targets = range(model.node_count)
    else:
        targets = sorted({int(v) for v in roots})
        for v in targets:
            if not 0 <= v < model.node_count:
                raise ValueError(f"root {v} out of range")
    rows = []
    for v in targets:
        delta = saw_accuracy_bound(model, v, budget, unknown_nodes)
        # the recursion's bound lives on the squared-ratio scale
        ratio = delta.sqrt()
        for j, b in enumerate(bp_report.beliefs[v]):
            lower, upper = interval_from_bound(b, ratio)
            truth = None if exact is None else float(exact[v][j])
            rows.append(
                IntervalRow(
                    node=v,
                    state=j,
                    belief=float(b),
                    lower=lower,
                    upper=upper,
                    delta=delta.value,
                    exact=truth,
                )
            )
    return IntervalReport(rows=tuple(rows), converged=bp_report.converged)
