"""Tree unrollings of a loopy graph: non-backtracking and self-avoiding walks.

Both expansions materialize an explicit rooted tree whose nodes map back to
original vertices.  Walk trees are built breadth-first with deterministic
child order (ascending original neighbor index), so identical inputs always
produce identical trees and truncation stays as far from the root as the node
budget allows.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .model import Model

__all__ = [
    "ROOT",
    "INTERNAL",
    "DEAD_END",
    "CYCLE_INDUCED",
    "TRUNCATED",
    "DEFAULT_NODE_BUDGET",
    "BudgetError",
    "UnrolledTree",
    "TreeStats",
    "build_bethe_tree",
    "build_saw_tree",
    "classify_leaves",
    "cycle_involved_nodes",
]

ROOT = "root"
INTERNAL = "internal"
DEAD_END = "dead_end_leaf"
CYCLE_INDUCED = "cycle_induced_leaf"
TRUNCATED = "truncated_leaf"

DEFAULT_NODE_BUDGET = 10**6


class BudgetError(RuntimeError):
    """A tree would exceed its node budget and truncation is not allowed."""


@dataclass
class UnrolledTree:
    """Rooted walk tree; parallel arrays indexed by node id (0 is the root).

    ``gammas[i]`` is the original vertex a tree node maps to, ``parents[i]``
    is -1 for the root, and ``parent_strengths[i]`` caches the potential
    strength of the original edge a node was reached through.  Node ids
    follow breadth-first creation order, so every parent precedes its
    children.  Trees are immutable after construction.
    """

    model: Model
    root_vertex: int
    gammas: list
    parents: list
    depths: list
    kinds: list
    children: list
    parent_strengths: list

    @property
    def node_count(self) -> int:
        return len(self.gammas)

    @property
    def depth(self) -> int:
        return max(self.depths)

    def walk(self, i: int) -> tuple:
        """Original-vertex labels along the path root -> node i."""
        path = []
        while i >= 0:
            path.append(self.gammas[i])
            i = self.parents[i]
        return tuple(reversed(path))

    def leaves(self) -> list:
        return [i for i, ch in enumerate(self.children) if not ch]

    def nodes_of_kind(self, kind: str) -> list:
        return [i for i, k in enumerate(self.kinds) if k == kind]

    def dump(self) -> str:
        """One line per node: ``<id> <parent> <gamma> <kind> <depth>``."""
        lines = [
            f"{i} {self.parents[i]} {self.gammas[i]} {self.kinds[i]} {self.depths[i]}"
            for i in range(self.node_count)
        ]
        return "\n".join(lines) + "\n"


@dataclass
class TreeStats:
    node_count: int
    depth: int
    dead_end_leaves: int
    cycle_induced_leaves: int
    truncated_leaves: int
    cycle_involved: frozenset


class _Builder:
    def __init__(self, model, root):
        if not 0 <= root < model.node_count:
            raise ValueError(f"root vertex {root} out of range")
        self.model = model
        self.root = root
        self.gammas = [root]
        self.parents = [-1]
        self.depths = [0]
        self.kinds = [ROOT]
        self.children = [[]]
        self.strengths = [float("nan")]

    def add(self, parent, gamma, kind):
        i = len(self.gammas)
        self.gammas.append(gamma)
        self.parents.append(parent)
        self.depths.append(self.depths[parent] + 1)
        self.kinds.append(kind)
        self.children.append([])
        self.strengths.append(self.model.edge_strength(self.gammas[parent], gamma))
        self.children[parent].append(i)
        return i

    def continuations(self, i):
        prev = self.gammas[self.parents[i]] if self.parents[i] >= 0 else None
        return [w for w in self.model.neighbors(self.gammas[i]) if w != prev]

    def finish(self):
        return UnrolledTree(
            model=self.model,
            root_vertex=self.root,
            gammas=self.gammas,
            parents=self.parents,
            depths=self.depths,
            kinds=self.kinds,
            children=self.children,
            parent_strengths=self.strengths,
        )


def build_bethe_tree(model: Model, v: int, depth: int,
                     node_budget: int = DEFAULT_NODE_BUDGET) -> UnrolledTree:
    """Tree of all non-backtracking walks from v of up to ``depth`` edges.

    Walks reaching the depth limit with further continuations become
    truncated leaves; walks that die out earlier become dead-end leaves.
    Raises BudgetError instead of truncating sideways, because these trees
    grow exponentially and a partial level would bias the bound.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    b = _Builder(model, v)
    queue = deque([0])
    while queue:
        i = queue.popleft()
        conts = b.continuations(i)
        if not conts:
            if i != 0:
                b.kinds[i] = DEAD_END
            continue
        if b.depths[i] >= depth:
            b.kinds[i] = TRUNCATED
            continue
        if len(b.gammas) + len(conts) > node_budget:
            raise BudgetError(
                f"walk tree exceeds the node budget of {node_budget}; "
                "reduce the depth or raise the budget"
            )
        b.kinds[i] = ROOT if i == 0 else INTERNAL
        for w in conts:
            queue.append(b.add(i, w, INTERNAL))
    return b.finish()


def build_saw_tree(model: Model, v: int,
                   budget: int = DEFAULT_NODE_BUDGET) -> UnrolledTree:
    """Tree of walks from v whose vertices are all distinct except possibly the last.

    A walk closing back on an already-visited vertex ends in a cycle-induced
    leaf; a walk with no non-backtracking continuation ends in a dead-end
    leaf.  If the node budget runs out, the remaining frontier is marked
    truncated (recorded, never raised) -- downstream bounds treat truncated
    nodes as fully unknown, so exhaustion only loosens results.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    b = _Builder(model, v)
    queue = deque([(0, frozenset((v,)))])
    expanding = True
    while queue:
        i, visited = queue.popleft()
        conts = b.continuations(i)
        if not conts:
            if i != 0:
                b.kinds[i] = DEAD_END
            continue
        if expanding and len(b.gammas) + len(conts) > budget:
            expanding = False
        if not expanding:
            b.kinds[i] = TRUNCATED
            continue
        b.kinds[i] = ROOT if i == 0 else INTERNAL
        for w in conts:
            if w in visited:
                b.add(i, w, CYCLE_INDUCED)
            else:
                queue.append((b.add(i, w, INTERNAL), visited | {w}))
    return b.finish()


def classify_leaves(tree: UnrolledTree) -> TreeStats:
    """Count leaves by kind and report which original vertices close cycles."""
    dead = cycle = truncated = 0
    involved = set()
    for i in tree.leaves():
        kind = tree.kinds[i]
        if kind == DEAD_END:
            dead += 1
        elif kind == CYCLE_INDUCED:
            cycle += 1
            involved.add(tree.gammas[i])
        elif kind == TRUNCATED:
            truncated += 1
    return TreeStats(
        node_count=tree.node_count,
        depth=tree.depth,
        dead_end_leaves=dead,
        cycle_induced_leaves=cycle,
        truncated_leaves=truncated,
        cycle_involved=frozenset(involved),
    )


def cycle_involved_nodes(model: Model) -> frozenset:
    """Vertices lying on at least one cycle, i.e. incident to a non-bridge edge.

    Bridges are found with one iterative DFS (lowpoint rule); everything
    touching a surviving edge has a self-avoiding walk back to itself.
    """
    n = model.node_count
    disc = [-1] * n
    low = [0] * n
    bridges = set()
    timer = 0
    for start in range(n):
        if disc[start] >= 0:
            continue
        stack = [(start, -1, iter(model.neighbors(start)))]
        disc[start] = low[start] = timer
        timer += 1
        while stack:
            u, parent, it = stack[-1]
            advanced = False
            for w in it:
                if w == parent:
                    continue  # the single tree edge back; no parallel edges exist
                if disc[w] < 0:
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, u, iter(model.neighbors(w))))
                    advanced = True
                    break
                low[u] = min(low[u], disc[w])
            if not advanced:
                stack.pop()
                if stack:
                    p = stack[-1][0]
                    low[p] = min(low[p], low[u])
                    if low[u] > disc[p]:
                        bridges.add(frozenset((p, u)))
    involved = set()
    for u, v in model.edges:
        if u != v and frozenset((u, v)) not in bridges:
            involved.add(u)
            involved.add(v)
    return frozenset(involved)
