"""Discrete pairwise Markov random fields: graphs, potentials, strength, file I/O.

A model is an undirected simple graph whose nodes carry finite domains and
whose edges carry strictly positive potential tables.  The joint weight of an
assignment is the product of the edge tables (plus the unary weight of any
isolated node).  Models are immutable after construction; every operation in
this module is a pure function.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "Model",
    "ModelError",
    "FormatError",
    "potential_strength",
    "unnormalized_joint",
    "restrict_evidence",
    "load_model",
    "save_model",
    "validate_model",
]


class ModelError(ValueError):
    """Invalid model, assignment, or domain."""


class FormatError(ModelError):
    """Malformed model file; ``line`` holds the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _fmt(x: float) -> str:
    # repr gives the shortest decimal that round-trips, keeping files canonical
    return repr(float(x))


class Model:
    """Pairwise MRF over nodes ``0..n-1``.

    Edge tables are kept in the orientation given at construction; reading an
    edge the other way round transposes on the fly.  Unary weights are only
    stored for isolated nodes (anything attached to an edge gets folded into
    an incident table by the loader).
    """

    def __init__(self, cardinalities, edges, potentials, isolated_unaries=None):
        self.cardinalities = tuple(int(k) for k in cardinalities)
        self.edges = tuple((int(u), int(v)) for u, v in edges)
        tables = []
        for table in potentials:
            t = np.array(table, dtype=float)
            t.flags.writeable = False
            tables.append(t)
        self.potentials = tuple(tables)
        unaries = {}
        for node, w in (isolated_unaries or {}).items():
            vec = np.array(w, dtype=float)
            vec.flags.writeable = False
            unaries[int(node)] = vec
        self.isolated_unaries = unaries

        n = len(self.cardinalities)
        nbrs = [set() for _ in range(n)]
        index = {}
        for i, (u, v) in enumerate(self.edges):
            if 0 <= u < n and 0 <= v < n and u != v:
                nbrs[u].add(v)
                nbrs[v].add(u)
            index.setdefault((u, v), i)
            index.setdefault((v, u), i)
        self.adjacency = tuple(tuple(sorted(s)) for s in nbrs)
        self._edge_index = index
        self._strengths = None

    @property
    def node_count(self) -> int:
        return len(self.cardinalities)

    def cardinality(self, v: int) -> int:
        return self.cardinalities[v]

    def neighbors(self, v: int) -> tuple:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self._edge_index

    def directed_edges(self) -> list:
        """Both orientations of every edge, in edge-list order."""
        out = []
        for u, v in self.edges:
            out.append((u, v))
            out.append((v, u))
        return out

    def potential(self, u: int, v: int) -> np.ndarray:
        """Table for edge (u, v) oriented with u on rows, v on columns."""
        try:
            i = self._edge_index[(u, v)]
        except KeyError:
            raise ModelError(f"({u}, {v}) is not an edge") from None
        table = self.potentials[i]
        return table if self.edges[i] == (u, v) else table.T

    def edge_strength(self, u: int, v: int) -> float:
        """Potential strength of the edge (u, v); cached, orientation-free."""
        if self._strengths is None:
            self._strengths = tuple(potential_strength(t) for t in self.potentials)
        try:
            return self._strengths[self._edge_index[(u, v)]]
        except KeyError:
            raise ModelError(f"({u}, {v}) is not an edge") from None

    def __eq__(self, other):
        if not isinstance(other, Model):
            return NotImplemented
        return (
            self.cardinalities == other.cardinalities
            and self.edges == other.edges
            and all(np.array_equal(a, b) for a, b in zip(self.potentials, other.potentials))
            and self.isolated_unaries.keys() == other.isolated_unaries.keys()
            and all(
                np.array_equal(self.isolated_unaries[k], other.isolated_unaries[k])
                for k in self.isolated_unaries
            )
        )

    def __repr__(self):
        return f"Model(nodes={self.node_count}, edges={len(self.edges)})"


def potential_strength(table) -> float:
    """Strength of a positive table: fourth root of the extremal cross-ratio.

    Equals 1 exactly when the table is an outer product of two positive
    vectors, and is invariant to multiplying the table by any positive
    function of either argument alone.  Computed in log space so extreme
    entries cannot overflow.
    """
    t = np.asarray(table, dtype=float)
    if t.ndim != 2 or t.size == 0:
        raise ModelError("potential table must be a non-empty 2-D array")
    if not np.all(np.isfinite(t)) or np.any(t <= 0.0):
        raise ModelError("potential entries must be finite and strictly positive")
    logs = np.log(t)
    # best[b, d] = max_a (log t[a, b] - log t[a, d])
    best = (logs[:, :, None] - logs[:, None, :]).max(axis=0)
    return float(math.exp((best + best.T).max() / 4.0))


def _check_assignment(model: Model, assignment: Sequence[int]) -> tuple:
    x = tuple(int(v) for v in assignment)
    if len(x) != model.node_count:
        raise ModelError(
            f"assignment has {len(x)} values for {model.node_count} nodes"
        )
    for v, (xi, k) in enumerate(zip(x, model.cardinalities)):
        if not 0 <= xi < k:
            raise ModelError(f"state {xi} out of range for node {v} (cardinality {k})")
    return x


def unnormalized_joint(model: Model, assignment: Sequence[int]) -> float:
    """Product of edge-table entries (and isolated-node weights) at ``assignment``."""
    x = _check_assignment(model, assignment)
    weight = 1.0
    for (u, v), table in zip(model.edges, model.potentials):
        weight *= table[x[u], x[v]]
    for node, w in model.isolated_unaries.items():
        weight *= w[x[node]]
    return float(weight)


def restrict_evidence(model: Model, evidence: Mapping[int, int]) -> Model:
    """Clamp observed nodes by slicing their domains down to the observed state.

    Observed nodes end up with cardinality 1; untouched edges keep their
    strength, and edges into observed nodes become rank-1 (strength 1), so
    every bound stays finite.
    """
    obs = {}
    for node, state in evidence.items():
        node, state = int(node), int(state)
        if not 0 <= node < model.node_count:
            raise ModelError(f"evidence node {node} out of range")
        if not 0 <= state < model.cardinality(node):
            raise ModelError(f"evidence state {state} out of range for node {node}")
        obs[node] = state
    if not obs:
        return model

    cards = [1 if v in obs else k for v, k in enumerate(model.cardinalities)]
    tables = []
    for (u, v), table in zip(model.edges, model.potentials):
        t = table
        if u in obs:
            t = t[[obs[u]], :]
        if v in obs:
            t = t[:, [obs[v]]]
        tables.append(t)
    unaries = {
        node: (w[[obs[node]]] if node in obs else w)
        for node, w in model.isolated_unaries.items()
    }
    return Model(cards, model.edges, tables, unaries)


def validate_model(model: Model) -> list:
    """Check every model invariant; return all violations (empty list = ok)."""
    problems = []
    n = model.node_count
    if n < 1:
        problems.append("model must have at least one node")
    for v, k in enumerate(model.cardinalities):
        if k < 1:
            problems.append(f"node {v} has cardinality {k} (must be >= 1)")
    seen = set()
    for i, (u, v) in enumerate(model.edges):
        if not (0 <= u < n and 0 <= v < n):
            problems.append(f"edge {i} ({u}, {v}) has an endpoint out of range")
            continue
        if u == v:
            problems.append(f"edge {i} ({u}, {v}) is a self-loop")
            continue
        key = frozenset((u, v))
        if key in seen:
            problems.append(f"edge {i} ({u}, {v}) duplicates an earlier edge")
        seen.add(key)
        table = model.potentials[i]
        want = (model.cardinality(u), model.cardinality(v))
        if table.shape != want:
            problems.append(
                f"edge {i} ({u}, {v}) table has shape {table.shape}, expected {want}"
            )
        elif not np.all(np.isfinite(table)) or np.any(table <= 0.0):
            problems.append(f"edge {i} ({u}, {v}) has a nonpositive or non-finite entry")
    for node, w in model.isolated_unaries.items():
        if not 0 <= node < n:
            problems.append(f"unary weight on node {node} out of range")
            continue
        if model.degree(node) != 0:
            problems.append(f"unary weight kept on non-isolated node {node}")
        if w.shape != (model.cardinality(node),):
            problems.append(
                f"unary weight on node {node} has length {w.size}, "
                f"expected {model.cardinality(node)}"
            )
        elif not np.all(np.isfinite(w)) or np.any(w <= 0.0):
            problems.append(f"unary weight on node {node} has a nonpositive entry")
    return problems


# ---------------------------------------------------------------------------
# File format
#
#   MRF v1
#   vars <n>
#   card <k_1> ... <k_n>
#   unary <node> <k_node floats>       (zero or more)
#   edges <m>
#   edge <u> <v>                       (0-indexed; canonical form has u < v)
#   <k_u rows of k_v floats>
#
# '#' starts a comment; blank lines are ignored.  At load time each unary is
# folded multiplicatively into the lowest-indexed incident edge; unaries on
# isolated nodes are kept as implicit beliefs.
# ---------------------------------------------------------------------------


def _content_lines(text: str) -> list:
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((lineno, line.split()))
    return out


class _Cursor:
    def __init__(self, lines):
        self.lines = lines
        self.pos = 0

    def peek(self):
        return self.lines[self.pos] if self.pos < len(self.lines) else None

    def take(self, expected: str):
        if self.pos >= len(self.lines):
            last = self.lines[-1][0] if self.lines else 1
            raise FormatError(f"unexpected end of file, expected {expected}", last)
        lineno, tokens = self.lines[self.pos]
        self.pos += 1
        return lineno, tokens


def _parse_int(token, what, lineno):
    try:
        return int(token)
    except ValueError:
        raise FormatError(f"{what} is not an integer: {token!r}", lineno) from None


def _parse_floats(tokens, what, lineno):
    try:
        values = [float(t) for t in tokens]
    except ValueError:
        raise FormatError(f"{what} contains a malformed number", lineno) from None
    return values


def load_model(source) -> Model:
    """Parse a model file (text or open stream); raises FormatError on bad input."""
    text = source.read() if hasattr(source, "read") else str(source)
    cur = _Cursor(_content_lines(text))

    lineno, tokens = cur.take("'MRF v1' header")
    if tokens != ["MRF", "v1"]:
        raise FormatError("expected header 'MRF v1'", lineno)

    lineno, tokens = cur.take("'vars <n>'")
    if len(tokens) != 2 or tokens[0] != "vars":
        raise FormatError("expected 'vars <n>'", lineno)
    n = _parse_int(tokens[1], "variable count", lineno)
    if n < 1:
        raise FormatError("variable count must be positive", lineno)

    lineno, tokens = cur.take("'card <k_1> ... <k_n>'")
    if len(tokens) != n + 1 or tokens[0] != "card":
        raise FormatError(f"expected 'card' with {n} cardinalities", lineno)
    cards = [_parse_int(t, "cardinality", lineno) for t in tokens[1:]]
    for v, k in enumerate(cards):
        if k < 1:
            raise FormatError(f"cardinality of node {v} must be >= 1", lineno)

    unaries = {}
    while (nxt := cur.peek()) is not None and nxt[1][0] == "unary":
        lineno, tokens = cur.take("unary line")
        if len(tokens) < 3:
            raise FormatError("expected 'unary <node> <floats...>'", lineno)
        node = _parse_int(tokens[1], "unary node", lineno)
        if not 0 <= node < n:
            raise FormatError(f"unary node {node} out of range", lineno)
        values = _parse_floats(tokens[2:], "unary weights", lineno)
        if len(values) != cards[node]:
            raise FormatError(
                f"unary for node {node} has {len(values)} values, "
                f"expected {cards[node]}",
                lineno,
            )
        if any(x <= 0.0 for x in values):
            raise FormatError(f"unary for node {node} has a nonpositive entry", lineno)
        vec = np.array(values, dtype=float)
        unaries[node] = unaries[node] * vec if node in unaries else vec

    lineno, tokens = cur.take("'edges <m>'")
    if len(tokens) != 2 or tokens[0] != "edges":
        raise FormatError("expected 'edges <m>'", lineno)
    m = _parse_int(tokens[1], "edge count", lineno)
    if m < 0:
        raise FormatError("edge count must be nonnegative", lineno)

    edges = []
    tables = []
    seen = set()
    for _ in range(m):
        lineno, tokens = cur.take("'edge <u> <v>'")
        if len(tokens) != 3 or tokens[0] != "edge":
            raise FormatError("expected 'edge <u> <v>'", lineno)
        u = _parse_int(tokens[1], "edge endpoint", lineno)
        v = _parse_int(tokens[2], "edge endpoint", lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise FormatError(f"edge ({u}, {v}) endpoint out of range", lineno)
        if u == v:
            raise FormatError(f"edge ({u}, {v}) is a self-loop", lineno)
        key = frozenset((u, v))
        if key in seen:
            raise FormatError(f"duplicate edge ({u}, {v})", lineno)
        seen.add(key)
        rows = []
        for r in range(cards[u]):
            lineno, tokens = cur.take(f"row {r} of edge ({u}, {v}) table")
            values = _parse_floats(tokens, f"edge ({u}, {v}) table row", lineno)
            if len(values) != cards[v]:
                raise FormatError(
                    f"edge ({u}, {v}) row has {len(values)} entries, "
                    f"expected {cards[v]}",
                    lineno,
                )
            if any(x <= 0.0 for x in values):
                raise FormatError(
                    f"edge ({u}, {v}) has a nonpositive potential entry", lineno
                )
            rows.append(values)
        edges.append((u, v))
        tables.append(np.array(rows, dtype=float))

    if (extra := cur.peek()) is not None:
        raise FormatError("trailing content after the last edge table", extra[0])

    # fold unaries into the lowest-indexed incident edge, deterministically
    isolated = {}
    for node in sorted(unaries):
        vec = unaries[node]
        host = next((i for i, (u, v) in enumerate(edges) if node in (u, v)), None)
        if host is None:
            isolated[node] = vec
        elif edges[host][0] == node:
            tables[host] = tables[host] * vec[:, None]
        else:
            tables[host] = tables[host] * vec[None, :]

    return Model(cards, edges, tables, isolated)


def save_model(model: Model) -> str:
    """Serialize to canonical text: edges oriented u < v, shortest float repr."""
    problems = validate_model(model)
    if problems:
        raise ModelError("cannot save invalid model: " + "; ".join(problems))
    out = ["MRF v1", f"vars {model.node_count}"]
    out.append("card " + " ".join(str(k) for k in model.cardinalities))
    for node in sorted(model.isolated_unaries):
        w = model.isolated_unaries[node]
        out.append(f"unary {node} " + " ".join(_fmt(x) for x in w))
    out.append(f"edges {len(model.edges)}")
    for (u, v), table in zip(model.edges, model.potentials):
        if u > v:
            u, v, table = v, u, table.T
        out.append(f"edge {u} {v}")
        for row in table:
            out.append(" ".join(_fmt(x) for x in row))
    return "\n".join(out) + "\n"
