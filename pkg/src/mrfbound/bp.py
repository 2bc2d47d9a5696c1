"""Synchronous loopy belief propagation with dynamic-range diagnostics.

Messages live on directed edges as normalized positive vectors.  One sweep
recomputes every directed edge from the previous sweep's messages (Jacobi
style, no damping); convergence is measured by the log dynamic range of the
per-edge message change, which is the natural metric for BP stability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Model, ModelError

__all__ = [
    "BpReport",
    "dynamic_range",
    "uniform_messages",
    "partial_product",
    "update_message",
    "belief",
    "beliefs",
    "run_bp",
]


def dynamic_range(f, g) -> float:
    """Worst-case multiplicative ratio between two positive vectors, up to scale.

    Returns max over state pairs (a, b) of sqrt((f[a]/g[a]) / (f[b]/g[b])).
    Equals 1 iff f is proportional to g; invariant to rescaling either input.
    """
    fv = np.asarray(f, dtype=float)
    gv = np.asarray(g, dtype=float)
    if fv.shape != gv.shape or fv.ndim != 1:
        raise ModelError(f"shape mismatch: {fv.shape} vs {gv.shape}")
    if np.any(fv <= 0.0) or np.any(gv <= 0.0):
        raise ModelError("dynamic range requires strictly positive vectors")
    ratio = fv / gv
    return float(math.sqrt(ratio.max() / ratio.min()))


def uniform_messages(model: Model) -> dict:
    """One uniform vector per directed edge; the default BP initialization."""
    return {
        (t, s): np.full(model.cardinality(s), 1.0 / model.cardinality(s))
        for (t, s) in model.directed_edges()
    }


def partial_product(model: Model, messages: dict, t: int, s: int) -> np.ndarray:
    """Normalized product of messages into t from all neighbors except s."""
    if not model.has_edge(t, s):
        raise ModelError(f"({t}, {s}) is not an edge")
    prod = np.ones(model.cardinality(t))
    for u in model.neighbors(t):
        if u != s:
            prod = prod * messages[(u, t)]
    return prod / prod.sum()


def update_message(model: Model, messages: dict, t: int, s: int) -> np.ndarray:
    """New message t -> s: convolve the partial product at t with the edge table."""
    if not model.has_edge(t, s):
        raise ModelError(f"({t}, {s}) is not an edge")
    prod = np.ones(model.cardinality(t))
    for u in model.neighbors(t):
        if u != s:
            prod = prod * messages[(u, t)]
    vec = prod @ model.potential(t, s)
    return vec / vec.sum()


def belief(model: Model, messages: dict, t: int) -> np.ndarray:
    """Normalized product of all messages into t (implicit weight for isolated nodes)."""
    if model.degree(t) == 0:
        w = model.isolated_unaries.get(t)
        prod = np.ones(model.cardinality(t)) if w is None else np.array(w)
    else:
        prod = np.ones(model.cardinality(t))
        for u in model.neighbors(t):
            prod = prod * messages[(u, t)]
    return prod / prod.sum()


def beliefs(model: Model, messages: dict) -> tuple:
    return tuple(belief(model, messages, v) for v in range(model.node_count))


@dataclass
class BpReport:
    """Outcome of a BP run; non-convergence is reported, never raised."""

    messages: dict
    beliefs: tuple
    iterations_run: int
    converged: bool
    residual: float


def run_bp(model: Model, max_iters: int = 1000, tolerance: float = 1e-8,
           init: dict | None = None) -> BpReport:
    """Run synchronous BP sweeps until the message change falls below tolerance.

    Each sweep recomputes all directed edges from the previous sweep.  The
    residual is the maximum over directed edges of the log dynamic range of
    the message change; the run stops once it drops to ``tolerance`` or after
    ``max_iters`` sweeps, whichever comes first.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if tolerance <= 0.0:
        raise ValueError("tolerance must be positive")

    directed = model.directed_edges()
    if init is None:
        msgs = uniform_messages(model)
    else:
        msgs = {}
        for (t, s) in directed:
            try:
                vec = np.asarray(init[(t, s)], dtype=float)
            except KeyError:
                raise ModelError(f"init is missing message ({t}, {s})") from None
            if vec.shape != (model.cardinality(s),) or np.any(vec <= 0.0):
                raise ModelError(f"init message ({t}, {s}) is not a positive vector")
            msgs[(t, s)] = vec / vec.sum()

    iterations = 0
    converged = False
    residual = 0.0
    for iterations in range(1, max_iters + 1):
        new = {}
        residual = 0.0
        for (t, s) in directed:
            vec = update_message(model, msgs, t, s)
            residual = max(residual, math.log(dynamic_range(vec, msgs[(t, s)])))
            new[(t, s)] = vec
        msgs = new
        if residual <= tolerance:
            converged = True
            break

    return BpReport(
        messages=msgs,
        beliefs=beliefs(model, msgs),
        iterations_run=iterations,
        converged=converged,
        residual=residual,
    )
