"""Loopy belief propagation with certified marginal confidence intervals.

Pipeline: represent a discrete pairwise MRF (:mod:`mrfbound.model`), run
synchronous BP (:mod:`mrfbound.bp`), unroll walk trees of the graph
(:mod:`mrfbound.trees`), propagate contraction bounds over them into
per-belief confidence intervals guaranteed to contain the true marginal
(:mod:`mrfbound.bounds`), and cross-check everything against exact oracles
(:mod:`mrfbound.oracle`).  The ``mrfbound`` command wraps the whole pipeline.
"""

from .bounds import (
    DeltaBound,
    IntervalReport,
    IntervalRow,
    bethe_convergence_bound,
    contract,
    interval_from_bound,
    marginal_intervals,
    saw_accuracy_bound,
    tree_delta_recursion,
)
from .bp import (
    BpReport,
    belief,
    beliefs,
    dynamic_range,
    partial_product,
    run_bp,
    uniform_messages,
    update_message,
)
from .cli import STRENGTH_PRESETS, generate_grid
from .model import (
    FormatError,
    Model,
    ModelError,
    load_model,
    potential_strength,
    restrict_evidence,
    save_model,
    unnormalized_joint,
    validate_model,
)
from .oracle import (
    ExactMarginals,
    StateSpaceError,
    exact_marginals_bruteforce,
    weitz_exact_binary,
)
from .trees import (
    CYCLE_INDUCED,
    DEAD_END,
    DEFAULT_NODE_BUDGET,
    INTERNAL,
    ROOT,
    TRUNCATED,
    BudgetError,
    TreeStats,
    UnrolledTree,
    build_bethe_tree,
    build_saw_tree,
    classify_leaves,
    cycle_involved_nodes,
)

__version__ = "1.0.0"

__all__ = [
    "__version__",
    # model
    "Model", "ModelError", "FormatError", "potential_strength",
    "unnormalized_joint", "restrict_evidence", "load_model", "save_model",
    "validate_model",
    # bp
    "BpReport", "run_bp", "update_message", "partial_product", "belief",
    "beliefs", "dynamic_range", "uniform_messages",
    # trees
    "UnrolledTree", "TreeStats", "build_bethe_tree", "build_saw_tree",
    "classify_leaves", "cycle_involved_nodes", "BudgetError",
    "ROOT", "INTERNAL", "DEAD_END", "CYCLE_INDUCED", "TRUNCATED",
    "DEFAULT_NODE_BUDGET",
    # bounds
    "DeltaBound", "contract", "tree_delta_recursion", "saw_accuracy_bound",
    "bethe_convergence_bound", "interval_from_bound", "IntervalRow",
    "IntervalReport", "marginal_intervals",
    # oracle
    "ExactMarginals", "StateSpaceError", "exact_marginals_bruteforce",
    "weitz_exact_binary",
    # generation
    "generate_grid", "STRENGTH_PRESETS",
]
