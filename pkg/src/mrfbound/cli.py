"""Command-line front end: generate models, run BP, emit certified bounds.

Commands
--------
    mrfbound gen grid --rows R --cols C --strength {weak|stronger|very-strong|D} --seed S -o FILE
    mrfbound bp --model FILE [--max-iters N] [--tol T]
    mrfbound bound --model FILE [--roots all|v1,v2] [--budget B] [--exact] -o CSV
    mrfbound exact --model FILE
    mrfbound sweep --rows R --cols C --d D1,D2,... --seeds K -o CSV

The environment variable MRFBOUND_BUDGET overrides the default walk-tree node
budget.  All CSV output uses '.' decimals, LF line endings, and a header row,
and is byte-identical for identical seeds and flags.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from .bounds import marginal_intervals
from .bp import run_bp
from .model import Model, ModelError, load_model, save_model
from .oracle import exact_marginals_bruteforce
from .trees import DEFAULT_NODE_BUDGET

__all__ = ["STRENGTH_PRESETS", "generate_grid", "main"]

# named regimes for the coupling strength of generated models
STRENGTH_PRESETS = {"weak": 1.7, "stronger": 1.9, "very-strong": 2.5}

DEFAULT_MAX_ITERS = 1000
DEFAULT_TOLERANCE = 1e-8


def generate_grid(rows: int, cols: int, target_strength: float, seed: int) -> Model:
    """Binary grid model whose edge strengths never exceed ``target_strength``.

    Each edge gets the table [[e^t, e^-t], [e^-t, e^t]] with t drawn
    uniformly from [-ln(target), +ln(target)] (PCG64, fixed by seed); for
    this family the strength is exactly e^|t|, so the preset cap is exact.
    The draws are a preset-independent uniform sample scaled by ln(target),
    so the same seed gives pointwise-comparable models across presets.
    """
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    if target_strength < 1.0:
        raise ValueError("target strength must be >= 1")
    n = rows * cols
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    rng = np.random.Generator(np.random.PCG64(seed))
    draws = rng.uniform(-1.0, 1.0, size=len(edges))
    tables = []
    for u in draws * math.log(target_strength):
        hi, lo = math.exp(u), math.exp(-u)
        tables.append([[hi, lo], [lo, hi]])
    return Model([2] * n, edges, tables)


def _parse_strength(text: str) -> float:
    if text in STRENGTH_PRESETS:
        return STRENGTH_PRESETS[text]
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"strength must be one of {sorted(STRENGTH_PRESETS)} or a number >= 1"
        ) from None
    if value < 1.0:
        raise argparse.ArgumentTypeError("numeric strength must be >= 1")
    return value


def _parse_roots(text: str):
    if text == "all":
        return None
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError("roots must be 'all' or v1,v2,...") from None


def _parse_d_list(text: str):
    try:
        values = [float(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError("--d takes a comma-separated list") from None
    if not values or any(d < 1.0 for d in values):
        raise argparse.ArgumentTypeError("every d value must be >= 1")
    return values


def _resolve_budget(flag_value) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get("MRFBOUND_BUDGET")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise SystemExit(f"MRFBOUND_BUDGET is not an integer: {env!r}") from None
    return DEFAULT_NODE_BUDGET


def _load(path: str) -> Model:
    with open(path, "r", encoding="utf-8") as fh:
        return load_model(fh)


def _fmt(x: float) -> str:
    return repr(float(x))


def _cmd_gen(args) -> int:
    model = generate_grid(args.rows, args.cols, args.strength, args.seed)
    text = save_model(model)
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return 0


def _cmd_bp(args) -> int:
    model = _load(args.model)
    report = run_bp(model, max_iters=args.max_iters, tolerance=args.tol)
    status = "converged" if report.converged else "NOT converged"
    print(f"{status} after {report.iterations_run} iterations "
          f"(residual {report.residual:.3e})")
    for v, bel in enumerate(report.beliefs):
        print(f"node {v}: " + " ".join(_fmt(b) for b in bel))
    return 0


def _cmd_exact(args) -> int:
    model = _load(args.model)
    result = exact_marginals_bruteforce(model)
    print(f"partition value {_fmt(result.partition_value)}")
    for v, marg in enumerate(result.marginals):
        print(f"node {v}: " + " ".join(_fmt(p) for p in marg))
    return 0


def _cmd_bound(args) -> int:
    model = _load(args.model)
    budget = _resolve_budget(args.budget)
    report = run_bp(model, max_iters=args.max_iters, tolerance=args.tol)
    exact = None
    if args.exact:
        exact = exact_marginals_bruteforce(model).marginals
    intervals = marginal_intervals(
        model, report, budget=budget, exact=exact, roots=args.roots
    )
    csv_text = intervals.to_csv()
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)

    status = "converged" if report.converged else "NOT converged"
    verdict = intervals.containment_ok()
    print(f"BP {status} after {report.iterations_run} iterations; "
          f"max interval width {intervals.max_width():.6f}", file=sys.stderr)
    if verdict is None:
        print("containment: not checked (run with --exact)", file=sys.stderr)
        return 0
    print(f"containment: {'PASS' if verdict else 'FAIL'}", file=sys.stderr)
    return 0 if verdict else 1


def _cmd_sweep(args) -> int:
    budget = _resolve_budget(args.budget)
    lines = ["d_target,seed,node,width,contains_truth"]
    for d in sorted(args.d):
        for seed in range(args.seeds):
            model = generate_grid(args.rows, args.cols, d, seed)
            report = run_bp(model, max_iters=args.max_iters, tolerance=args.tol)
            exact = exact_marginals_bruteforce(model).marginals
            intervals = marginal_intervals(model, report, budget=budget, exact=exact)
            per_node = {}
            for row in intervals.rows:
                width, ok = per_node.get(row.node, (0.0, True))
                width = max(width, row.upper - row.lower)
                ok = ok and (row.lower - 1e-9 <= row.exact <= row.upper + 1e-9)
                per_node[row.node] = (width, ok)
            for node in sorted(per_node):
                width, ok = per_node[node]
                lines.append(
                    f"{_fmt(d)},{seed},{node},{_fmt(width)},{str(ok).lower()}"
                )
    text = "\n".join(lines) + "\n"
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mrfbound",
        description="Loopy BP with certified confidence intervals on pairwise MRFs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a model file")
    gen_kind = gen.add_subparsers(dest="kind", required=True)
    grid = gen_kind.add_parser("grid", help="rectangular lattice of binary variables")
    grid.add_argument("--rows", type=int, required=True)
    grid.add_argument("--cols", type=int, required=True)
    grid.add_argument("--strength", type=_parse_strength, default="weak",
                      help="weak|stronger|very-strong or a numeric target >= 1")
    grid.add_argument("--seed", type=int, default=0)
    grid.add_argument("-o", "--output", required=True)
    grid.set_defaults(func=_cmd_gen)

    bp = sub.add_parser("bp", help="run belief propagation and print beliefs")
    bp.add_argument("--model", required=True)
    bp.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    bp.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE)
    bp.set_defaults(func=_cmd_bp)

    bound = sub.add_parser("bound", help="BP plus certified intervals, as CSV")
    bound.add_argument("--model", required=True)
    bound.add_argument("--roots", type=_parse_roots, default=None,
                       help="'all' (default) or a comma-separated node list")
    bound.add_argument("--budget", type=int, default=None,
                       help="walk-tree node budget (default 10^6 or MRFBOUND_BUDGET)")
    bound.add_argument("--exact", action="store_true",
                       help="also compute brute-force marginals and verify containment")
    bound.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    bound.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE)
    bound.add_argument("-o", "--output", default=None)
    bound.set_defaults(func=_cmd_bound)

    exact = sub.add_parser("exact", help="brute-force marginals by enumeration")
    exact.add_argument("--model", required=True)
    exact.set_defaults(func=_cmd_exact)

    sweep = sub.add_parser("sweep", help="width-vs-strength study on seeded grids")
    sweep.add_argument("--rows", type=int, required=True)
    sweep.add_argument("--cols", type=int, required=True)
    sweep.add_argument("--d", type=_parse_d_list, required=True,
                       help="comma-separated strength targets, each >= 1")
    sweep.add_argument("--seeds", type=int, required=True,
                       help="number of seeds (0..K-1) per strength")
    sweep.add_argument("--budget", type=int, default=None)
    sweep.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    sweep.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE)
    sweep.add_argument("-o", "--output", required=True)
    sweep.set_defaults(func=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ModelError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
