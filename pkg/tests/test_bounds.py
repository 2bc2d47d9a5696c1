import math

import numpy as np
import pytest

from mrfbound import (
    CYCLE_INDUCED,
    DeltaBound,
    Model,
    bethe_convergence_bound,
    build_saw_tree,
    contract,
    dynamic_range,
    exact_marginals_bruteforce,
    interval_from_bound,
    marginal_intervals,
    run_bp,
    saw_accuracy_bound,
    tree_delta_recursion,
)

from helpers import (
    COUPLE_2,
    graph_diameter,
    random_loopy_model,
    random_tree_model,
    triangle,
    two_node,
)

INF = DeltaBound.infinite()


def test_contract_identity_cases():
    assert contract(5.0, 1.0).value == 1.0
    assert contract(1.0, 17.0).value == 1.0
    assert contract(1.0, INF).value == 1.0


def test_contract_golden_values():
    assert contract(2.0, 2.0).value == pytest.approx(1.5, abs=1e-12)
    assert contract(math.sqrt(2.0), INF).value == pytest.approx(2.0, abs=1e-12)


def test_contract_never_exceeds_either_argument():
    for d2 in np.linspace(1.0, 16.0, 151):
        for d_e in list(range(1, 65)) + [math.inf]:
            out = contract(math.sqrt(d2), d_e if d_e != math.inf else INF).value
            assert out <= min(d2, d_e) + 1e-12


def test_contract_monotone_in_both_arguments():
    grid_psi = np.linspace(1.0, 4.0, 31)
    grid_e = list(np.linspace(1.0, 64.0, 64)) + [math.inf]
    for d_e in grid_e:
        arg = d_e if d_e != math.inf else INF
        values = [contract(p, arg).value for p in grid_psi]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
    for p in grid_psi:
        values = [
            contract(p, e if e != math.inf else INF).value for e in grid_e
        ]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


def test_contract_rejects_weak_psi():
    with pytest.raises(ValueError):
        contract(0.5, 2.0)


def test_delta_bound_infinity_absorbs_products():
    assert (INF * DeltaBound.from_value(2.0)).is_infinite
    assert contract(2.0, INF * INF).value == pytest.approx(4.0)


def test_recursion_empty_unknown_set_gives_exact_one():
    rng = np.random.default_rng(0)
    for _ in range(10):
        model = random_loopy_model(rng, int(rng.integers(3, 7)))
        tree = build_saw_tree(model, 0)
        assert tree_delta_recursion(tree, set()).log_value == 0.0


def test_recursion_single_edge_unknown_leaf():
    tree = build_saw_tree(two_node(COUPLE_2), 0)
    delta = tree_delta_recursion(tree, {1})
    assert delta.value == pytest.approx(2.0, abs=1e-12)


def test_recursion_triangle_cycle_leaves():
    tree = build_saw_tree(triangle(), 0)
    unknown = set(tree.nodes_of_kind(CYCLE_INDUCED))
    delta = tree_delta_recursion(tree, unknown)
    assert delta.value == pytest.approx(25 / 16, abs=1e-12)


def test_recursion_internal_unknown_node_poisons_subtree_only():
    tree = build_saw_tree(triangle(), 0)
    # node 1 is the first depth-1 child; unknown there costs one contraction
    delta = tree_delta_recursion(tree, {1})
    assert delta.value == pytest.approx(2.0, abs=1e-12)


def test_saw_bound_is_one_on_trees():
    rng = np.random.default_rng(1)
    for _ in range(10):
        model = random_tree_model(rng, int(rng.integers(2, 9)))
        for v in range(model.node_count):
            assert saw_accuracy_bound(model, v).log_value == 0.0


def test_saw_bound_triangle_golden():
    delta = saw_accuracy_bound(triangle(), 0)
    assert delta.value == pytest.approx(25 / 16, abs=1e-12)


def test_saw_bound_budget_one_is_infinite():
    assert saw_accuracy_bound(triangle(), 0, budget=1).is_infinite


def test_saw_bound_forcing_root_is_infinite():
    assert saw_accuracy_bound(triangle(), 0, unknown_nodes={0}).is_infinite


def test_saw_bound_forcing_loosens():
    base = saw_accuracy_bound(triangle(), 0)
    forced = saw_accuracy_bound(triangle(), 0, unknown_nodes={1})
    assert forced.log_value >= base.log_value - 1e-12


def test_bethe_bound_tree_model_collapses_to_one():
    rng = np.random.default_rng(2)
    model = random_tree_model(rng, 8)
    diam = graph_diameter(model)
    for v in range(model.node_count):
        assert bethe_convergence_bound(model, v, diam + 1).log_value == 0.0


def test_bethe_bound_triangle_goldens():
    model = triangle()
    assert bethe_convergence_bound(model, 0, 3).value == pytest.approx(
        25 / 16, abs=1e-12
    )
    n4 = bethe_convergence_bound(model, 0, 4).value
    assert n4 == pytest.approx((14 / 13) ** 2, abs=1e-12)
    assert n4 < saw_accuracy_bound(model, 0).value


def test_bethe_bound_shrinks_with_more_iterations():
    model = triangle()
    values = [bethe_convergence_bound(model, 0, n).log_value for n in range(1, 8)]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))


def test_saw_bound_no_looser_than_late_bethe_bound():
    rng = np.random.default_rng(3)
    for _ in range(30):
        model = random_loopy_model(rng, int(rng.integers(3, 7)))
        for v in range(model.node_count):
            saw = saw_accuracy_bound(model, v)
            bethe = bethe_convergence_bound(model, v, model.node_count + 1)
            assert saw.log_value >= bethe.log_value - 1e-9


def test_interval_goldens():
    assert interval_from_bound(0.5, 1.0) == (0.5, 0.5)
    lo, up = interval_from_bound(0.5, 2.0)
    assert lo == pytest.approx(0.2, abs=1e-12)
    assert up == pytest.approx(0.8, abs=1e-12)
    lo, up = interval_from_bound(0.5, 1.25)
    assert lo == pytest.approx(16 / 41, abs=1e-12)
    assert up == pytest.approx(25 / 41, abs=1e-12)


def test_interval_infinite_bound_is_vacuous():
    assert interval_from_bound(0.3, INF) == (0.0, 1.0)


def test_interval_brackets_belief_and_stays_in_unit_range():
    rng = np.random.default_rng(4)
    for _ in range(300):
        m = float(rng.uniform(0.0, 1.0))
        delta = float(np.exp(rng.uniform(0.0, 3.0)))
        lo, up = interval_from_bound(m, delta)
        assert 0.0 <= lo <= m <= up <= 1.0


def test_interval_boundary_beliefs_clamp():
    assert interval_from_bound(0.0, 2.0) == (0.0, 0.0)
    assert interval_from_bound(1.0, 2.0) == (1.0, 1.0)


def test_interval_endpoints_attained_by_two_state_witness():
    # for each (m, delta) a distribution at ratio distance exactly delta
    # attains each endpoint, so the conversion cannot be tightened
    for m in [0.1, 0.25, 0.5, 0.8]:
        for delta in [1.1, 1.5, 2.0, 3.0]:
            lo, up = interval_from_bound(m, delta)
            m_vec = np.array([m, 1.0 - m])
            p_hi = np.array([up, 1.0 - up])
            p_lo = np.array([lo, 1.0 - lo])
            assert dynamic_range(p_hi, m_vec) == pytest.approx(delta, abs=1e-9)
            assert dynamic_range(p_lo, m_vec) == pytest.approx(delta, abs=1e-9)


def test_marginal_intervals_zero_width_on_trees():
    rng = np.random.default_rng(5)
    model = random_tree_model(rng, 7)
    report = run_bp(model)
    exact = exact_marginals_bruteforce(model)
    intervals = marginal_intervals(model, report, exact=exact.marginals)
    for row in intervals.rows:
        assert row.upper - row.lower <= 1e-12
        assert row.exact == pytest.approx(row.belief, abs=1e-9)
    assert intervals.containment_ok(1e-9)


def test_marginal_intervals_triangle_golden():
    model = triangle()
    report = run_bp(model)
    intervals = marginal_intervals(model, report, exact=exact_marginals_bruteforce(model).marginals)
    for row in intervals.rows:
        assert row.belief == pytest.approx(0.5, abs=1e-9)
        assert row.lower == pytest.approx(16 / 41, abs=1e-9)
        assert row.upper == pytest.approx(25 / 41, abs=1e-9)
        assert row.delta == pytest.approx(25 / 16, abs=1e-12)
        assert row.lower <= 0.5 <= row.upper
    assert intervals.containment_ok(1e-9)


def test_marginal_intervals_respects_roots_and_flags_nonconvergence():
    model = triangle()
    report = run_bp(model, max_iters=1, tolerance=1e-300)
    intervals = marginal_intervals(model, report, roots=[2, 0])
    assert not intervals.converged
    assert sorted({r.node for r in intervals.rows}) == [0, 2]
    assert len(intervals.rows) == 4


def test_marginal_intervals_budget_one_gives_vacuous_rows():
    model = triangle()
    report = run_bp(model)
    intervals = marginal_intervals(model, report, budget=1)
    for row in intervals.rows:
        assert (row.lower, row.upper) == (0.0, 1.0)
        assert math.isinf(row.delta)


def test_budget_doubling_never_loosens_the_bound():
    rng = np.random.default_rng(6)
    for _ in range(10):
        model = random_loopy_model(rng, int(rng.integers(3, 8)))
        complete = build_saw_tree(model, 0).node_count
        previous = math.inf
        budget = 2
        while True:
            value = saw_accuracy_bound(model, 0, budget=budget).log_value
            assert value <= previous + 1e-12
            previous = value
            if budget >= complete:
                break
            budget *= 2
        assert previous == pytest.approx(
            saw_accuracy_bound(model, 0).log_value, abs=1e-12
        )


def test_weakening_potentials_never_loosens_the_bound():
    rng = np.random.default_rng(7)
    for _ in range(10):
        model = random_loopy_model(rng, 5, extra=2)
        previous = math.inf
        for alpha in [1.0, 0.75, 0.5, 0.25, 0.0]:
            weakened = Model(
                model.cardinalities,
                model.edges,
                [np.asarray(t) ** alpha for t in model.potentials],
            )
            value = saw_accuracy_bound(weakened, 0).log_value
            assert value <= previous + 1e-9
            previous = value
        assert previous == 0.0


def test_csv_serialization_shape():
    model = triangle()
    report = run_bp(model)
    intervals = marginal_intervals(model, report)
    text = intervals.to_csv()
    lines = text.strip().split("\n")
    assert lines[0] == "node,state,belief,lower,upper,delta,exact"
    assert len(lines) == 1 + sum(model.cardinalities)
    assert lines[1].endswith(",")  # empty exact column
