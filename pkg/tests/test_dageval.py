import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bottom_up_values
from tests_helpers import random_instance
from thriftybp.bp import NO, YES, BranchingProgram, Func, Leaf
from thriftybp.dag import make_complete_binary_tree, make_path, make_pyramid
from thriftybp.dageval import (
    DagEvalInstance,
    check_basic_thrifty_lemma,
    check_correct,
    check_thrifty,
    count_all_inputs,
    decide,
    enumerate_all_inputs,
    enumerate_hard_inputs,
    hard_input_from_values,
    node_value,
    node_values,
)
from thriftybp.report import FamilyTooLarge


def _const_root(t2, c):
    funcs = {3: {a: c for a in [(1, 1), (1, 2), (2, 1), (2, 2)]}}
    return DagEvalInstance(t2, 2, {1: 1, 2: 2}, funcs)


def test_constant_root_function(t2):
    assert node_value(_const_root(t2, 1), 3) == 1
    assert decide(_const_root(t2, 1)) == YES
    assert decide(_const_root(t2, 2)) == NO
    assert node_value(_const_root(t2, 2), 1) == 1
    assert node_value(_const_root(t2, 2), 2) == 2


@pytest.mark.parametrize("make, h", [(make_complete_binary_tree, 2), (make_complete_binary_tree, 3), (make_pyramid, 3)])
@pytest.mark.parametrize("k", [2, 3])
def test_node_values_match_bottom_up_oracle(make, h, k):
    dag = make(h)
    rng = random.Random(1000 * h + k)
    children = {u: list(dag.children_of(u)) for u in dag.nodes}
    for _ in range(1000):
        inst = random_instance(dag, k, rng)
        want = bottom_up_values(dag.n, children, inst.leaf_val, inst.func)
        assert node_values(inst) == want


def test_hard_family_sizes():
    assert sum(1 for _ in enumerate_hard_inputs(make_complete_binary_tree(2), 2)) == 8
    assert sum(1 for _ in enumerate_hard_inputs(make_path(2), 3)) == 9


def test_hard_inputs_realize_their_vector(t3):
    from itertools import product

    for vec, inst in zip(product((1, 2), repeat=t3.n), enumerate_hard_inputs(t3, 2)):
        vals = node_values(inst)
        assert [vals[u] for u in t3.nodes] == list(vec)
        assert decide(inst) == (YES if vec[-1] == 1 else NO)
        assert inst.validate().ok


def test_guard_is_eager(t3):
    with pytest.raises(FamilyTooLarge):
        enumerate_all_inputs(t3, 2, max_instances=1000)
    with pytest.raises(FamilyTooLarge):
        enumerate_hard_inputs(t3, 2, max_instances=10)
    assert count_all_inputs(t3, 2) == 2 ** (4 + 3 * 4)


def test_instance_json_round_trip(pyr3):
    inst = random_instance(pyr3, 3, random.Random(5))
    again = DagEvalInstance.from_json(inst.to_json())
    assert again == inst and hash(again) == hash(inst)


def test_invalid_instance_reported(t2):
    bad = DagEvalInstance(t2, 2, {1: 3}, {3: {}})
    kinds = bad.validate().kinds()
    assert "leaves" in kinds and "range" in kinds


def test_constructed_program_checks(t2, thrifty_t2):
    assert check_thrifty(thrifty_t2, t2, 2, "all").ok
    assert check_thrifty(thrifty_t2, t2, 2, "all").checked == 64
    assert check_thrifty(thrifty_t2, t2, 2, "hard").ok
    assert check_basic_thrifty_lemma(thrifty_t2, t2, 2, "hard").ok
    assert check_correct(thrifty_t2, t2, 2, "all").ok


def non_thrifty_program():
    # the start state queries f_3(1,1) before looking at either leaf
    return BranchingProgram.build(
        2, 0, {0: Func(3, (1, 1))}, {1: YES, 2: NO}, {0: {1: 1, 2: 2}}
    )


def test_non_thrifty_flagged_at_start(t2):
    family = [hard_input_from_values(t2, 2, [2, 2, 1])]
    report = check_thrifty(non_thrifty_program(), t2, 2, family)
    assert report.first.kind == "not thrifty"
    assert report.first.where["state"] == 0 and report.first.where["step"] == 0
    # any leaf values (2,2) trip it, whatever the functions are
    bad = [inst for inst in enumerate_all_inputs(t2, 2) if inst.leaf_val == {1: 2, 2: 2}]
    for inst in bad[:5]:
        assert not check_thrifty(non_thrifty_program(), t2, 2, [inst]).ok
    ok = [inst for inst in enumerate_all_inputs(t2, 2) if inst.leaf_val == {1: 1, 2: 1}]
    assert check_thrifty(non_thrifty_program(), t2, 2, ok).ok


def test_lemma_constant_program(t2):
    report = check_basic_thrifty_lemma(BranchingProgram.constant(2, YES), t2, 2)
    assert report.first.kind == "never queried"
    assert report.first.message == "root never queried"


def test_lemma_leaf_query_free_program(t2):
    # query the root at its true arguments without ever asking for a leaf
    variables = {0: Func(3, (1, 1))}
    b = BranchingProgram.build(2, 0, variables, {1: YES, 2: NO}, {0: {1: 1, 2: 2}})
    family = [hard_input_from_values(t2, 2, [1, 1, 1])]
    report = check_basic_thrifty_lemma(b, t2, 2, family)
    assert report.first.kind == "child not queried before parent"
    assert report.first.where["node"] == 3 and report.first.where["step"] == 0


def test_checkers_report_simulation_failure(t2):
    pruned = BranchingProgram.build(2, 0, {0: Leaf(1)}, {1: YES}, {0: {1: 1}})
    family = [hard_input_from_values(t2, 2, [2, 1, 1])]
    assert check_thrifty(pruned, t2, 2, family).first.kind == "simulation"
    assert check_correct(pruned, t2, 2, family).first.kind == "simulation"


@st.composite
def leafy_programs(draw):
    """Random acyclic T^2 programs over leaf and root variables."""
    n_query = draw(st.integers(1, 5))
    pool = [Leaf(1), Leaf(2)] + [Func(3, (a, b)) for a in (1, 2) for b in (1, 2)]
    variables = {i: draw(st.sampled_from(pool)) for i in range(n_query)}
    edges = {i: {a: draw(st.integers(i + 1, n_query + 1)) for a in (1, 2)} for i in range(n_query)}
    return BranchingProgram.build(2, 0, variables, {n_query: YES, n_query + 1: NO}, edges)


@settings(max_examples=60, deadline=None)
@given(leafy_programs())
def test_all_family_thrifty_implies_hard(b):
    t2 = make_complete_binary_tree(2)
    if check_thrifty(b, t2, 2, "all").ok:
        assert check_thrifty(b, t2, 2, "hard").ok


@settings(max_examples=60, deadline=None)
@given(leafy_programs())
def test_thrifty_and_correct_implies_lemma(b):
    t2 = make_complete_binary_tree(2)
    if check_thrifty(b, t2, 2, "hard").ok and check_correct(b, t2, 2, "hard").ok:
        assert check_basic_thrifty_lemma(b, t2, 2, "hard").ok
