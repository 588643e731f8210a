import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thriftybp.analysis import (
    AdvicePackage,
    AnnotationError,
    ProtocolError,
    annotate_pebbling,
    build_thrifty_from_pebbling,
    check_annotation,
    construct_optimal_thrifty,
    decode_advice,
    encode_advice,
    verify_partition_bound,
)
from thriftybp.bp import YES, BranchingProgram, Leaf, size
from thriftybp.dag import make_complete_binary_tree, make_path, make_pyramid, make_random_dag
from thriftybp.dageval import (
    check_basic_thrifty_lemma,
    check_correct,
    check_thrifty,
    enumerate_hard_inputs,
    hard_input_from_values,
    node_values,
)
from thriftybp.pebbling import is_valid_complete_sequence, min_pebbling_cost

DAGS = {
    "T2": make_complete_binary_tree(2),
    "T3": make_complete_binary_tree(3),
    "pyr3": make_pyramid(3),
    "path3": make_path(3),
}


@pytest.fixture(scope="module", params=["T2", "T3", "pyr3", "path3"])
def built(request):
    dag = DAGS[request.param]
    b, p = construct_optimal_thrifty(dag, 2)
    return dag, b, p


def random_complete_sequence(dag, rng):
    """Pebble in a random topological order, dropping nodes whose parents are all done."""
    order = []
    ready = [u for u in dag.nodes if dag.is_leaf(u)]
    done = set()
    while ready:
        u = ready.pop(rng.randrange(len(ready)))
        order.append(u)
        done.add(u)
        for w in dag.parents_of(u):
            if w not in done and w not in ready and all(v in done for v in dag.children_of(w)):
                ready.append(w)
    seq = [frozenset()]
    placed = set()
    for u in order:
        placed.add(u)
        cur = seq[-1] | {u}
        seq.append(cur)
        if u == dag.root:
            break
        for x in sorted(cur):
            if x != u and all(w in placed for w in dag.parents_of(x)) and rng.random() < 0.8:
                cur = cur - {x}
                seq.append(cur)
    return seq


def test_constructed_size_bounds(built):
    dag, b, p = built
    assert size(b) >= 2**p
    _, witness = min_pebbling_cost(dag)
    assert size(b) <= sum(2 ** len(c) for c in witness) + 2


def test_constructed_is_thrifty_and_correct(built):
    dag, b, _ = built
    assert check_thrifty(b, dag, 2, "hard").ok
    assert check_correct(b, dag, 2, "hard").ok
    assert check_basic_thrifty_lemma(b, dag, 2, "hard").ok


def test_build_rejects_invalid_sequence(t2):
    with pytest.raises(ValueError):
        build_thrifty_from_pebbling(t2, 2, [[], [3]])


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 7), st.integers(0, 10**6), st.integers(2, 3))
def test_any_valid_sequence_gives_thrifty_program(n, seed, k):
    rng = random.Random(seed)
    dag = make_random_dag(n, rng)
    seq = random_complete_sequence(dag, rng)
    assert is_valid_complete_sequence(dag, seq).ok
    b = build_thrifty_from_pebbling(dag, k, seq)
    assert check_thrifty(b, dag, k, "hard").ok
    assert check_correct(b, dag, k, "hard").ok
    assert size(b) <= sum(k ** len(c) for c in seq) + 2


def test_annotations_valid(built):
    dag, b, p = built
    for inst in enumerate_hard_inputs(dag, 2):
        ann = annotate_pebbling(b, inst)
        assert check_annotation(b, ann, dag).ok
        assert ann.p >= p
        assert not b[ann.critical_state].is_output
        assert dag.root in ann.configs[-1]
        assert len(ann.configs) == len(ann.states)
        assert len(ann.bottleneck) == ann.p
        assert is_valid_complete_sequence(dag, ann.expanded(dag)).ok


def test_annotation_on_random_sequence_programs():
    rng = random.Random(21)
    for _ in range(10):
        dag = make_random_dag(rng.randint(3, 7), rng)
        p, _ = min_pebbling_cost(dag)
        b = build_thrifty_from_pebbling(dag, 2, random_complete_sequence(dag, rng))
        for inst in enumerate_hard_inputs(dag, 2):
            ann = annotate_pebbling(b, inst)
            assert ann.p >= p
            assert is_valid_complete_sequence(dag, ann.expanded(dag)).ok
            report = check_annotation(b, ann, dag)
            assert "fact" not in report.kinds() and "critical output" not in report.kinds()


def test_annotation_errors(t2):
    inst = hard_input_from_values(t2, 2, [1, 2, 1])
    leaf_only = BranchingProgram.build(2, 0, {0: Leaf(1)}, {1: YES}, {0: {1: 1, 2: 1}})
    with pytest.raises(AnnotationError):
        annotate_pebbling(leaf_only, inst)


def test_protocol_round_trip(built):
    dag, b, p = built
    for inst in enumerate_hard_inputs(dag, 2):
        pkg = encode_advice(b, inst)
        assert decode_advice(b, dag, pkg) == node_values(inst)
        assert len(pkg.words) <= dag.n - p
        assert pkg.learned >= pkg.walk_words + p


def test_protocol_detects_bad_advice(t2, thrifty_t2):
    inst = hard_input_from_values(t2, 2, [2, 1, 2])
    pkg = encode_advice(thrifty_t2, inst)
    with pytest.raises(ProtocolError):
        decode_advice(thrifty_t2, t2, AdvicePackage(pkg.critical_state, pkg.words + (1,)))
    if pkg.words:
        with pytest.raises(ProtocolError):
            decode_advice(thrifty_t2, t2, AdvicePackage(pkg.critical_state, pkg.words[:-1]))


def test_partition_bound_t2(t2, thrifty_t2):
    rep = verify_partition_bound(thrifty_t2, t2, 2)
    assert rep.passed
    assert rep.hard_inputs == 8 and rep.p == 2
    assert rep.groups >= 4 and rep.max_group <= 2
    assert sum(rep.histogram.values()) == 8
    data = rep.to_json()
    assert data["|D|"] == 8 and data["pass"] is True


def test_partition_bound_path3():
    dag = make_path(3)
    b, p = construct_optimal_thrifty(dag, 2)
    rep = verify_partition_bound(b, dag, 2)
    assert p == 1 and rep.passed and rep.groups >= 2


def test_partition_bound_pyramid3(pyr3):
    b, p = construct_optimal_thrifty(pyr3, 2)
    rep = verify_partition_bound(b, pyr3, 2)
    assert rep.passed
    assert rep.groups >= 2**p and rep.max_group <= 2 ** (pyr3.n - p)


def test_partition_bound_flags_wrong_program(t2):
    rep = verify_partition_bound(BranchingProgram.constant(2, YES), t2, 2)
    assert not rep.passed
    assert "annotation" in rep.report.kinds()
