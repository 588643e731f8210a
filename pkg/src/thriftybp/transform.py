"""Conversions between thrifty dag-evaluation programs and incremental GEN programs.

``incremental_to_thrifty`` turns a semantic-incremental GEN[m] program that
is correct on the reduction image into a thrifty k-way program of no greater
size. ``thrifty_to_incremental`` goes the other way so that the first
direction has non-trivial inputs to run on.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Hashable, Sequence

from .bp import NO, BranchingProgram, Func, Leaf, ProgramBuilder, prune_unreachable
from .dag import RootedDag
from .reduction import ElementNaming, NodeHasValue, VarType

log = logging.getLogger(__name__)


def thrifty_to_incremental(
    b: BranchingProgram, dag: RootedDag, k: int, naming: ElementNaming | None = None
) -> BranchingProgram:
    """Emulate a thrifty program by a GEN[m] program that only queries generated elements.

    A prefix of queries ``(1,1), ..., (1,n)`` surfaces the node elements.
    A leaf query walks the leaf chain from the first leaf; a query
    ``f_u(b1, b2)`` becomes the two arc copies followed by the compute query.
    Labels no reduced input can produce lead to the NO output.
    """
    naming = naming or ElementNaming(dag, k)
    if b.k != k:
        raise ValueError(f"program is {b.k}-way but k={k}")
    n, m = naming.n, naming.m
    if b[b.start].is_output:
        return BranchingProgram.constant(m, b[b.start].output)

    out = ProgramBuilder(m)
    outputs: dict[Any, int] = {}

    def output_state(value: Any) -> int:
        if value not in outputs:
            outputs[value] = out.new_output(value)
        return outputs[value]

    sink = output_state(NO)

    # entry state in the new program for every query state of b
    entry: dict[int, int] = {}
    for sid, s in b.states.items():
        if s.is_output:
            continue
        if isinstance(s.var, Leaf):
            entry[sid] = out.new_state((1, n + 1))
        elif isinstance(s.var, Func):
            u = s.var.node
            v1, _ = dag.children_of(u)
            entry[sid] = out.new_state((naming.node_elem(u), naming.nodeval(v1, s.var.args[0])))
        else:
            raise ValueError(f"state {sid} queries non-dag variable {s.var!r}")

    def resume(sid: int, answer: int) -> int:
        dst = b[sid].target(answer)
        if dst is None:
            return sink
        if b[dst].is_output:
            return output_state(b[dst].output)
        return entry[dst]

    leaf_pos = {w: t for t, w in enumerate(naming.leaf_order)}
    leaves = naming.leaf_order
    edges: dict[int, dict[int, int]] = {}

    for sid, s in b.states.items():
        if s.is_output:
            continue
        if isinstance(s.var, Leaf):
            goal = leaf_pos[s.var.node]
            chain: dict[tuple[int, int], int] = {}

            def step_target(t: int, val: int) -> int:
                # leaf at position t has just been revealed with value val
                if t == goal:
                    return resume(sid, val)
                key = (t, val)
                if key not in chain:
                    chain[key] = out.new_state((1, naming.nodeval(leaves[t], val)))
                return chain[key]

            edges[entry[sid]] = {naming.nodeval(leaves[0], a): step_target(0, a) for a in range(1, k + 1)}
            t = 0
            while t < goal:
                for val in range(1, k + 1):
                    src = step_target(t, val)
                    edges[src] = {naming.nodeval(leaves[t + 1], a): step_target(t + 1, a) for a in range(1, k + 1)}
                t += 1
        else:
            u = s.var.node
            b1, b2 = s.var.args
            v1, v2 = dag.children_of(u)
            e1, e2 = naming.edge(v1, u, b1), naming.edge(v2, u, b2)
            second = out.new_state((naming.node_elem(u), naming.nodeval(v2, b2)))
            third = out.new_state((e1, e2))
            edges[entry[sid]] = {e1: second}
            edges[second] = {e2: third}
            edges[third] = {naming.nodeval(u, a): resume(sid, a) for a in range(1, k + 1)}

    prefix = [out.new_state((1, u)) for u in dag.nodes]
    for u, src in enumerate(prefix, start=1):
        edges[src] = {u + 1: prefix[u] if u < n else entry[b.start]}

    for src, expected in edges.items():
        for label in range(1, m + 1):
            out.connect(src, label, expected.get(label, sink))
    return prune_unreachable(out.finish(prefix[0]))


@dataclass
class TransformLog:
    deleted_edges: list[tuple[int, int, int]] = field(default_factory=list)
    rejected: list[int] = field(default_factory=list)
    contracted: list[int] = field(default_factory=list)


def kept_labels(naming: ElementNaming, var: tuple[int, int]) -> set[int]:
    """Edge labels a reduced input can produce at a state querying ``var``."""
    gv = naming.decode_variable(*var)
    k = naming.k
    if gv.kind is VarType.UNUSED:
        return {1}
    if gv.kind is VarType.I:
        return {naming.node_elem(gv.node)}
    if gv.kind is VarType.II:
        return {naming.nodeval(gv.node, a) for a in range(1, k + 1)}
    if gv.kind is VarType.III:
        return {naming.edge(gv.child, gv.node, gv.value)}
    return {naming.nodeval(gv.node, a) for a in range(1, k + 1)}


def rename_variable(naming: ElementNaming, var: tuple[int, int]):
    """The dag-evaluation variable a type ii/iv GEN variable stands for."""
    gv = naming.decode_variable(*var)
    if gv.kind is VarType.II:
        return Leaf(gv.node)
    if gv.kind is VarType.IV:
        return Func(gv.node, gv.args)
    raise ValueError(f"variable {var} of type {gv.kind.value} has no dag-evaluation counterpart")


def incremental_to_thrifty(
    B: BranchingProgram,
    dag: RootedDag,
    k: int,
    naming: ElementNaming | None = None,
    contraction_order: Sequence[int] | None = None,
    log_to: TransformLog | None = None,
) -> BranchingProgram:
    """Delete impossible edges, bypass dummy states and rename variables.

    ``contraction_order`` fixes the order in which out-degree-1 states are
    bypassed; the result does not depend on it.
    """
    naming = naming or ElementNaming(dag, k)
    if B.k != naming.m:
        raise ValueError(f"program is {B.k}-way, expected m={naming.m}")
    record = log_to if log_to is not None else TransformLog()

    variables: dict[int, Hashable] = {}
    outputs: dict[int, Any] = {}
    edges: dict[int, dict[int, int]] = {}
    kinds: dict[int, VarType] = {}
    for sid, s in B.states.items():
        if s.is_output:
            outputs[sid] = s.output
            continue
        kinds[sid] = naming.decode_variable(*s.var).kind
        keep = kept_labels(naming, s.var)
        edges[sid] = {}
        for label, dst in s.edges:
            if label in keep:
                edges[sid][label] = dst
            else:
                record.deleted_edges.append((sid, label, dst))
        variables[sid] = s.var

    for sid in sorted(edges):
        if not edges[sid]:
            log.warning("state %d lost every out-edge; turning it into a reject state", sid)
            record.rejected.append(sid)
            del edges[sid], variables[sid], kinds[sid]
            outputs[sid] = NO

    start = B.start
    preds: dict[int, set[tuple[int, int]]] = {sid: set() for sid in B.states}
    for src, out in edges.items():
        for label, dst in out.items():
            preds[dst].add((src, label))

    bypass = [sid for sid in edges if len(edges[sid]) == 1 and (kinds[sid] is VarType.UNUSED or kinds[sid].is_dummy)]
    if contraction_order is not None:
        if sorted(contraction_order) != sorted(bypass):
            raise ValueError("contraction_order must list exactly the out-degree-1 states")
        bypass = list(contraction_order)
    for q in bypass:
        ((_, succ),) = edges[q].items()
        preds[succ].discard((q, next(iter(edges[q]))))
        for src, label in preds.pop(q):
            edges[src][label] = succ
            preds[succ].add((src, label))
        if start == q:
            start = succ
        del edges[q], variables[q]
        record.contracted.append(q)

    new_vars: dict[int, Hashable] = {}
    new_edges: dict[int, dict[int, int]] = {}
    for sid, var in variables.items():
        new_vars[sid] = rename_variable(naming, var)
        relabelled = {}
        for label, dst in edges[sid].items():
            name = naming.name_of(label)
            assert isinstance(name, NodeHasValue)
            relabelled[name.value] = dst
        new_edges[sid] = relabelled

    result = BranchingProgram.build(k, start, new_vars, outputs, new_edges)
    return prune_unreachable(result)
