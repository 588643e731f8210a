"""Pebbling annotations of thrifty computations, critical states and the advice protocol.

Every hard input's computation path in a thrifty program induces a black
pebbling of the dag. The configuration with the most pebbles marks the
input's critical state. Knowing only that state plus at most ``n - p``
values, a decoder can replay the program and recover every node value, so
a critical state is shared by at most ``k**(n - p)`` hard inputs.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from .bp import NO, YES, BranchingProgram, Func, Leaf, ProgramBuilder, Trace, run, size
from .dag import RootedDag
from .dageval import DagEvalInstance, decide, enumerate_hard_inputs, node_values, queried_node
from .pebbling import classify_move, is_valid_complete_sequence, min_pebbling_cost
from .report import DEFAULT_MAX_INSTANCES, Report


class AnnotationError(ValueError):
    """The trace does not have the shape a correct thrifty program guarantees."""


class ProtocolError(ValueError):
    """Advice words ran out, were left over, or contradicted a deduction."""


@dataclass(frozen=True)
class PebblingAnnotation:
    trace: Trace
    states: tuple[int, ...]  # q_1 .. q_t*, last one follows the first root query
    configs: tuple[frozenset[int], ...]  # aligned with states
    p: int
    critical_index: int
    values: Mapping[int, int]

    @property
    def critical_state(self) -> int:
        return self.states[self.critical_index]

    @property
    def bottleneck(self) -> frozenset[int]:
        return self.configs[self.critical_index]

    def expanded(self, dag: RootedDag) -> list[frozenset[int]]:
        """The configurations with any multi-pebble removal split into single removals.

        A query of a node that is never used again drops its children's
        pebbles without placing one of its own; the bare sequence then has a
        step that is not a single move.
        """
        out = [self.configs[0]]
        for nxt in self.configs[1:]:
            cur = out[-1]
            if classify_move(dag, cur, nxt) is None and not nxt - cur:
                for x in sorted(cur - nxt)[:-1]:
                    cur = cur - {x}
                    out.append(cur)
            out.append(nxt)
        return out


def _node_queries(dag: RootedDag, trace: Trace, values: Mapping[int, int]) -> list[int]:
    nodes = []
    for pos, step in enumerate(trace.steps):
        u = queried_node(step.var)
        if u is None:
            raise AnnotationError(f"step {pos} queries non-dag variable {step.var!r}")
        if isinstance(step.var, Func):
            want = tuple(values[v] for v in dag.children_of(u))
            if tuple(step.var.args) != want:
                raise AnnotationError(f"step {pos} queries {step.var!r}; children's values are {want}")
        nodes.append(u)
    return nodes


def annotate_pebbling(b: BranchingProgram, inst: DagEvalInstance) -> PebblingAnnotation:
    """Assign a pebbling configuration to each state on the path up to the root query."""
    dag = inst.dag
    values = node_values(inst)
    trace = run(b, inst)
    queried = _node_queries(dag, trace, values)
    if dag.root not in queried:
        raise AnnotationError("the computation path never queries the root")
    r = queried.index(dag.root)
    after = trace.steps[r + 1].state if r + 1 < len(trace.steps) else trace.terminal_state
    states = tuple(s.state for s in trace.steps[: r + 1]) + (after,)

    # next_at[t][x]: first position > t querying x, over the whole path
    length = len(queried)
    never = math.inf
    next_at: list[dict[int, float]] = [dict() for _ in range(length)]
    upcoming: dict[int, float] = {}
    for t in range(length - 1, -1, -1):
        next_at[t] = dict(upcoming)
        upcoming[queried[t]] = t

    def retained(x: int, t: int) -> bool:
        ahead = next_at[t]
        parent_next = min((ahead.get(w, never) for w in dag.parents_of(x)), default=never)
        return parent_next < ahead.get(x, never)

    configs = [frozenset()]
    for t in range(r + 1):
        u = queried[t]
        cur = configs[-1]
        kids = dag.children_of(u)
        if kids and (not set(kids) <= cur or u in cur):
            raise AnnotationError(f"step {t} queries node {u} before its children are all pebbled")
        if u == dag.root:
            nxt = (cur | {u}) - set(kids)
        else:
            nxt = set(cur)
            nxt.difference_update(v for v in kids if not retained(v, t))
            if retained(u, t):
                nxt.add(u)
            else:
                nxt.discard(u)
        configs.append(frozenset(nxt))

    p = max(len(c) for c in configs)
    critical = next(i for i, c in enumerate(configs) if len(c) == p)
    return PebblingAnnotation(trace, states, tuple(configs), p, critical, values)


def check_annotation(b: BranchingProgram, ann: PebblingAnnotation, dag: RootedDag) -> Report:
    """Validity of the configuration sequence plus the later-parent-query property."""
    report = Report(checked=1)
    seq = is_valid_complete_sequence(dag, ann.configs)
    report.violations.extend(seq.violations)
    if b[ann.critical_state].is_output:
        report.add("critical output", f"critical state {ann.critical_state} is an output state")

    queried = [queried_node(s.var) for s in ann.trace.steps]
    for t, config in enumerate(ann.configs):
        for x in config - {dag.root}:
            ok = False
            for j in range(t, len(queried)):
                if queried[j] == x:
                    break
                if queried[j] in dag.parents_of(x):
                    ok = True
                    break
            if not ok:
                report.add("fact", f"node {x} pebbled at index {t} has no later parent query", index=t, node=x)
                return report
    return report


# upper-bound construction


def build_thrifty_from_pebbling(dag: RootedDag, k: int, seq: Sequence[Iterable[int]]) -> BranchingProgram:
    """Thrifty program that walks a pebbling sequence, remembering pebbled values.

    States are keyed by the step index and the values of the nodes pebbled
    there. Each placement queries the placed node; the root's placement
    branches straight to the outputs.
    """
    configs = [frozenset(c) for c in seq]
    report = is_valid_complete_sequence(dag, configs)
    if not report:
        raise ValueError(f"invalid pebbling sequence: {report}")
    placements: dict[int, int] = {}
    for t in range(len(configs) - 1):
        added = configs[t + 1] - configs[t]
        if added:
            (placements[t],) = added

    out = ProgramBuilder(k)
    yes, no = out.new_output(YES), out.new_output(NO)
    ids: dict[tuple[int, tuple[tuple[int, int], ...]], int] = {}
    pending: list[tuple[int, dict[int, int]]] = []

    def state_for(t: int, assign: dict[int, int]) -> int:
        while t not in placements:
            t += 1
            assign = {x: a for x, a in assign.items() if x in configs[t]}
        key = (t, tuple(sorted(assign.items())))
        if key not in ids:
            u = placements[t]
            var = Func(u, tuple(assign[v] for v in dag.children_of(u))) if dag.children_of(u) else Leaf(u)
            ids[key] = out.new_state(var)
            pending.append((t, assign))
        return ids[key]

    start = state_for(0, {})
    while pending:
        t, assign = pending.pop()
        sid = ids[(t, tuple(sorted(assign.items())))]
        u = placements[t]
        for a in range(1, k + 1):
            if u == dag.root:
                dst = yes if a == 1 else no
            else:
                nxt = {x: v for x, v in assign.items() if x in configs[t + 1]}
                nxt[u] = a
                dst = state_for(t + 1, nxt)
            out.connect(sid, a, dst)
    return out.finish(start)


def construct_optimal_thrifty(dag: RootedDag, k: int, cap: int = 16) -> tuple[BranchingProgram, int]:
    p, witness = min_pebbling_cost(dag, cap)
    return build_thrifty_from_pebbling(dag, k, witness), p


# advice protocol


@dataclass(frozen=True)
class AdvicePackage:
    critical_state: int
    words: tuple[int, ...]
    # diagnostics only; decoding never reads these
    walk_words: int = 0
    learned: int = 0
    pebbles: int = 0

    def to_json(self) -> dict[str, Any]:
        return {
            "critical_state": self.critical_state,
            "words": list(self.words),
            "walk_words": self.walk_words,
            "learned": self.learned,
            "pebbles": self.pebbles,
        }


def encode_advice(b: BranchingProgram, inst: DagEvalInstance, ann: PebblingAnnotation | None = None) -> AdvicePackage:
    dag = inst.dag
    ann = ann or annotate_pebbling(b, inst)
    values = ann.values
    known: dict[int, int] = {}
    words: list[int] = []
    for step in ann.trace.steps[ann.critical_index:]:
        var = step.var
        u = queried_node(var)
        if isinstance(var, Func):
            for v, a in zip(dag.children_of(u), var.args):
                known.setdefault(v, a)
        if u not in known:
            words.append(values[u])
            known[u] = values[u]
        if step.answer != known[u]:
            raise ProtocolError(f"state {step.state} answered {step.answer} but node {u} has value {known[u]}")
    walk_words = len(words)
    learned = len(known)
    words.extend(values[u] for u in dag.nodes if u not in known)
    return AdvicePackage(ann.critical_state, tuple(words), walk_words, learned, ann.p)


def decode_advice(b: BranchingProgram, dag: RootedDag, pkg: AdvicePackage) -> dict[int, int]:
    """Recover every node value from a critical state and advice words."""
    words = iter(pkg.words)

    def take(what: str) -> int:
        try:
            return next(words)
        except StopIteration:
            raise ProtocolError(f"advice ran out while {what}") from None

    known: dict[int, int] = {}
    sid = pkg.critical_state
    while not b[sid].is_output:
        var = b[sid].var
        u = queried_node(var)
        if u is None:
            raise ProtocolError(f"state {sid} queries non-dag variable {var!r}")
        if isinstance(var, Func):
            for v, a in zip(dag.children_of(u), var.args):
                if known.setdefault(v, a) != a:
                    raise ProtocolError(f"state {sid} implies node {v}={a}, already learned {known[v]}")
        if u not in known:
            known[u] = take(f"walking at state {sid}")
        nxt = b[sid].target(known[u])
        if nxt is None:
            raise ProtocolError(f"state {sid} has no edge labelled {known[u]}")
        sid = nxt
    for u in dag.nodes:
        if u not in known:
            known[u] = take(f"filling residual node {u}")
    leftover = list(words)
    if leftover:
        raise ProtocolError(f"{len(leftover)} advice word(s) left over")
    return dict(sorted(known.items()))


# partition bound


@dataclass
class BoundReport:
    p: int
    n: int
    k: int
    hard_inputs: int
    groups: int
    max_group: int
    size: int
    histogram: dict[int, int] = field(default_factory=dict)
    report: Report = field(default_factory=Report)

    @property
    def passed(self) -> bool:
        return self.report.ok

    def to_json(self) -> dict[str, Any]:
        return {
            "p": self.p,
            "n": self.n,
            "k": self.k,
            "|D|": self.hard_inputs,
            "groups": self.groups,
            "max_group": self.max_group,
            "group_bound": self.k ** (self.n - self.p),
            "required_groups": self.k**self.p,
            "size": self.size,
            "histogram": {str(s): c for s, c in sorted(self.histogram.items())},
            "pass": self.passed,
            "violations": [v.to_json() for v in self.report.violations],
        }


def verify_partition_bound(
    b: BranchingProgram,
    dag: RootedDag,
    k: int,
    p: int | None = None,
    cap: int = 16,
    max_instances: int = DEFAULT_MAX_INSTANCES,
) -> BoundReport:
    """Group the hard inputs by critical state and check the counting bound."""
    if p is None:
        p, _ = min_pebbling_cost(dag, cap)
    report = Report()
    counts: Counter[int] = Counter()
    witnesses: dict[int, int] = {}
    for idx, inst in enumerate(enumerate_hard_inputs(dag, k, max_instances)):
        report.checked += 1
        try:
            ann = annotate_pebbling(b, inst)
        except (AnnotationError, LookupError, ValueError) as exc:
            report.add("annotation", str(exc), input=idx)
            continue
        if ann.trace.output != decide(inst):
            report.add("wrong answer", f"program says {ann.trace.output}", input=idx, values=ann.values)
        if ann.p < p:
            report.add("pebbles", f"input pebbled with {ann.p} < {p} pebbles", input=idx)
        counts[ann.critical_state] += 1
        witnesses.setdefault(ann.critical_state, idx)

    total = report.checked
    bound = k ** (dag.n - p)
    for state, c in sorted(counts.items()):
        if c > bound:
            report.add("group", f"critical state {state} is shared by {c} > {bound} inputs",
                       state=state, input=witnesses[state])
    if len(counts) < k**p:
        report.add("groups", f"{len(counts)} critical states, need at least {k ** p}")
    if size(b) < k**p:
        report.add("size", f"program has {size(b)} states, need at least {k ** p}")
    return BoundReport(
        p=p, n=dag.n, k=k, hard_inputs=total, groups=len(counts),
        max_group=max(counts.values(), default=0), size=size(b),
        histogram=dict(counts), report=report,
    )
