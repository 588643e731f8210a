"""Dag evaluation instances and the thrifty-program checkers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Any, Iterable, Iterator, Mapping, Sequence

from .bp import NO, YES, BranchingProgram, Func, Leaf, MissingEdgeError, OracleError, run
from .dag import RootedDag
from .report import DEFAULT_MAX_INSTANCES, DEFAULT_MAX_STEPS, FamilyTooLarge, Report


@dataclass(frozen=True, eq=False)
class DagEvalInstance:
    """One input to dag evaluation over a fixed dag and value range ``1..k``.

    ``func[u]`` is the full table of ``f_u`` keyed by argument tuples.
    Instances are indexable by ``Leaf``/``Func`` variables so they can be
    handed straight to :func:`thriftybp.bp.run`.
    """

    dag: RootedDag
    k: int
    leaf_val: Mapping[int, int]
    func: Mapping[int, Mapping[tuple[int, ...], int]]

    def __getitem__(self, var) -> int:
        if isinstance(var, Leaf):
            return self.leaf_val[var.node]
        if isinstance(var, Func):
            return self.func[var.node][tuple(var.args)]
        raise KeyError(var)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DagEvalInstance):
            return NotImplemented
        return (self.dag, self.k, dict(self.leaf_val), self._ftable()) == (
            other.dag, other.k, dict(other.leaf_val), other._ftable())

    def __hash__(self) -> int:
        return hash((self.dag, self.k, tuple(sorted(self.leaf_val.items()))))

    def _ftable(self) -> dict[int, dict[tuple[int, ...], int]]:
        return {u: dict(t) for u, t in self.func.items()}

    def validate(self) -> Report:
        report = Report(checked=1)
        d, k = self.dag, self.k
        if k < 2:
            report.add("k", f"k must be >= 2, got {k}")
        if set(self.leaf_val) != set(d.leaves):
            report.add("leaves", "leaf values must be given exactly on the leaves")
        if set(self.func) != set(d.internal):
            report.add("funcs", "functions must be given exactly on the non-leaves")
        for u, v in self.leaf_val.items():
            if not 1 <= v <= k:
                report.add("range", f"leaf {u} has value {v}", node=u)
        for u, table in self.func.items():
            if u not in d.internal:
                continue
            want = set(product(range(1, k + 1), repeat=d.indegree(u)))
            if set(table) != want:
                report.add("arity", f"function at node {u} is not a total map on [k]^{d.indegree(u)}", node=u)
            if any(not 1 <= v <= k for v in table.values()):
                report.add("range", f"function at node {u} has values outside 1..{k}", node=u)
        return report

    # serialization

    def to_json(self) -> dict[str, Any]:
        return {
            "dag": self.dag.to_json(),
            "k": self.k,
            "leaves": {str(u): v for u, v in sorted(self.leaf_val.items())},
            "funcs": {
                str(u): {",".join(map(str, args)): v for args, v in sorted(table.items())}
                for u, table in sorted(self.func.items())
            },
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> DagEvalInstance:
        try:
            dag = RootedDag.from_json(data["dag"])
            leaves = {int(u): int(v) for u, v in data["leaves"].items()}
            funcs = {
                int(u): {tuple(int(a) for a in key.split(",")): int(v) for key, v in table.items()}
                for u, table in data["funcs"].items()
            }
            return cls(dag, int(data["k"]), leaves, funcs)
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ValueError(f"malformed instance JSON: {exc}") from exc


def node_values(inst: DagEvalInstance) -> dict[int, int]:
    """Values of every node, by memoized recursion from the root."""
    d = inst.dag
    memo: dict[int, int] = {}

    def value(u: int) -> int:
        if u not in memo:
            if d.is_leaf(u):
                memo[u] = inst.leaf_val[u]
            else:
                args = tuple(value(v) for v in d.children_of(u))
                memo[u] = inst.func[u][args]
        return memo[u]

    for u in d.nodes:
        value(u)
    return memo


def node_value(inst: DagEvalInstance, u: int) -> int:
    return node_values(inst)[u]


def decide(inst: DagEvalInstance) -> str:
    return YES if node_value(inst, inst.dag.root) == 1 else NO


def thrifty_variable(dag: RootedDag, values: Mapping[int, int], u: int):
    """The variable of ``u`` that a thrifty program may query on this input."""
    if dag.is_leaf(u):
        return Leaf(u)
    return Func(u, tuple(values[v] for v in dag.children_of(u)))


def queried_node(var) -> int | None:
    return var.node if isinstance(var, (Leaf, Func)) else None


# families


def hard_input_from_values(dag: RootedDag, k: int, values: Mapping[int, int] | Sequence[int]) -> DagEvalInstance:
    """The unique hard input whose node values are ``values``.

    Every ``f_u`` is constantly 1 except at the children's values, where it
    returns ``values[u]``.
    """
    if not isinstance(values, Mapping):
        values = dict(zip(dag.nodes, values))
    leaves = {w: values[w] for w in dag.leaves}
    funcs = {}
    for u in dag.internal:
        point = tuple(values[v] for v in dag.children_of(u))
        table = dict.fromkeys(product(range(1, k + 1), repeat=dag.indegree(u)), 1)
        table[point] = values[u]
        funcs[u] = table
    return DagEvalInstance(dag, k, leaves, funcs)


def count_all_inputs(dag: RootedDag, k: int) -> int:
    exponent = len(dag.leaves) + sum(k ** dag.indegree(u) for u in dag.internal)
    return k**exponent


def enumerate_hard_inputs(
    dag: RootedDag, k: int, max_instances: int = DEFAULT_MAX_INSTANCES
) -> Iterator[DagEvalInstance]:
    """All ``k**n`` hard inputs, ordered lexicographically by node-value vector."""
    if k**dag.n > max_instances:
        raise FamilyTooLarge(f"hard family has {k}^{dag.n} instances, guard is {max_instances}")
    return (hard_input_from_values(dag, k, vec) for vec in product(range(1, k + 1), repeat=dag.n))


def enumerate_all_inputs(
    dag: RootedDag, k: int, max_instances: int = DEFAULT_MAX_INSTANCES
) -> Iterator[DagEvalInstance]:
    total = count_all_inputs(dag, k)
    if total > max_instances:
        raise FamilyTooLarge(f"full family has {total} instances, guard is {max_instances}")
    return _all_inputs(dag, k)


def _all_inputs(dag: RootedDag, k: int) -> Iterator[DagEvalInstance]:
    vals = range(1, k + 1)
    leaves = dag.leaves
    internal = dag.internal
    domains = {u: list(product(vals, repeat=dag.indegree(u))) for u in internal}
    tables = [list(product(vals, repeat=len(domains[u]))) for u in internal]
    for leaf_vec in product(vals, repeat=len(leaves)):
        leaf_val = dict(zip(leaves, leaf_vec))
        for outs in product(*tables):
            funcs = {u: dict(zip(domains[u], out)) for u, out in zip(internal, outs)}
            yield DagEvalInstance(dag, k, leaf_val, funcs)


def family_inputs(dag: RootedDag, k: int, family, max_instances: int) -> Iterable[DagEvalInstance]:
    if family == "hard":
        return enumerate_hard_inputs(dag, k, max_instances)
    if family == "all":
        return enumerate_all_inputs(dag, k, max_instances)
    if isinstance(family, str):
        raise ValueError(f"unknown family {family!r}")
    return family


# checkers


def check_thrifty(
    b: BranchingProgram,
    dag: RootedDag,
    k: int,
    family: str | Iterable[DagEvalInstance] = "hard",
    max_instances: int = DEFAULT_MAX_INSTANCES,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> Report:
    """Simulate every family input and verify each ``f_u`` query is thrifty.

    Stops at the first violation, which names the input index and state.
    """
    report = Report()
    steps = 0
    for idx, inst in enumerate(family_inputs(dag, k, family, max_instances)):
        values = node_values(inst)
        try:
            trace = run(b, inst)
        except (MissingEdgeError, OracleError) as exc:
            report.add("simulation", str(exc), input=idx, values=values)
            return report
        steps += len(trace)
        if steps > max_steps:
            raise FamilyTooLarge(f"simulation exceeded {max_steps} steps")
        report.checked += 1
        for pos, step in enumerate(trace.steps):
            var = step.var
            if isinstance(var, Func):
                want = tuple(values[v] for v in dag.children_of(var.node))
                if tuple(var.args) != want:
                    report.add(
                        "not thrifty",
                        f"state {step.state} queries {var!r} but the children's values are {want}",
                        input=idx, state=step.state, step=pos, values=values,
                    )
                    return report
    return report


def check_basic_thrifty_lemma(
    b: BranchingProgram,
    dag: RootedDag,
    k: int,
    family: str | Iterable[DagEvalInstance] = "hard",
    max_instances: int = DEFAULT_MAX_INSTANCES,
) -> Report:
    """Every non-leaf's thrifty variable is queried, and only after each child's."""
    report = Report()
    for idx, inst in enumerate(family_inputs(dag, k, family, max_instances)):
        values = node_values(inst)
        try:
            trace = run(b, inst)
        except (MissingEdgeError, OracleError) as exc:
            report.add("simulation", str(exc), input=idx, values=values)
            return report
        report.checked += 1
        first_query: dict[int, int] = {}
        positions: dict[int, list[int]] = {}
        for pos, step in enumerate(trace.steps):
            u = queried_node(step.var)
            if u is not None and step.var == thrifty_variable(dag, values, u):
                first_query.setdefault(u, pos)
                positions.setdefault(u, []).append(pos)
        for u in sorted(dag.internal, key=lambda x: (x != dag.root, -x)):
            if u not in positions:
                what = "root" if u == dag.root else f"node {u}"
                report.add("never queried", f"{what} never queried", input=idx, node=u, values=values)
                return report
            for pos in positions[u]:
                for v in dag.children_of(u):
                    if first_query.get(v, math.inf) >= pos:
                        report.add(
                            "child not queried before parent",
                            f"child {v} not queried before parent {u} at step {pos}",
                            input=idx, node=u, child=v, step=pos, values=values,
                        )
                        return report
    return report


def check_correct(
    b: BranchingProgram,
    dag: RootedDag,
    k: int,
    family: str | Iterable[DagEvalInstance] = "hard",
    max_instances: int = DEFAULT_MAX_INSTANCES,
) -> Report:
    """Compare the program's output with :func:`decide` on every family input."""
    report = Report()
    for idx, inst in enumerate(family_inputs(dag, k, family, max_instances)):
        try:
            out = run(b, inst).output
        except (MissingEdgeError, OracleError) as exc:
            report.add("simulation", str(exc), input=idx)
            return report
        report.checked += 1
        want = decide(inst)
        if out != want:
            report.add("wrong answer", f"program says {out}, instance is {want}", input=idx, values=node_values(inst))
            return report
    return report
