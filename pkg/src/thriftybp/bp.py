"""Deterministic k-way branching programs.

A program is a set of states keyed by integer id. Non-output states carry an
opaque variable label and out-edges labelled by answers in ``1..k``; output
states carry an output value and have no out-edges. Variable labels are
whatever hashable tokens the problem module uses: ``Leaf``/``Func`` for dag
evaluation, ``(x, y)`` pairs for GEN.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Mapping, NamedTuple, Union

from .report import Report

YES = "YES"
NO = "NO"


class Leaf(NamedTuple):
    """Dag-evaluation variable ``l_u``."""

    node: int


class Func(NamedTuple):
    """Dag-evaluation variable ``f_u(args)``."""

    node: int
    args: tuple[int, ...]


Variable = Hashable


class MissingEdgeError(LookupError):
    """A pruned program has no edge for the answer the input gave."""

    def __init__(self, state: int, var: Variable, answer: int):
        super().__init__(f"state {state} querying {var!r} has no edge labelled {answer}")
        self.state = state
        self.var = var
        self.answer = answer


class OracleError(ValueError):
    """The input could not answer a query with a value in ``1..k``."""


@dataclass(frozen=True)
class State:
    id: int
    var: Variable = None
    output: Any = None
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "_lookup", dict(self.edges))

    @property
    def is_output(self) -> bool:
        return self.var is None

    def target(self, label: int) -> int | None:
        return self._lookup.get(label)  # type: ignore[attr-defined]

    @property
    def labels(self) -> list[int]:
        return [lab for lab, _ in self.edges]

    @property
    def successors(self) -> list[int]:
        return [dst for _, dst in self.edges]


@dataclass(frozen=True)
class BranchingProgram:
    k: int
    start: int
    states: Mapping[int, State]

    @classmethod
    def build(
        cls,
        k: int,
        start: int,
        variables: Mapping[int, Variable],
        outputs: Mapping[int, Any],
        edges: Mapping[int, Mapping[int, int] | Iterable[tuple[int, int]]],
    ) -> BranchingProgram:
        states: dict[int, State] = {}
        for sid, var in variables.items():
            raw = edges.get(sid, ())
            pairs = tuple(raw.items()) if isinstance(raw, Mapping) else tuple(raw)
            states[sid] = State(sid, var=var, edges=tuple(sorted(pairs)))
        for sid, value in outputs.items():
            states[sid] = State(sid, output=value)
        return cls(k, start, dict(sorted(states.items())))

    @classmethod
    def constant(cls, k: int, value: Any = NO) -> BranchingProgram:
        return cls.build(k, 0, {}, {0: value}, {})

    def __getitem__(self, sid: int) -> State:
        return self.states[sid]

    def __len__(self) -> int:
        return len(self.states)

    def output_states(self) -> dict[Any, list[int]]:
        by_value: dict[Any, list[int]] = {}
        for s in self.states.values():
            if s.is_output:
                by_value.setdefault(s.output, []).append(s.id)
        return by_value

    def reachable(self) -> set[int]:
        seen = {self.start}
        stack = [self.start]
        while stack:
            for dst in self.states[stack.pop()].successors:
                if dst not in seen and dst in self.states:
                    seen.add(dst)
                    stack.append(dst)
        return seen

    # serialization

    def to_json(self, encode_var: Callable[[Variable], Any] | None = None) -> dict[str, Any]:
        encode_var = encode_var or encode_variable
        rows = []
        for s in self.states.values():
            row: dict[str, Any] = {"id": s.id}
            if s.is_output:
                row["output"] = s.output
            else:
                row["var"] = encode_var(s.var)
                row["edges"] = {str(lab): dst for lab, dst in s.edges}
            rows.append(row)
        return {"k": self.k, "start": self.start, "states": rows}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> BranchingProgram:
        try:
            variables, outputs, edges = {}, {}, {}
            for row in data["states"]:
                sid = int(row["id"])
                if sid in variables or sid in outputs:
                    raise ValueError(f"duplicate state id {sid}")
                if "output" in row:
                    outputs[sid] = row["output"]
                else:
                    variables[sid] = decode_variable(row["var"])
                    raw = row.get("edges", {})
                    pairs = raw.items() if isinstance(raw, Mapping) else raw
                    edges[sid] = [(int(lab), int(dst)) for lab, dst in pairs]
            return cls.build(int(data["k"]), int(data["start"]), variables, outputs, edges)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed branching program JSON: {exc}") from exc


def encode_variable(var: Variable) -> Any:
    if isinstance(var, Leaf):
        return ["l", var.node]
    if isinstance(var, Func):
        return ["f", var.node, list(var.args)]
    if isinstance(var, tuple) and len(var) == 2 and all(isinstance(z, int) for z in var):
        return [var[0], var[1]]
    raise ValueError(f"cannot encode variable {var!r}")


def decode_variable(raw: Any) -> Variable:
    if isinstance(raw, list):
        if len(raw) == 2 and raw[0] == "l":
            return Leaf(int(raw[1]))
        if len(raw) == 3 and raw[0] == "f":
            return Func(int(raw[1]), tuple(int(a) for a in raw[2]))
        if len(raw) == 2 and all(isinstance(z, int) for z in raw):
            return (raw[0], raw[1])
    raise ValueError(f"cannot decode variable {raw!r}")


def validate_bp(b: BranchingProgram, mode: str = "full", strict: bool = True) -> Report:
    """Check structural invariants.

    ``mode="full"`` demands exactly the labels ``1..k`` on every non-output
    state; ``mode="pruned"`` accepts any subset. ``strict=False`` allows
    several output states with the same value.
    """
    if mode not in ("full", "pruned"):
        raise ValueError(f"unknown mode {mode!r}")
    report = Report(checked=len(b.states))
    if b.start not in b.states:
        report.add("start", f"start state {b.start} does not exist")
        return report

    indeg: Counter[int] = Counter()
    for s in b.states.values():
        if s.is_output:
            if s.edges:
                report.add("output", f"output state {s.id} has out-edges", state=s.id)
            continue
        labels = s.labels
        if len(set(labels)) != len(labels):
            report.add("distinct labels", f"state {s.id} repeats an edge label", state=s.id)
        bad = sorted(lab for lab in set(labels) if not 1 <= lab <= b.k)
        if bad:
            report.add("label range", f"state {s.id} has labels {bad} outside 1..{b.k}", state=s.id)
        if mode == "full" and sorted(set(labels)) != list(range(1, b.k + 1)):
            report.add("full", f"state {s.id} does not have exactly {b.k} out-edges", state=s.id)
        for dst in s.successors:
            if dst not in b.states:
                report.add("dangling", f"state {s.id} points to missing state {dst}", state=s.id)
            else:
                indeg[dst] += 1

    if strict:
        for value, ids in b.output_states().items():
            if len(ids) > 1:
                report.add("distinct outputs", f"output value {value!r} on states {ids}", states=ids)

    sources = sorted(sid for sid in b.states if indeg[sid] == 0)
    if sources != [b.start]:
        report.add("start", f"in-degree 0 states are {sources}; only the start {b.start} may be", states=sources)
    if indeg[b.start]:
        report.add("start", f"start state {b.start} has incoming edges")

    if _has_cycle(b):
        report.add("acyclic", "program graph contains a cycle")
    return report


def _has_cycle(b: BranchingProgram) -> bool:
    colour: dict[int, int] = {}
    for root in b.states:
        if root in colour:
            continue
        colour[root] = 1
        stack = [(root, iter(b.states[root].successors))]
        while stack:
            sid, it = stack[-1]
            for dst in it:
                if dst not in b.states:
                    continue
                c = colour.get(dst)
                if c == 1:
                    return True
                if c is None:
                    colour[dst] = 1
                    stack.append((dst, iter(b.states[dst].successors)))
                    break
            else:
                colour[sid] = 2
                stack.pop()
    return False


class Step(NamedTuple):
    state: int
    var: Variable
    answer: int


@dataclass(frozen=True)
class Trace:
    steps: tuple[Step, ...]
    terminal_state: int
    output: Any

    def states(self) -> list[int]:
        """Every visited state, ending with the output state."""
        return [s.state for s in self.steps] + [self.terminal_state]

    def __len__(self) -> int:
        return len(self.steps)


Oracle = Union[Callable[[Variable], int], Mapping[Variable, int]]


def _answer(oracle: Oracle, var: Variable) -> int:
    try:
        return oracle(var) if callable(oracle) else oracle[var]  # type: ignore[index]
    except (KeyError, IndexError) as exc:
        raise OracleError(f"input has no value for variable {var!r}") from exc


def run(b: BranchingProgram, oracle: Oracle, max_steps: int | None = None) -> Trace:
    """Follow the computation path of an input from the start state.

    ``oracle`` maps variables to answers; a callable or anything indexable.
    """
    limit = len(b.states) if max_steps is None else max_steps
    steps: list[Step] = []
    sid = b.start
    while True:
        state = b.states[sid]
        if state.is_output:
            return Trace(tuple(steps), sid, state.output)
        if len(steps) >= limit:
            raise RuntimeError(f"computation exceeded {limit} steps; program is not acyclic")
        ans = _answer(oracle, state.var)
        if not isinstance(ans, int) or not 1 <= ans <= b.k:
            raise OracleError(f"answer {ans!r} to {state.var!r} is outside 1..{b.k}")
        nxt = state.target(ans)
        if nxt is None:
            raise MissingEdgeError(sid, state.var, ans)
        steps.append(Step(sid, state.var, ans))
        sid = nxt


def size(b: BranchingProgram) -> int:
    return len(b.states)


@dataclass
class ProgramBuilder:
    """Mutable helper for assembling programs state by state."""

    k: int
    variables: dict[int, Variable] = field(default_factory=dict)
    outputs: dict[int, Any] = field(default_factory=dict)
    edges: dict[int, dict[int, int]] = field(default_factory=dict)
    _next: int = 0

    def new_state(self, var: Variable) -> int:
        sid = self._next
        self._next += 1
        self.variables[sid] = var
        self.edges[sid] = {}
        return sid

    def new_output(self, value: Any) -> int:
        sid = self._next
        self._next += 1
        self.outputs[sid] = value
        return sid

    def connect(self, src: int, label: int, dst: int) -> None:
        self.edges[src][label] = dst

    def finish(self, start: int) -> BranchingProgram:
        return BranchingProgram.build(self.k, start, self.variables, self.outputs, self.edges)


def prune_unreachable(b: BranchingProgram) -> BranchingProgram:
    keep = b.reachable()
    return BranchingProgram(b.k, b.start, {sid: s for sid, s in b.states.items() if sid in keep})
