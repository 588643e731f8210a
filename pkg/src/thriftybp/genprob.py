"""GEN[m]: closure of {1} under a binary operation on [m]."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Any, Iterable, Iterator, Mapping, Sequence

from .bp import NO, YES, BranchingProgram, MissingEdgeError, OracleError, run
from .report import DEFAULT_MAX_INSTANCES, DEFAULT_MAX_STEPS, FamilyTooLarge, Report


@dataclass(frozen=True)
class GenInstance:
    """Table ``T`` stored row-major: entry ``(x, y)`` at ``(x-1)*m + (y-1)``."""

    m: int
    table: tuple[int, ...]

    @classmethod
    def from_function(cls, m: int, fn) -> GenInstance:
        return cls(m, tuple(fn(x, y) for x in range(1, m + 1) for y in range(1, m + 1)))

    @classmethod
    def constant(cls, m: int, value: int) -> GenInstance:
        return cls(m, (value,) * (m * m))

    def T(self, x: int, y: int) -> int:
        return self.table[(x - 1) * self.m + (y - 1)]

    def __getitem__(self, var: tuple[int, int]) -> int:
        x, y = var
        if not (1 <= x <= self.m and 1 <= y <= self.m):
            raise KeyError(var)
        return self.T(x, y)

    def validate(self) -> Report:
        report = Report(checked=1)
        if self.m < 1:
            report.add("m", f"m must be >= 1, got {self.m}")
        if len(self.table) != self.m * self.m:
            report.add("shape", f"table has {len(self.table)} entries, expected {self.m * self.m}")
        bad = [i for i, v in enumerate(self.table) if not 1 <= v <= self.m]
        if bad:
            report.add("range", f"{len(bad)} entries outside 1..{self.m}", first_index=bad[0])
        return report

    def with_entries(self, updates: Mapping[tuple[int, int], int]) -> GenInstance:
        table = list(self.table)
        for (x, y), v in updates.items():
            table[(x - 1) * self.m + (y - 1)] = v
        return GenInstance(self.m, tuple(table))

    def to_json(self) -> dict[str, Any]:
        return {"m": self.m, "T": list(self.table)}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> GenInstance:
        try:
            inst = cls(int(data["m"]), tuple(int(v) for v in data["T"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed GEN JSON: {exc}") from exc
        report = inst.validate()
        if not report:
            raise ValueError(f"invalid GEN instance: {report}")
        return inst


def closure(inst: GenInstance) -> set[int]:
    """Least superset of {1} closed under ``T``; worklist over new elements."""
    found = {1}
    order = [1]
    i = 0
    while i < len(order):
        x = order[i]
        i += 1
        # pair the new element with everything found so far, both ways round
        for y in order[:i]:
            for z in (inst.T(x, y), inst.T(y, x)):
                if z not in found:
                    found.add(z)
                    order.append(z)
    return found


def closure_rounds(inst: GenInstance) -> tuple[set[int], int]:
    """Closure by synchronous rounds; returns the set and the number of growing rounds."""
    current = {1}
    rounds = 0
    while True:
        grown = current | {inst.T(x, y) for x in current for y in current}
        if grown == current:
            return current, rounds
        current = grown
        rounds += 1


def decide_gen(inst: GenInstance) -> str:
    return YES if inst.m in closure(inst) else NO


def all_gen_instances(m: int, max_instances: int = DEFAULT_MAX_INSTANCES) -> Iterator[GenInstance]:
    total = m ** (m * m)
    if total > max_instances:
        raise FamilyTooLarge(f"GEN[{m}] has {total} instances, guard is {max_instances}")
    return (GenInstance(m, t) for t in product(range(1, m + 1), repeat=m * m))


def check_semantic_incremental(
    b: BranchingProgram,
    family: Iterable[GenInstance],
    max_steps: int = DEFAULT_MAX_STEPS,
) -> Report:
    """Check incrementality along the computation path of each family input.

    A query ``(x, y)`` is allowed when each coordinate is 1 or appeared as an
    edge label earlier on the same path. Only paths actually followed by a
    family input are examined.
    """
    report = Report()
    steps = 0
    for idx, inst in enumerate(family):
        seen: set[int] = set()
        sid = b.start
        pos = 0
        while not b[sid].is_output:
            state = b[sid]
            x, y = state.var
            for z in (x, y):
                if z != 1 and z not in seen:
                    report.add(
                        "not incremental",
                        f"state {sid} queries ({x},{y}) but {z} was never an earlier edge label",
                        input=idx, step=pos, state=sid, element=z,
                    )
                    return report
            try:
                ans = inst[(x, y)]
            except KeyError as exc:
                raise OracleError(f"variable ({x},{y}) is outside GEN[{inst.m}]") from exc
            nxt = state.target(ans)
            if nxt is None:
                report.add(
                    "outside family",
                    f"state {sid} has no edge labelled {ans}; input outside the program's supported family",
                    input=idx, step=pos, state=sid,
                )
                return report
            seen.add(ans)
            sid = nxt
            pos += 1
            steps += 1
            if steps > max_steps:
                raise FamilyTooLarge(f"simulation exceeded {max_steps} steps")
        report.checked += 1
    return report


def check_gen_correct(b: BranchingProgram, family: Sequence[GenInstance] | Iterable[GenInstance]) -> Report:
    report = Report()
    for idx, inst in enumerate(family):
        try:
            out = run(b, inst).output
        except MissingEdgeError as exc:
            report.add("outside family", str(exc), input=idx)
            return report
        report.checked += 1
        want = decide_gen(inst)
        if out != want:
            report.add("wrong answer", f"program says {out}, instance is {want}", input=idx)
            return report
    return report
