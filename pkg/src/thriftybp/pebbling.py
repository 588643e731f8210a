"""Black pebbling: move validation, sequence cost and an exact solver.

Move semantics:

1. if every child of ``u`` is pebbled, place a pebble on ``u`` and in the
   same step remove any subset of ``u``'s children;
2. remove a single pebble.

Identity steps are also accepted by the validator because configurations
extracted from branching-program traces repeat whenever a state makes no
pebbling progress.
"""

from __future__ import annotations

from collections import deque
from itertools import combinations
from typing import Iterable, Sequence

from .dag import RootedDag
from .report import Report

PebbleConfig = frozenset
PebbleSequence = list


class PebblingBudgetExceeded(RuntimeError):
    def __init__(self, cap: int):
        super().__init__(f"no complete pebbling sequence uses at most {cap} pebbles")
        self.cap = cap


def as_sequence(configs: Iterable[Iterable[int]]) -> list[frozenset[int]]:
    return [frozenset(c) for c in configs]


def classify_move(d: RootedDag, before: frozenset[int], after: frozenset[int]) -> str | None:
    """Name the move taking ``before`` to ``after``, or None if illegal."""
    if before == after:
        return "identity"
    added = after - before
    removed = before - after
    if not added:
        return "remove" if len(removed) == 1 else None
    if len(added) != 1:
        return None
    (u,) = added
    kids = set(d.children_of(u))
    if not kids <= before or not removed <= kids:
        return None
    return "place"


def is_valid_complete_sequence(d: RootedDag, s: Sequence[Iterable[int]]) -> Report:
    seq = as_sequence(s)
    report = Report(checked=len(seq))
    if not seq:
        report.add("empty", "sequence has no configurations")
        return report
    for t, c in enumerate(seq):
        stray = sorted(x for x in c if not 1 <= x <= d.n)
        if stray:
            report.add("range", f"configuration {t} pebbles unknown nodes {stray}", index=t)
            return report
    if seq[0]:
        report.add("start", "first configuration must be empty", index=0)
        return report
    for t in range(len(seq) - 1):
        if classify_move(d, seq[t], seq[t + 1]) is None:
            report.add(
                "illegal move",
                f"transition {t}->{t + 1} from {sorted(seq[t])} to {sorted(seq[t + 1])} is not a legal move",
                index=t,
            )
            return report
    if d.root not in seq[-1]:
        report.add("incomplete", "root is not pebbled in the final configuration", index=len(seq) - 1)
    return report


def sequence_cost(s: Sequence[Iterable[int]]) -> int:
    return max((len(frozenset(c)) for c in s), default=0)


def _successors(d: RootedDag, config: frozenset[int], budget: int):
    for x in config:
        yield config - {x}
    for u in d.nodes:
        if u in config:
            continue
        kids = d.children_of(u)
        if not all(v in config for v in kids):
            continue
        placed = config | {u}
        for r in range(len(kids) + 1):
            for drop in combinations(kids, r):
                nxt = placed.difference(drop)
                if len(nxt) <= budget:
                    yield nxt


def search_with_budget(d: RootedDag, budget: int) -> list[frozenset[int]] | None:
    """Breadth-first search for a complete sequence using at most ``budget`` pebbles.

    Returns a shortest such sequence, or None if none exists.
    """
    start: frozenset[int] = frozenset()
    parent: dict[frozenset[int], frozenset[int] | None] = {start: None}
    queue = deque([start])
    while queue:
        config = queue.popleft()
        if d.root in config:
            path = [config]
            while (prev := parent[path[-1]]) is not None:
                path.append(prev)
            return path[::-1]
        for nxt in _successors(d, config, budget):
            if nxt not in parent:
                parent[nxt] = config
                queue.append(nxt)
    return None


def min_pebbling_cost(d: RootedDag, cap: int = 16) -> tuple[int, list[frozenset[int]]]:
    """Exact black pebbling cost by iterative deepening on the budget.

    Returns ``(p, witness)``; raises PebblingBudgetExceeded if no sequence
    fits within ``cap`` pebbles.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    for budget in range(1, cap + 1):
        witness = search_with_budget(d, budget)
        if witness is not None:
            return budget, witness
    raise PebblingBudgetExceeded(cap)
