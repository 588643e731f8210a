"""Rooted dags with ordered children.

Nodes are the integers ``1..n``. Arcs run from a child into its parent, so
leaves have no children and the root has no parents. The generators number
nodes leaves-first so that every child index is smaller than its parent's
and the root is always node ``n``.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Mapping, Sequence

from .report import Report


@dataclass(frozen=True)
class RootedDag:
    n: int
    root: int
    children: tuple[tuple[int, ...], ...]  # children[u - 1], left to right

    @classmethod
    def from_children(
        cls, n: int, root: int, children: Mapping[int, Sequence[int]] | Sequence[Sequence[int]]
    ) -> RootedDag:
        if isinstance(children, Mapping):
            rows = tuple(tuple(children.get(u, ())) for u in range(1, n + 1))
        else:
            rows = tuple(tuple(c) for c in children)
        return cls(n, root, rows)

    @property
    def nodes(self) -> range:
        return range(1, self.n + 1)

    def children_of(self, u: int) -> tuple[int, ...]:
        return self.children[u - 1]

    @cached_property
    def _parents(self) -> tuple[tuple[int, ...], ...]:
        parents: list[list[int]] = [[] for _ in range(self.n)]
        for u in self.nodes:
            for v in self.children_of(u):
                if 1 <= v <= self.n and u not in parents[v - 1]:
                    parents[v - 1].append(u)
        return tuple(tuple(p) for p in parents)

    def parents_of(self, u: int) -> tuple[int, ...]:
        return self._parents[u - 1]

    def indegree(self, u: int) -> int:
        return len(self.children_of(u))

    def is_leaf(self, u: int) -> bool:
        return not self.children_of(u)

    @cached_property
    def leaves(self) -> tuple[int, ...]:
        return tuple(u for u in self.nodes if self.is_leaf(u))

    @cached_property
    def internal(self) -> tuple[int, ...]:
        return tuple(u for u in self.nodes if not self.is_leaf(u))

    @cached_property
    def arcs(self) -> tuple[tuple[int, int], ...]:
        """All arcs ``(child, parent)``, sorted child-major."""
        return tuple(sorted((v, u) for u in self.nodes for v in self.children_of(u)))

    @property
    def max_indegree(self) -> int:
        return max((self.indegree(u) for u in self.nodes), default=0)

    def topological_order(self) -> list[int]:
        """Children before parents. Raises ValueError on a cycle."""
        pending = {u: len(set(self.children_of(u))) for u in self.nodes}
        queue = deque(u for u in self.nodes if pending[u] == 0)
        order = []
        while queue:
            v = queue.popleft()
            order.append(v)
            for u in self.parents_of(v):
                pending[u] -= 1
                if pending[u] == 0:
                    queue.append(u)
        if len(order) != self.n:
            raise ValueError("dag contains a cycle")
        return order

    # serialization

    def to_json(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "root": self.root,
            "children": {str(u): list(self.children_of(u)) for u in self.nodes if self.children_of(u)},
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> RootedDag:
        try:
            n = int(data["n"])
            root = int(data["root"])
            raw = data.get("children", {})
            children = {int(u): [int(v) for v in vs] for u, vs in raw.items()}
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed dag JSON: {exc}") from exc
        return cls.from_children(n, root, children)


def validate_dag(d: RootedDag) -> Report:
    report = Report(checked=1)
    if d.n < 2:
        report.add("n>=2", f"dag has {d.n} node(s); at least 2 are required")
        return report
    if len(d.children) != d.n:
        report.add("shape", f"children table has {len(d.children)} rows for n={d.n}")
        return report
    for u in d.nodes:
        kids = d.children_of(u)
        bad = [v for v in kids if not 1 <= v <= d.n]
        if bad:
            report.add("consistency", f"node {u} lists out-of-range children {bad}", node=u)
        if len(set(kids)) != len(kids):
            report.add("consistency", f"node {u} lists a child twice", node=u)
        if u in kids:
            report.add("acyclic", f"node {u} is its own child", node=u)
    if not report.ok:
        return report

    sinks = [u for u in d.nodes if not d.parents_of(u)]
    if len(sinks) != 1:
        report.add("unique root", f"out-degree 0 nodes are {sinks}; exactly one is required")
    elif sinks[0] != d.root:
        report.add("unique root", f"declared root {d.root} but the out-degree 0 node is {sinks[0]}")
    try:
        d.topological_order()
    except ValueError:
        report.add("acyclic", "graph contains a cycle")
    if not _connected(d):
        report.add("connected", "graph is not connected")
    return report


def _connected(d: RootedDag) -> bool:
    seen = {1}
    stack = [1]
    while stack:
        u = stack.pop()
        for w in (*d.children_of(u), *d.parents_of(u)):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == d.n


def _number_levels(levels: list[list[list[int]]]) -> RootedDag:
    """Build a dag from levels listed bottom-up.

    ``levels[i][j]`` holds the positions (in ``levels[i - 1]``) of the
    children of the j-th node on level i.
    """
    ids: list[list[int]] = []
    children: dict[int, list[int]] = {}
    nxt = 1
    for depth, level in enumerate(levels):
        row = []
        for kids in level:
            row.append(nxt)
            if kids:
                children[nxt] = [ids[depth - 1][j] for j in kids]
            nxt += 1
        ids.append(row)
    n = nxt - 1
    return RootedDag.from_children(n, n, children)


def make_complete_binary_tree(h: int) -> RootedDag:
    """The complete binary tree of height ``h`` with ``2**h - 1`` nodes."""
    if h < 2:
        raise ValueError(f"tree height must be >= 2, got {h}")
    levels: list[list[list[int]]] = [[[] for _ in range(2 ** (h - 1))]]
    for width in (2**i for i in range(h - 2, -1, -1)):
        levels.append([[2 * j, 2 * j + 1] for j in range(width)])
    return _number_levels(levels)


def make_pyramid(h: int) -> RootedDag:
    if h < 2:
        raise ValueError(f"pyramid height must be >= 2, got {h}")
    levels: list[list[list[int]]] = [[[] for _ in range(h)]]
    for width in range(h - 1, 0, -1):
        levels.append([[j, j + 1] for j in range(width)])
    return _number_levels(levels)


def make_path(length: int) -> RootedDag:
    if length < 2:
        raise ValueError(f"path length must be >= 2, got {length}")
    return RootedDag.from_children(length, length, {u: [u - 1] for u in range(2, length + 1)})


def make_random_dag(n: int, rng: random.Random, max_indegree: int = 2) -> RootedDag:
    """Random connected rooted dag, leaves-first numbering, root = n.

    Each non-leaf takes ``min(max_indegree, u - 1)`` children, preferring
    nodes that still lack a parent so the result has a unique sink.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if n == 2 or max_indegree == 1:
        return make_path(n)
    n_leaves = rng.randint(2, max(2, (n + 1) // 2))
    children: dict[int, list[int]] = {}
    orphans = list(range(1, n_leaves + 1))
    for u in range(n_leaves + 1, n + 1):
        d = min(max_indegree, u - 1)
        rng.shuffle(orphans)
        kids = orphans[:d]
        rest = [v for v in range(1, u) if v not in kids]
        kids += rng.sample(rest, d - len(kids))
        children[u] = sorted(kids)
        orphans = [v for v in orphans if v not in kids] + [u]
    return RootedDag.from_children(n, n, children)


GENERATORS = {
    "tree": make_complete_binary_tree,
    "pyramid": make_pyramid,
    "path": make_path,
}


def dag_from_spec(spec: str) -> RootedDag:
    """Resolve ``tree:3`` / ``pyramid:3`` / ``path:4`` or a JSON file path."""
    name, sep, arg = spec.partition(":")
    if sep and name in GENERATORS:
        return GENERATORS[name](int(arg))
    with open(spec) as fh:
        data = json.load(fh)
    if "dag" in data and "n" not in data:
        data = data["dag"]
    return RootedDag.from_json(data)

