"""Map dag-evaluation inputs to GEN inputs.

For a dag with ``n`` nodes (every non-leaf with exactly two ordered
children) and value range ``k``, instances land in GEN[m] with
``m = 3kn + n + 1``. Element layout:

* ``1 .. n+1``: plain elements; node ``u`` is element ``u + 1``.
* ``n+2 ..``: ``EdgeHasValue(v, u, a)`` for each arc ``v -> u``, arcs taken
  child-major, ``k`` consecutive elements per arc.
* top ``nk`` elements: ``NodeHasValue(u, a)`` in ``(u, a)`` order, except
  that ``NodeHasValue(root, 1)`` trades places with whatever would sit at
  ``m``. Any element between the two blocks is never generated.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Any, NamedTuple, Union

from .dag import RootedDag, validate_dag
from .dageval import DagEvalInstance, node_values
from .genprob import GenInstance


class Plain(NamedTuple):
    index: int


class EdgeHasValue(NamedTuple):
    child: int
    parent: int
    value: int


class NodeHasValue(NamedTuple):
    node: int
    value: int


Name = Union[Plain, EdgeHasValue, NodeHasValue]


def _mnemonic(name: Name) -> str:
    if isinstance(name, Plain):
        return f"P({name.index})"
    if isinstance(name, EdgeHasValue):
        return f"E({name.child}->{name.parent},{name.value})"
    return f"N({name.node},{name.value})"


class VarType(enum.Enum):
    I = "i"  # (1, u): surfaces a node element
    II = "ii"  # leaf chain
    III = "iii"  # node value copied onto an out-arc
    IV = "iv"  # internal node computation
    UNUSED = "unused"

    @property
    def is_dummy(self) -> bool:
        return self in (VarType.I, VarType.III)


class GenVar(NamedTuple):
    """Classification of a GEN variable plus the data its form carries.

    ``node`` is the node a type i/iv variable is about, the parent for type
    iii, and the leaf whose value the answer reveals for type ii. ``child``
    and ``value`` are set for type iii; ``args`` for type iv; ``leaf_pos``
    is the 0-based index in the leaf order of the leaf being revealed.
    """

    kind: VarType
    node: int | None = None
    child: int | None = None
    value: int | None = None
    args: tuple[int, ...] | None = None
    leaf_pos: int | None = None


@dataclass(frozen=True, eq=False)
class ElementNaming:
    dag: RootedDag
    k: int

    def __post_init__(self):
        report = validate_dag(self.dag)
        if not report:
            raise ValueError(f"invalid dag: {report}")
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")
        if self.dag.max_indegree > 2:
            raise ValueError("the reduction supports only in-degree <= 2")
        odd = [u for u in self.dag.internal if self.dag.indegree(u) != 2]
        if odd:
            raise ValueError(f"every non-leaf must have exactly 2 children; nodes {odd} do not")

    @property
    def n(self) -> int:
        return self.dag.n

    @property
    def m(self) -> int:
        return 3 * self.k * self.n + self.n + 1

    @cached_property
    def leaf_order(self) -> tuple[int, ...]:
        return self.dag.leaves

    @cached_property
    def _arc_index(self) -> dict[tuple[int, int], int]:
        return {arc: j for j, arc in enumerate(self.dag.arcs)}

    def node_elem(self, u: int) -> int:
        return u + 1

    def edge(self, child: int, parent: int, a: int) -> int:
        j = self._arc_index[(child, parent)]
        return self.n + 1 + j * self.k + a

    def nodeval(self, u: int, a: int) -> int:
        n, k, m = self.n, self.k, self.m
        root = self.dag.root
        if (u, a) == (root, 1):
            return m
        slot = m - n * k + (u - 1) * k + a
        if slot == m:
            return m - n * k + (root - 1) * k + 1
        return slot

    def element(self, name: Name) -> int:
        if isinstance(name, Plain):
            if not 1 <= name.index <= self.n + 1:
                raise ValueError(f"no plain element {name.index}")
            return name.index
        if isinstance(name, EdgeHasValue):
            return self.edge(name.child, name.parent, name.value)
        return self.nodeval(name.node, name.value)

    @cached_property
    def _names(self) -> dict[int, Name]:
        names: dict[int, Name] = {j: Plain(j) for j in range(1, self.n + 2)}
        for v, u in self.dag.arcs:
            for a in range(1, self.k + 1):
                names[self.edge(v, u, a)] = EdgeHasValue(v, u, a)
        for u in self.dag.nodes:
            for a in range(1, self.k + 1):
                names[self.nodeval(u, a)] = NodeHasValue(u, a)
        return names

    def name_of(self, x: int) -> Name | None:
        """Mnemonic name of element ``x``, or None for the never-generated gap."""
        if not 1 <= x <= self.m:
            raise ValueError(f"element {x} outside 1..{self.m}")
        return self._names.get(x)

    def export(self) -> dict[str, int]:
        return {_mnemonic(name): x for x, name in sorted(self._names.items())}

    # variable forms

    def decode_variable(self, x: int, y: int) -> GenVar:
        m, n = self.m, self.n
        if not (1 <= x <= m and 1 <= y <= m):
            raise ValueError(f"variable ({x},{y}) outside [{m}]^2")
        d = self.dag
        ny = self._names.get(y)
        if x == 1:
            if 1 <= y <= n:
                return GenVar(VarType.I, node=y)
            if y == n + 1:
                return GenVar(VarType.II, node=self.leaf_order[0], leaf_pos=0)
            if isinstance(ny, NodeHasValue) and ny.node in self._leaf_pos:
                t = self._leaf_pos[ny.node]
                if t + 1 < len(self.leaf_order):
                    return GenVar(VarType.II, node=self.leaf_order[t + 1], leaf_pos=t + 1, value=ny.value)
            return GenVar(VarType.UNUSED)
        if 2 <= x <= n + 1:
            u = x - 1
            if isinstance(ny, NodeHasValue) and ny.node in d.children_of(u):
                return GenVar(VarType.III, node=u, child=ny.node, value=ny.value)
            return GenVar(VarType.UNUSED)
        nx = self._names.get(x)
        if isinstance(nx, EdgeHasValue) and isinstance(ny, EdgeHasValue) and nx.parent == ny.parent:
            u = nx.parent
            if (nx.child, ny.child) == d.children_of(u):
                return GenVar(VarType.IV, node=u, args=(nx.value, ny.value))
        return GenVar(VarType.UNUSED)

    @cached_property
    def _leaf_pos(self) -> dict[int, int]:
        return {w: t for t, w in enumerate(self.leaf_order)}

    def used_variables(self) -> set[tuple[int, int]]:
        """Every ``(x, y)`` assigned by one of the four defining forms."""
        d, k = self.dag, self.k
        used = {(1, u) for u in d.nodes}
        used.add((1, self.n + 1))
        for w in self.leaf_order[:-1]:
            used.update((1, self.nodeval(w, a)) for a in range(1, k + 1))
        for u in d.internal:
            v1, v2 = d.children_of(u)
            for v in (v1, v2):
                used.update((self.node_elem(u), self.nodeval(v, a)) for a in range(1, k + 1))
            used.update(
                (self.edge(v1, u, b1), self.edge(v2, u, b2))
                for b1 in range(1, k + 1) for b2 in range(1, k + 1)
            )
        return used


def build_naming(dag: RootedDag, k: int) -> ElementNaming:
    return ElementNaming(dag, k)


def classify_variable(naming: ElementNaming, x: int, y: int) -> VarType:
    return naming.decode_variable(x, y).kind


def reduce_instance(inst: DagEvalInstance, naming: ElementNaming | None = None) -> GenInstance:
    """Build ``T^I`` for a dag-evaluation input."""
    dag, k = inst.dag, inst.k
    if naming is None:
        naming = ElementNaming(dag, k)
    elif naming.dag != dag or naming.k != k:
        raise ValueError("naming was built for a different dag or k")
    report = inst.validate()
    if not report:
        raise ValueError(f"invalid instance: {report}")

    n, m = naming.n, naming.m
    table = [1] * (m * m)

    def put(x: int, y: int, v: int) -> None:
        table[(x - 1) * m + (y - 1)] = v

    for u in dag.nodes:
        put(1, u, naming.node_elem(u))
    leaves = naming.leaf_order
    put(1, n + 1, naming.nodeval(leaves[0], inst.leaf_val[leaves[0]]))
    for w, w_next in zip(leaves, leaves[1:]):
        target = naming.nodeval(w_next, inst.leaf_val[w_next])
        for a in range(1, k + 1):
            put(1, naming.nodeval(w, a), target)
    for u in dag.internal:
        v1, v2 = dag.children_of(u)
        for v in (v1, v2):
            for a in range(1, k + 1):
                put(naming.node_elem(u), naming.nodeval(v, a), naming.edge(v, u, a))
        for b1 in range(1, k + 1):
            for b2 in range(1, k + 1):
                put(naming.edge(v1, u, b1), naming.edge(v2, u, b2), naming.nodeval(u, inst.func[u][(b1, b2)]))
    return GenInstance(m, tuple(table))


def naming_to_json(naming: ElementNaming) -> dict[str, Any]:
    return {"m": naming.m, "n": naming.n, "k": naming.k, "elements": naming.export()}
