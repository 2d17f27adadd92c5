"""Operations of the prefactorization operad and decorated trees built from them.

An operation is a family of pairwise disjoint disks inside an output disk.
Disks are ``Interval`` values in dimension 1 and ``DiskRegion`` values in
dimension 2.  A tree stores its vertices in an explicit order (the root is
vertex 0) together with the (parent, slot) each later vertex plugs into; the
transfer formula composes in this order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .forms1d import Interval
from .forms2d import DiskRegion

Disk = Union[Interval, DiskRegion]


def _disk_str(D: Disk) -> str:
    return str(D)


def disk_to_json(D: Disk) -> dict:
    return D.to_json()


def disk_from_json(d: Mapping) -> Disk:
    if d.get("kind") == "interval":
        ((a, b),) = d["intervals"]
        return Interval(a, b)
    return DiskRegion.from_json(d)


@dataclass(frozen=True)
class PfaOperation:
    """iota^output_(inputs)."""

    inputs: Tuple[Disk, ...]
    output: Disk

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        dims = {D.dim for D in self.inputs} | {self.output.dim}
        if len(dims) != 1:
            raise ValueError("all disks of an operation must live in the same dimension")

    @property
    def arity(self) -> int:
        return len(self.inputs)

    @property
    def dim(self) -> int:
        return self.output.dim

    def __str__(self) -> str:
        return f"ι^{_disk_str(self.output)}_({', '.join(_disk_str(D) for D in self.inputs)})"

    def to_json(self) -> dict:
        return {"output": disk_to_json(self.output), "inputs": [disk_to_json(D) for D in self.inputs]}

    @classmethod
    def from_json(cls, d: Mapping) -> "PfaOperation":
        return cls(tuple(disk_from_json(x) for x in d["inputs"]), disk_from_json(d["output"]))


def validate_operation(op: PfaOperation) -> List[str]:
    """Inclusion and disjointness violations; empty means op is an operation."""
    problems = []
    for k, D in enumerate(op.inputs):
        if not op.output.contains(D):
            problems.append(f"inclusion: input {k} {D} is not contained in {op.output}")
    for a in range(op.arity):
        for b in range(a + 1, op.arity):
            if not op.inputs[a].disjoint(op.inputs[b]):
                problems.append(f"disjointness: inputs {a} and {b} overlap ({op.inputs[a]}, {op.inputs[b]})")
    return problems


def operation(output: Disk, *inputs: Disk, check: bool = True) -> PfaOperation:
    op = PfaOperation(tuple(inputs), output)
    if check:
        problems = validate_operation(op)
        if problems:
            raise ValueError("; ".join(problems))
    return op


def infinitesimal_composite(outer: PfaOperation, slot: int, inner: PfaOperation) -> PfaOperation:
    """Substitute inner into input ``slot`` of outer."""
    if not 0 <= slot < outer.arity:
        raise ValueError(f"slot {slot} out of range for arity {outer.arity}")
    if inner.output != outer.inputs[slot]:
        raise ValueError(f"color mismatch: {inner.output} plugged into slot {slot} colored {outer.inputs[slot]}")
    return PfaOperation(outer.inputs[:slot] + inner.inputs + outer.inputs[slot + 1:], outer.output)


def permute(op: PfaOperation, sigma: Sequence[int]) -> PfaOperation:
    """Right action: input k of the result is input sigma[k] of op."""
    sigma = list(sigma)
    if len(sigma) != op.arity or sorted(sigma) != list(range(op.arity)):
        raise ValueError(f"{sigma} is not a permutation of {op.arity} letters")
    return PfaOperation(tuple(op.inputs[s] for s in sigma), op.output)


@dataclass(frozen=True)
class PfaTree:
    """Vertices in composition order; ``wiring[k]`` is the (parent, slot) of vertex k + 1.

    Free leaves are ordered planarly (depth first through the slots).
    """

    vertices: Tuple[PfaOperation, ...]
    wiring: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "wiring", tuple((int(p), int(s)) for p, s in self.wiring))
        problems = self.validate()
        if problems:
            raise ValueError("invalid tree: " + "; ".join(problems))

    def validate(self) -> List[str]:
        problems = []
        if not self.vertices:
            return ["a tree needs at least one vertex"]
        if len(self.wiring) != len(self.vertices) - 1:
            return [f"{len(self.vertices)} vertices need {len(self.vertices) - 1} wiring entries"]
        used = set()
        for k, (parent, slot) in enumerate(self.wiring, start=1):
            if not 0 <= parent < k:
                problems.append(f"vertex {k} plugs into vertex {parent}, which does not come earlier")
                continue
            pv = self.vertices[parent]
            if not 0 <= slot < pv.arity:
                problems.append(f"vertex {k} uses slot {slot} of a vertex of arity {pv.arity}")
                continue
            if (parent, slot) in used:
                problems.append(f"slot {slot} of vertex {parent} is used twice")
            used.add((parent, slot))
            if self.vertices[k].output != pv.inputs[slot]:
                problems.append(f"color mismatch on the edge into slot {slot} of vertex {parent}")
        return problems

    @property
    def size(self) -> int:
        return len(self.vertices)

    def children(self, v: int) -> Dict[int, int]:
        return {slot: k for k, (p, slot) in enumerate(self.wiring, start=1) if p == v}

    def leaves(self) -> List[Tuple[int, int]]:
        """Free (vertex, slot) pairs in planar order."""
        out: List[Tuple[int, int]] = []

        def walk(v: int) -> None:
            kids = self.children(v)
            for slot in range(self.vertices[v].arity):
                if slot in kids:
                    walk(kids[slot])
                else:
                    out.append((v, slot))

        walk(0)
        return out

    def leaf_disks(self) -> List[Disk]:
        return [self.vertices[v].inputs[s] for v, s in self.leaves()]

    def spans(self) -> List[Tuple[int, int]]:
        """For each vertex, the half-open range of free leaves above it."""
        spans: List[Optional[Tuple[int, int]]] = [None] * self.size
        pos = 0

        def walk(v: int) -> None:
            nonlocal pos
            start = pos
            kids = self.children(v)
            for slot in range(self.vertices[v].arity):
                if slot in kids:
                    walk(kids[slot])
                else:
                    pos += 1
            spans[v] = (start, pos)

        walk(0)
        return spans

    def shape(self) -> str:
        if self.size == 1:
            return "corolla"
        if self.size == 2:
            return "fork" if self.vertices[0].arity == 1 else "two-vertex"
        if self.size == 3:
            return "linear" if self.wiring[1][0] == 1 else "branched"
        return f"{self.size}-vertex"

    def __str__(self) -> str:
        parts = [str(self.vertices[0])]
        for k, (p, s) in enumerate(self.wiring, start=1):
            parts.append(f"{self.vertices[k]} @ {p}.{s}")
        return "t(" + ", ".join(parts) + ")"

    def to_json(self) -> dict:
        def node(v: int) -> dict:
            kids = self.children(v)
            return {"vertex": v, "operation": self.vertices[v].to_json(),
                    "children": [dict(slot=s, **node(k)) for s, k in sorted(kids.items())]}
        return node(0)

    @classmethod
    def from_json(cls, d: Mapping) -> "PfaTree":
        by_index: Dict[int, Tuple[PfaOperation, Optional[Tuple[int, int]]]] = {}

        def visit(n: Mapping, parent: Optional[Tuple[int, int]]) -> None:
            by_index[int(n["vertex"])] = (PfaOperation.from_json(n["operation"]), parent)
            for c in n.get("children", []):
                visit(c, (int(n["vertex"]), int(c["slot"])))

        visit(d, None)
        order = sorted(by_index)
        if order != list(range(len(order))):
            raise ValueError("vertex indices must be 0..n-1")
        return cls(tuple(by_index[k][0] for k in order), tuple(by_index[k][1] for k in order[1:]))


def corolla(op: PfaOperation) -> PfaTree:
    return PfaTree((op,), ())


def two_vertex(outer: PfaOperation, slot: int, inner: PfaOperation) -> PfaTree:
    return PfaTree((outer, inner), ((0, slot),))


def _checked(*ops: PfaOperation) -> None:
    for op in ops:
        problems = validate_operation(op)
        if problems:
            raise ValueError("; ".join(problems))


def standard_trees(kind: str, disks: Mapping) -> PfaTree:
    """Named tree shapes.

    fork:             {outer, middle, inner: tuple}           t(iota^outer_middle, iota^middle_inner)
    right-free:       {outer, inputs: tuple, slot, inner}     t(iota^outer_inputs, iota^inputs[slot]_inner)
    cocycle-linear:   {ops: (mu1, mu2, mu3), slots: (s1, s2)} mu2 in slot s1 of mu1, mu3 in slot s2 of mu2
    cocycle-branched: {ops: (mu1, mu21, mu22), slots: (s1, s2)} both children on mu1, s1 < s2
    """
    if kind == "fork":
        top = PfaOperation((disks["middle"],), disks["outer"])
        low = PfaOperation(tuple(disks["inner"]), disks["middle"])
        _checked(top, low)
        return two_vertex(top, 0, low)
    if kind == "right-free":
        top = PfaOperation(tuple(disks["inputs"]), disks["outer"])
        slot = int(disks.get("slot", 0))
        low = PfaOperation(tuple(disks["inner"]), top.inputs[slot])
        _checked(top, low)
        return two_vertex(top, slot, low)
    if kind in ("cocycle-linear", "cocycle-branched"):
        mu1, mu2, mu3 = disks["ops"]
        s1, s2 = disks["slots"]
        _checked(mu1, mu2, mu3)
        if kind == "cocycle-linear":
            return PfaTree((mu1, mu2, mu3), ((0, s1), (1, s2)))
        if not s1 < s2:
            raise ValueError("branched trees list the left child first")
        return PfaTree((mu1, mu2, mu3), ((0, s1), (0, s2)))
    raise ValueError(f"unknown tree kind {kind!r}")
