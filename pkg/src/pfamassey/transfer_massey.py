"""Homotopy transfer on decorated trees, the improved Massey cocycle and the L-invariant.

A TheoryContext attaches to every disk D the Sym-lift of the form retract of
D, perturbed by the theory's small differential (d_CE or the BV Laplacian),
and the improved retract onto the cohomology of R^m.  Trees are evaluated by
putting i on the leaves, multiplying along each vertex and applying the
homotopy of the vertex's output disk on internal edges; the root applies the
projection.  Vertices are processed from last to first, so a child is always
finished before its parent.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .chains import (Chain, ChainTheory, factor_chain, generator, homogeneous_parts, is_zero,
                     perturbation, product, to_json, to_str, total_degree)
from .forms1d import REAL_LINE, Form1D, Interval, box1, bump1, d1, hat1, sdr_interval
from .forms2d import DiskRegion, HomotopyBudget, box2, d2, euler_characteristic, sdr_region, tensor
from .pfa_trees import (Disk, PfaOperation, PfaTree, corolla, infinitesimal_composite, two_vertex,
                        validate_operation)
from .sdr_calculus import Sdr, improve_locally_constant, lift_sym, perturb, verify_sdr

ZERO = Fraction(0)


class SdrVerificationError(RuntimeError):
    """A constructed retract failed one of its side conditions."""


# -- sample forms used to certify each retract ------------------------------------

def _interval_samples(D: Interval, D0: Interval) -> List[Form1D]:
    if not D.bounded:
        D = Interval(D0.a - 1, D0.b + 2)
    a, b = D.a, D.b
    w = (b - a) / 4
    return [box1(a + w, a + 2 * w, 3), d1(hat1(a + w, a + 2 * w, a + 3 * w)) + box1(a + 2 * w, b - w),
            hat1(a, a + w, a + 3 * w, 2)]


def _polyomino_samples(D: DiskRegion) -> list:
    """Samples with breakpoints on the cell grid, so they lie in every homotopy budget."""
    cells = sorted(D.cells)
    s = D.pitch
    i, j = cells[0]
    out = [box2(i * s, (i + 1) * s, j * s, (j + 1) * s, 2), box2(*[v * s for v in _cell(cells[-1])], 3)]
    for a, b in cells:
        if (a + 1, b) in D.cells:
            out.append(tensor(hat1(a * s, (a + 1) * s, (a + 2) * s), box1(b * s, (b + 1) * s)))
            break
    for a, b in cells:
        if {(a + 1, b), (a, b + 1), (a + 1, b + 1)} <= D.cells:
            f = tensor(hat1(a * s, (a + 1) * s, (a + 2) * s), hat1(b * s, (b + 1) * s, (b + 2) * s))
            out += [f, d2(f)]
            break
    return out


def _cell(c):
    i, j = c
    return (i, i + 1, j, j + 1)


def _region_samples(D: DiskRegion, D0: Tuple[Interval, Interval]) -> list:
    if D.kind == "polyomino":
        return _polyomino_samples(D)
    if D.kind == "plane":
        I, J = D0
        boxes = [(I.a, I.b, J.a, J.b), (I.b, I.b + 1, J.a - 1, J.a)]
    else:
        boxes = D.boxes()
    out = []
    for k, (x0, x1, y0, y1) in enumerate(boxes):
        xm, ym = (x0 + x1) / 2, (y0 + y1) / 2
        out.append(box2(x0, xm, y0, y1, k + 2))
        out.append(tensor(hat1(x0, xm, x1), box1(y0, ym)))
        out.append(d2(tensor(hat1(x0, xm, x1), hat1(y0, ym, y1))) + tensor(box1(x0, x1), hat1(y0, y1 - (y1 - y0) / 4, y1)))
        out.append(tensor(hat1(x0, xm, x1), hat1(y0, ym, y1, 3)))
    return out


# -- the theory context -----------------------------------------------------------

class TheoryContext:
    """Per-disk perturbed and improved retracts of one chain theory, built on demand and cached."""

    def __init__(self, theory: ChainTheory, budget: HomotopyBudget = HomotopyBudget(),
                 reference=None, verify: bool = True):
        self.theory = theory
        self.budget = budget
        self.verify = verify
        if theory.m == 1:
            self.reference = reference if reference is not None else Interval(0, 1)
            self.real = REAL_LINE
        else:
            self.reference = tuple(reference) if reference is not None else (Interval(0, 1), Interval(0, 1))
            self.real = DiskRegion.plane()
        self._forms: Dict[Disk, Sdr] = {}
        self._lifted: Dict[Disk, Sdr] = {}
        self._improved: Dict[Disk, Sdr] = {}
        self.certificates: Dict[str, Dict[str, list]] = {}

    @property
    def m(self) -> int:
        return self.theory.m

    def omega_real(self):
        """The reference top form standing in for omega on R^m."""
        if self.m == 1:
            return bump1(self.reference)
        return tensor(bump1(self.reference[0]), bump1(self.reference[1]))

    def _check_disk(self, D: Disk) -> None:
        if D.dim != self.m:
            raise ValueError(f"disk {D} is not a {self.m}-dimensional disk")
        if self.m == 2:
            problems = D.validate()
            if problems:
                raise ValueError(f"{D} is not a disk: " + "; ".join(problems))

    def form_sdr(self, D: Disk) -> Sdr:
        if D not in self._forms:
            self._check_disk(D)
            if self.m == 1:
                s = sdr_interval(D, None if D.bounded else self.omega_real())
                samples = _interval_samples(D, self.reference)
            else:
                s = sdr_region(D, self.budget, self.reference)
                samples = _region_samples(D, self.reference)
            if self.verify:
                samples = [w for w in samples if self._supported(w, D)]
                self._certify(f"forms {D}", s, samples)
            self._forms[D] = s
        return self._forms[D]

    def _supported(self, w, D: Disk) -> bool:
        if self.m == 1:
            return w.supported_in(D)
        from .forms2d import form_supported_in
        return form_supported_in(w, D)

    def _certify(self, name: str, s: Sdr, samples: Sequence, small_samples=None) -> None:
        report = verify_sdr(s, samples, small_samples)
        self.certificates[name] = {k: [str(v) for v in vals] for k, vals in report.items()}
        if report:
            raise SdrVerificationError(f"retract {name} fails {sorted(report)}")

    def generators(self) -> List[Chain]:
        return [generator(self.theory, k) for k in range(len(self.theory.labels))]

    def small_samples(self) -> List[Chain]:
        gens = self.generators()
        return gens + [a * b for a, b in itertools.combinations_with_replacement(gens, 2)]

    def sdr(self, D: Disk) -> Sdr:
        """The Sym-lift of the form retract of D, perturbed by the theory's small differential."""
        if D not in self._lifted:
            fs = self.form_sdr(D)
            theory = self.theory
            lifted = lift_sym(theory, fs, f"Sym({fs.name})")
            s = perturb(lifted, lambda c: perturbation(theory, c), small_samples=self.small_samples())
            if not s.meta["i_unchanged"]:
                raise SdrVerificationError(f"the perturbation does not annihilate i on {D}")
            if self.verify:
                self._certify(f"chains {D}", s, self._chain_samples(D))
            self._lifted[D] = s
        return self._lifted[D]

    def _chain_samples(self, D: Disk) -> List[Chain]:
        forms = _interval_samples(D, self.reference) if self.m == 1 else _region_samples(D, self.reference)
        forms = [w for w in forms if self._supported(w, D)]
        top = [w for w in forms if w.degree == self.m]
        low = [w for w in forms if w.degree == self.m - 1]
        n = len(self.theory.labels)
        a, b = 0, n - 1
        out = [factor_chain(self.theory, a, top[0])]
        if low:
            out.append(factor_chain(self.theory, b, low[0]) * factor_chain(self.theory, a, top[-1]))
            out.append(factor_chain(self.theory, a, low[0]) * factor_chain(self.theory, b, low[-1]))
        return [c for c in out if not c.is_zero()]

    @property
    def global_sdr(self) -> Sdr:
        return self.sdr(self.real)

    def improved(self, D: Disk) -> Sdr:
        if D not in self._improved:
            self._improved[D] = improve_locally_constant(self.sdr(D), self.global_sdr)
        return self._improved[D]

    def enlargements(self, D: Disk, count: int = 3) -> List[Disk]:
        """A chain of strictly larger disks around D, ending before R^m."""
        out = []
        if self.m == 1:
            for k in range(1, count + 1):
                out.append(Interval(D.a - k, D.b + 2 * k))
        else:
            boxes = D.boxes()
            x0, x1 = min(b[0] for b in boxes), max(b[1] for b in boxes)
            y0, y1 = min(b[2] for b in boxes), max(b[3] for b in boxes)
            for k in range(1, count + 1):
                out.append(DiskRegion.rectangle(x0 - k, x1 + k, y0 - k, y1 + 2 * k))
        return out


# -- tree evaluation ----------------------------------------------------------------

@dataclass
class TransferValue:
    value: Chain
    degree: Optional[int]
    expected_degree: Optional[int]
    vertices: int

    def degree_law_holds(self) -> bool:
        return self.value.is_zero() or self.expected_degree is None or self.degree == self.expected_degree

    def to_json(self, theory: ChainTheory) -> dict:
        return {"value": to_json(theory, self.value), "text": to_str(theory, self.value),
                "degree": self.degree, "expectedDegree": self.expected_degree, "vertices": self.vertices}


def _sign(n: int) -> int:
    return -1 if n % 2 else 1


def _parts(args: Sequence[Chain]) -> List[List[Tuple[int, Chain]]]:
    return [list(homogeneous_parts(a).items()) for a in args]


def _eval_homogeneous(ctx: TheoryContext, tree: PfaTree, spans, leaf_disks, args, improved: bool) -> Chain:
    blocks: List[List] = []
    for k, (D, a) in enumerate(zip(leaf_disks, args)):
        blocks.append([k, k + 1, ctx.sdr(D).i(a)])
    for v in reversed(range(tree.size)):
        s, e = spans[v]
        idx = [n for n, b in enumerate(blocks) if s <= b[0] and b[1] <= e]
        if idx:
            first, last = idx[0], idx[-1]
            chain = product(blocks[n][2] for n in idx)
        else:
            first = last = sum(1 for b in blocks if b[1] <= s)
            last -= 1
            chain = Chain.one()
        out_disk = tree.vertices[v].output
        if v == 0:
            chain = (ctx.global_sdr if improved else ctx.sdr(out_disk)).p(chain)
        else:
            left = sum(total_degree(blocks[n][2]) for n in range(first))
            h = (ctx.improved(out_disk) if improved else ctx.sdr(out_disk)).h
            chain = h(chain).scale(_sign(left))
        if chain.is_zero():
            return Chain()
        blocks[first:last + 1] = [[s, e, chain]]
    return blocks[0][2]


def eval_transfer(ctx: TheoryContext, tree: PfaTree, args: Sequence[Chain], improved: bool = True) -> TransferValue:
    """The transferred operation of tree on cohomology classes.

    improved=True uses (p~, i~, h~); otherwise the perturbed retracts of each
    disk, with the root projecting through its own output disk.
    """
    leaf_disks = tree.leaf_disks()
    if len(args) != len(leaf_disks):
        raise ValueError(f"tree has {len(leaf_disks)} free leaves but {len(args)} arguments were given")
    for v, op in enumerate(tree.vertices):
        problems = validate_operation(op)
        if problems:
            raise ValueError(f"vertex {v}: " + "; ".join(problems))
    spans = tree.spans()
    out = Chain()
    degrees = set()
    for combo in itertools.product(*_parts(args)):
        degrees.add(sum(d for d, _ in combo))
        out.iadd(_eval_homogeneous(ctx, tree, spans, leaf_disks, [c for _, c in combo], improved))
    expected = degrees.pop() + 1 - tree.size if len(degrees) == 1 else None
    value = TransferValue(out, total_degree(out), expected, tree.size)
    if not value.degree_law_holds():
        raise ArithmeticError(f"degree law violated on {tree}: got {value.degree}, expected {expected}")
    return value


def strict_mu(ctx: TheoryContext, op: PfaOperation, args: Sequence[Chain]) -> Chain:
    """The transferred strict structure map p^_{R^m} F(op) i."""
    if len(args) != op.arity:
        raise ValueError(f"operation of arity {op.arity} got {len(args)} arguments")
    return eval_transfer(ctx, corolla(op), args).value


def _insert_odd(ctx: TheoryContext, op: PfaOperation, before: Sequence[Chain], middle: Chain,
                after: Sequence[Chain]) -> Chain:
    """strict_mu(op)(before, middle, after) where middle came out of a degree -1 map.

    The map is moved past the earlier arguments, giving (-1)^(their degrees).
    """
    out = Chain()
    for combo in itertools.product(*_parts(before)):
        sign = _sign(sum(d for d, _ in combo))
        out.iadd(strict_mu(ctx, op, [c for _, c in combo] + [middle] + list(after)), sign)
    return out


Beta = Callable[[TheoryContext, PfaTree, Sequence[Chain]], Chain]


def massey_beta2(ctx: TheoryContext, tree: PfaTree, args: Sequence[Chain]) -> Chain:
    """Improved first-order Massey cocycle on a 2-vertex tree, by the difference formula.

    beta~(O, I) = beta^(O with output R^m, I) - mu_O(..., beta^(iota^{R^m}_{D_i}, I)(args_i), ...)
    """
    if tree.size != 2:
        raise ValueError(f"the first-order Massey cocycle lives on 2-vertex trees, got {tree.size} vertices")
    outer, inner = tree.vertices
    slot = tree.wiring[0][1]
    R = ctx.real
    full = two_vertex(PfaOperation(outer.inputs, R), slot, inner)
    first = eval_transfer(ctx, full, args, improved=False).value
    s, e = tree.spans()[1]
    lone = two_vertex(PfaOperation((inner.output,), R), 0, inner)
    middle = eval_transfer(ctx, lone, args[s:e], improved=False).value
    second = _insert_odd(ctx, outer, args[:s], middle, args[e:])
    return first - second


def massey_beta2_direct(ctx: TheoryContext, tree: PfaTree, args: Sequence[Chain]) -> Chain:
    """The same cocycle evaluated straight through the improved retracts."""
    if tree.size != 2:
        raise ValueError(f"the first-order Massey cocycle lives on 2-vertex trees, got {tree.size} vertices")
    return eval_transfer(ctx, tree, args, improved=True).value


def corrupted(beta: Beta, target: PfaTree) -> Beta:
    """beta with its sign flipped on one tree (a negative control)."""
    def wrapped(ctx, tree, args):
        value = beta(ctx, tree, args)
        return -value if tree == target else value
    return wrapped


# -- cocycle identities on 3-vertex trees ---------------------------------------------

@dataclass
class CocycleResidual:
    shape: str
    terms: Tuple[Chain, Chain, Chain, Chain]
    residual: Chain
    trees: Tuple[PfaTree, PfaTree, PfaTree, PfaTree]

    def vanishes(self) -> bool:
        return is_zero(self.residual)

    def control_tree(self) -> Optional[PfaTree]:
        """The 2-vertex tree of the first nonzero term; flipping beta there breaks the identity."""
        for term, tree in zip(self.terms, self.trees):
            if not is_zero(term):
                return tree
        return None


def _collapse(ctx: TheoryContext, op: PfaOperation, args: Sequence[Chain], span: Tuple[int, int]) -> List[Chain]:
    s, e = span
    return list(args[:s]) + [strict_mu(ctx, op, args[s:e])] + list(args[e:])


def cocycle_residual(ctx: TheoryContext, tree: PfaTree, args: Sequence[Chain],
                     beta: Beta = massey_beta2) -> CocycleResidual:
    """Left-minus-right residual of the cocycle identity on a 3-vertex tree.

    linear (mu3 on mu2 on mu1):
      beta(mu1, mu2 o mu3) - beta(mu1 o mu2, mu3) + mu1 beta(mu2, mu3) - beta(mu1, mu2) mu3
    branched (mu21 left of mu22 on mu1):
      beta(mu1 o mu22, mu21) - beta(mu1 o mu21, mu22) + beta(mu1, mu22) mu21 - beta(mu1, mu21) mu22
    """
    if tree.size != 3:
        raise ValueError(f"cocycle identities are evaluated on 3-vertex trees, got {tree.size}")
    spans = tree.spans()
    mu1, mu2, mu3 = tree.vertices
    (p2, s2), (p3, s3) = tree.wiring
    if len(args) != len(tree.leaves()):
        raise ValueError("argument count does not match the free leaves")
    if p3 == 1:
        t1 = two_vertex(mu1, s2, infinitesimal_composite(mu2, s3, mu3))
        t2 = two_vertex(infinitesimal_composite(mu1, s2, mu2), s2 + s3, mu3)
        t3, t4 = two_vertex(mu2, s3, mu3), two_vertex(mu1, s2, mu2)
        T1 = beta(ctx, t1, args)
        T2 = beta(ctx, t2, args)
        s, e = spans[1]
        T3 = _insert_odd(ctx, mu1, args[:s], beta(ctx, t3, args[s:e]), args[e:])
        T4 = beta(ctx, t4, _collapse(ctx, mu3, args, spans[2]))
        shape = "linear"
    else:
        if not s2 < s3:
            raise ValueError("branched trees list the left child first")
        t1 = two_vertex(infinitesimal_composite(mu1, s3, mu3), s2, mu2)
        t2 = two_vertex(infinitesimal_composite(mu1, s2, mu2), s3 + mu2.arity - 1, mu3)
        t3, t4 = two_vertex(mu1, s3, mu3), two_vertex(mu1, s2, mu2)
        T1 = beta(ctx, t1, args)
        T2 = beta(ctx, t2, args)
        T3 = beta(ctx, t3, _collapse(ctx, mu2, args, spans[1]))
        T4 = beta(ctx, t4, _collapse(ctx, mu3, args, spans[2]))
        shape = "branched"
    residual = T1 - T2 + T3 - T4
    return CocycleResidual(shape, (T1, T2, T3, T4), residual, (t1, t2, t3, t4))


# -- gauge transformations ------------------------------------------------------------

Chi = Callable[[TheoryContext, PfaOperation, Sequence[Chain]], Chain]


def zero_chi(ctx: TheoryContext, op: PfaOperation, args: Sequence[Chain]) -> Chain:
    return Chain()


def gauge_transform(ctx: TheoryContext, tree: PfaTree, args: Sequence[Chain], chi: Chi,
                    beta: Beta = massey_beta2) -> Chain:
    """beta'(O, I) = beta(O, I) - chi(O o I) + chi(O) mu_I + mu_O chi(I)."""
    outer, inner = tree.vertices
    slot = tree.wiring[0][1]
    s, e = tree.spans()[1]
    out = beta(ctx, tree, args)
    out = out - chi(ctx, infinitesimal_composite(outer, slot, inner), args)
    out = out + chi(ctx, outer, _collapse(ctx, inner, args, (s, e)))
    ci = chi(ctx, inner, args[s:e])
    if not ci.is_zero():
        out = out + _insert_odd(ctx, outer, args[:s], ci, args[e:])
    return out


def fork_condition_residual(ctx: TheoryContext, chi: Chi, outer: Disk, middle: Disk,
                            inputs: Sequence[Disk], args: Sequence[Chain]) -> Chain:
    """chi(iota^{D'}_{D_}) - chi(iota^{D}_{D_}) - chi(iota^{D'}_{D}) mu_{D_} on one fork."""
    big = PfaOperation(tuple(inputs), outer)
    small = PfaOperation(tuple(inputs), middle)
    link = PfaOperation((middle,), outer)
    return chi(ctx, big, args) - chi(ctx, small, args) - chi(ctx, link, [strict_mu(ctx, small, args)])


# -- the L-invariant -----------------------------------------------------------------

@dataclass(frozen=True)
class LConfiguration:
    """Two disks D1, D2 joined by an upper disk Du and a lower disk Dd around a middle disk."""

    D1: DiskRegion
    D2: DiskRegion
    Dtilde: DiskRegion
    Du: DiskRegion
    Dd: DiskRegion
    D: DiskRegion = field(default_factory=DiskRegion.plane)
    name: str = "custom"

    def disks(self) -> Dict[str, DiskRegion]:
        return {"D1": self.D1, "D2": self.D2, "Dtilde": self.Dtilde, "Du": self.Du, "Dd": self.Dd, "D": self.D}

    def validate(self) -> List[str]:
        problems = []
        for name, R in self.disks().items():
            problems += [f"{name}: {p}" for p in R.validate()]
            if name != "D" and not self.D.contains(R):
                problems.append(f"{name} is not contained in D")
        for small in ("D1", "D2"):
            for big in ("Du", "Dd"):
                if not getattr(self, big).contains(getattr(self, small)):
                    problems.append(f"{small} is not contained in {big}")
        if not self.D1.disjoint(self.D2):
            problems.append("D1 and D2 overlap")
        for big in ("Du", "Dd"):
            if not getattr(self, big).disjoint(self.Dtilde):
                problems.append(f"{big} meets Dtilde")
        problems += self._annulus_problems()
        return problems

    def _annulus_problems(self) -> List[str]:
        boxes_u, boxes_d, boxes_t = self.Du.boxes(), self.Dd.boxes(), self.Dtilde.boxes()
        everything = boxes_u + boxes_d + boxes_t
        xs = sorted({v for b in everything for v in b[:2]})
        ys = sorted({v for b in everything for v in b[2:]})

        def covered(boxes, i, j):
            x0, x1, y0, y1 = xs[i], xs[i + 1], ys[j], ys[j + 1]
            return any(b[0] <= x0 and x1 <= b[1] and b[2] <= y0 and y1 <= b[3] for b in boxes)

        nx, ny = len(xs) - 1, len(ys) - 1
        ring = {(i, j) for i in range(nx) for j in range(ny) if covered(boxes_u + boxes_d, i, j)}
        middle = {(i, j) for i in range(nx) for j in range(ny) if covered(boxes_t, i, j)}
        problems = []
        chi = euler_characteristic(ring)
        if chi != 0:
            problems.append(f"Du and Dd do not form an annulus (Euler characteristic {chi})")
        # cells reachable from outside the bounding box without crossing Du or Dd
        seen = {(-1, -1)}
        stack = [(-1, -1)]
        while stack:
            i, j = stack.pop()
            for n in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)):
                if -1 <= n[0] <= nx and -1 <= n[1] <= ny and n not in ring and n not in seen:
                    seen.add(n)
                    stack.append(n)
        if middle & seen:
            problems.append("Dtilde is not enclosed by the annulus Du u Dd")
        return problems

    def to_json(self) -> dict:
        return {"name": self.name, **{k: v.to_json() for k, v in self.disks().items()}}

    @classmethod
    def from_json(cls, d: Mapping) -> "LConfiguration":
        keys = ("D1", "D2", "Dtilde", "Du", "Dd")
        kw = {k: DiskRegion.from_json(d[k]) for k in keys}
        if "D" in d:
            kw["D"] = DiskRegion.from_json(d["D"])
        return cls(name=str(d.get("name", "custom")), **kw)


def default_configuration() -> LConfiguration:
    """7x3 unit grid; Du is the lower bar plus the side blocks, Dd its mirror image.

    The loop D1 -> Du -> D2 -> Dd -> D1 then runs counterclockwise, which is
    the orientation in which L is the bracket itself (see winding_number).
    """
    sides = [(i, 1) for i in (0, 1, 2, 4, 5, 6)]
    return LConfiguration(
        D1=DiskRegion.rectangle(1, 2, 1, 2), D2=DiskRegion.rectangle(5, 6, 1, 2),
        Dtilde=DiskRegion.rectangle(3, 4, 1, 2),
        Du=DiskRegion.polyomino([(i, 0) for i in range(7)] + sides),
        Dd=DiskRegion.polyomino([(i, 2) for i in range(7)] + sides),
        name="default")


def second_configuration() -> LConfiguration:
    """9x5 unit grid with two-cell-thick bars, same orientation as the default."""
    sides = [(i, 2) for i in (0, 1, 2, 3, 5, 6, 7, 8)]
    return LConfiguration(
        D1=DiskRegion.rectangle(1, 2, 2, 3), D2=DiskRegion.rectangle(7, 8, 2, 3),
        Dtilde=DiskRegion.rectangle(4, 5, 2, 3),
        Du=DiskRegion.polyomino([(i, j) for i in range(9) for j in (0, 1)] + sides),
        Dd=DiskRegion.polyomino([(i, j) for i in range(9) for j in (3, 4)] + sides),
        name="second")


def clockwise_configuration() -> LConfiguration:
    """The default grid with Du on top, so D1 travels clockwise around Dtilde."""
    c = default_configuration()
    return LConfiguration(c.D1, c.D2, c.Dtilde, Du=c.Dd, Dd=c.Du, name="clockwise")


CONFIGURATIONS = {"default": default_configuration, "second": second_configuration,
                  "clockwise": clockwise_configuration}


def configuration(name: str) -> LConfiguration:
    if name not in CONFIGURATIONS:
        raise ValueError(f"unknown configuration {name!r}; choose from {sorted(CONFIGURATIONS)}")
    return CONFIGURATIONS[name]()


def winding_function(ctx: TheoryContext, config: LConfiguration):
    """g = h1_{R^2}(beta_u - beta_d) with beta_x = h2_{D_x}(omega_D1 - omega_D2), unsigned homotopies.

    g is locally constant off Du u Dd; its value on Dtilde is +1 when the loop
    D1 -> Du -> D2 -> Dd -> D1 is counterclockwise and -1 when clockwise.
    """
    from .forms2d import h_unsigned_plane
    if ctx.m != 2:
        raise ValueError("the winding function lives in dimension 2")
    diff = ctx.form_sdr(config.D1).i(1) - ctx.form_sdr(config.D2).i(1)
    beta_u = -ctx.form_sdr(config.Du).h(diff)
    beta_d = -ctx.form_sdr(config.Dd).h(diff)
    return h_unsigned_plane(*ctx.reference, beta_u - beta_d)


def winding_number(ctx: TheoryContext, config: LConfiguration) -> Fraction:
    """The integral of the winding function against omega_Dtilde."""
    from .forms2d import integrate2, wedge2
    g = winding_function(ctx, config)
    return integrate2(wedge2(g, ctx.form_sdr(config.Dtilde).i(1)))


def l_trees(config: LConfiguration) -> List[Tuple[int, PfaTree]]:
    """The four signed trees of L, with the D1/D2 leaf first and Dtilde second."""
    out = []
    for sign, bar, small in ((1, config.Du, config.D1), (-1, config.Du, config.D2),
                             (1, config.Dd, config.D2), (-1, config.Dd, config.D1)):
        out.append((sign, two_vertex(PfaOperation((bar, config.Dtilde), config.D), 0,
                                     PfaOperation((small,), bar))))
    return out


def l_invariant(ctx: TheoryContext, config: LConfiguration, a: Chain, b: Chain,
                beta: Beta = massey_beta2) -> Chain:
    problems = config.validate()
    if problems:
        raise ValueError("invalid L configuration: " + "; ".join(problems))
    out = Chain()
    for sign, tree in l_trees(config):
        out.iadd(beta(ctx, tree, [a, b]), sign)
    return out


# -- degree counting ------------------------------------------------------------------

def _closure(start: set, m: int, internal: bool) -> set:
    """Reachable form-degree deficits under h (+1) and the perturbation (-m, needs >= m).

    Internal edges apply h (delta h)^j; the root applies (delta h)^j before p.
    """
    seen = set()
    frontier = {s + 1 for s in start} if internal else set(start)
    while frontier:
        seen |= frontier
        nxt = set()
        for s in frontier:
            t = s if internal else s + 1
            if t >= m:
                u = t - m + (1 if internal else 0)
                if u not in seen:
                    nxt.add(u)
        frontier = nxt
    return seen


def degree_vanishing(m: int, tree: PfaTree) -> bool:
    """True when every term of the transfer expansion of tree is killed by form degrees.

    Leaves start with top forms (deficit 0); multiplying adds deficits and
    the projection needs deficit 0.  The improvement term i p h resets a
    block to deficit 0 when its projection can be nonzero.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    spans = tree.spans()
    blocks: List[Tuple[int, int, set]] = [(k, k + 1, {0}) for k in range(len(tree.leaves()))]
    for v in reversed(range(tree.size)):
        s, e = spans[v]
        inside = [b for b in blocks if s <= b[0] and b[1] <= e]
        total = {0}
        for b in inside:
            total = {x + y for x in total for y in b[2]}
        if v == 0:
            return 0 not in _closure(total, m, internal=False)
        reach = _closure(total, m, internal=True)
        if 0 in _closure(reach, m, internal=False):
            reach = reach | {0}
        rest = [b for b in blocks if not (s <= b[0] and b[1] <= e)]
        blocks = sorted(rest + [(s, e, reach)], key=lambda b: (b[0], b[1]))
    return True


# -- shipped instances and Poisson certificates ------------------------------------------

def standard_fork() -> PfaTree:
    from .pfa_trees import standard_trees
    return standard_trees("fork", {
        "outer": DiskRegion.rectangle(-1, 9, -1, 4), "middle": DiskRegion.rectangle(0, 6, 0, 3),
        "inner": (DiskRegion.rectangle(1, 2, 1, 2), DiskRegion.rectangle(4, 5, 1, 2))})


def standard_linear_tree() -> PfaTree:
    R = DiskRegion.rectangle
    return PfaTree((PfaOperation((R(-1, 6, -1, 4), R(7, 8, 1, 2)), DiskRegion.plane()),
                    PfaOperation((R(0, 3, 0, 3), R(4, 5, 1, 2)), R(-1, 6, -1, 4)),
                    PfaOperation((R(1, 2, 1, 2),), R(0, 3, 0, 3))), ((0, 0), (1, 0)))


def standard_branched_tree() -> PfaTree:
    R = DiskRegion.rectangle
    return PfaTree((PfaOperation((R(0, 5, 0, 3), R(6, 9, 0, 3)), DiskRegion.plane()),
                    PfaOperation((R(1, 2, 1, 2), R(3, 4, 1, 2)), R(0, 5, 0, 3)),
                    PfaOperation((R(7, 8, 1, 2),), R(6, 9, 0, 3))), ((0, 0), (0, 1)))


def standard_cocycle_trees(gens: Sequence[Chain]) -> List[Tuple[PfaTree, List[Chain]]]:
    """The two 3-vertex shapes with arguments built from the generators."""
    a, b = gens[0], gens[1 % len(gens)]
    c = gens[-1]
    return [(standard_linear_tree(), [a * b, b, a]),
            (standard_linear_tree(), [a, c, b]),
            (standard_branched_tree(), [a, b, a]),
            (standard_branched_tree(), [b, c, a])]


def poisson_residuals(L: Callable[[Chain, Chain], Chain], theory: ChainTheory,
                      monomials: Sequence[Chain], gens: Sequence[Chain]) -> Dict[str, List[str]]:
    """Failures of symmetry, the derivation rule and Jacobi for a degree -1 bracket L.

    symmetry:   L(a, b) = (-1)^(|a||b|) L(b, a)
    derivation: L(a, bc) = L(a, b) c + (-1)^(|b|(|a|+1)) b L(a, c)
    Jacobi:     sum over cyclic rotations (x, y, z) of (a, b, c), with the Koszul sign of
                the rotation, of (-1)^|x| L(x, L(y, z)) = 0
    """
    memo: Dict[tuple, Chain] = {}

    def LL(a: Chain, b: Chain) -> Chain:
        if a.is_zero() or b.is_zero():
            return Chain()
        key = (frozenset(a.terms.items()), frozenset(b.terms.items()))
        if key not in memo:
            memo[key] = L(a, b)
        return memo[key]

    def deg(c: Chain) -> int:
        return total_degree(c) or 0

    out: Dict[str, List[str]] = {"symmetry": [], "derivation": [], "Jacobi": []}
    for a in monomials:
        for b in monomials:
            r = LL(a, b) - LL(b, a).scale(_sign(deg(a) * deg(b)))
            if not is_zero(r):
                out["symmetry"].append(f"({to_str(theory, a)}, {to_str(theory, b)})")
    for a in monomials:
        for b in gens:
            for c in monomials:
                bc = b * c
                if bc.is_zero():
                    continue
                r = LL(a, bc) - LL(a, b) * c - (b * LL(a, c)).scale(_sign(deg(b) * (deg(a) + 1)))
                if not is_zero(r):
                    out["derivation"].append(f"({to_str(theory, a)}, {to_str(theory, b)}, {to_str(theory, c)})")
    for a in gens:
        for b in monomials:
            for c in gens:
                da, db, dc = deg(a), deg(b), deg(c)
                total = Chain()
                for (x, y, z), eps in (((a, b, c), 0), ((c, a, b), dc * (da + db)), ((b, c, a), da * (db + dc))):
                    total.iadd(LL(x, LL(y, z)), _sign(eps + deg(x)))
                if not is_zero(total):
                    out["Jacobi"].append(f"({to_str(theory, a)}, {to_str(theory, b)}, {to_str(theory, c)})")
    return out


def _row(rng: random.Random, k: int, x0: int, y0: int) -> Tuple[List[DiskRegion], int]:
    """k disjoint rectangles of height 1 or 2 along a row starting at x0; returns them and the next free x."""
    out = []
    x = x0
    for _ in range(k):
        w, h = rng.randint(1, 2), rng.randint(1, 2)
        out.append(DiskRegion.rectangle(x, x + w, y0, y0 + h))
        x += w + rng.randint(1, 2)
    return out, x


def _hull(disks: Sequence[DiskRegion], margin: int) -> DiskRegion:
    boxes = [b for D in disks for b in D.boxes()]
    return DiskRegion.rectangle(min(b[0] for b in boxes) - margin, max(b[1] for b in boxes) + margin,
                                min(b[2] for b in boxes) - margin, max(b[3] for b in boxes) + margin)


def _shuffled(rng: random.Random, items: Sequence, keep_first_before: Optional[Tuple[int, int]] = None) -> List:
    items = list(items)
    while True:
        order = list(items)
        rng.shuffle(order)
        if keep_first_before is None:
            return order
        a, b = keep_first_before
        if order.index(items[a]) < order.index(items[b]):
            return order


def random_cocycle_instance(rng: random.Random, gens: Sequence[Chain],
                            shape: Optional[str] = None) -> Tuple[PfaTree, List[Chain]]:
    """A random 3-vertex tree of rectangles in the plane with random generator-monomial arguments."""
    shape = shape or rng.choice(["linear", "branched"])
    plane = DiskRegion.plane()
    if shape == "linear":
        leaves3, x = _row(rng, rng.randint(1, 2), 2, 2)
        B2 = _hull(leaves3, 1)
        extra2, x = _row(rng, rng.randint(0, 1), x + 1, 2)
        B1 = _hull([B2] + extra2, 1)
        extra1, _ = _row(rng, rng.randint(0, 1), x + 2, 2)
        mu3 = PfaOperation(tuple(_shuffled(rng, leaves3)), B2)
        mu2 = PfaOperation(tuple(_shuffled(rng, [B2] + extra2)), B1)
        mu1 = PfaOperation(tuple(_shuffled(rng, [B1] + extra1)), plane)
        tree = PfaTree((mu1, mu2, mu3), ((0, mu1.inputs.index(B1)), (1, mu2.inputs.index(B2))))
    else:
        left, x = _row(rng, rng.randint(1, 2), 2, 2)
        right, x = _row(rng, rng.randint(1, 2), x + 2, 2)
        B21, B22 = _hull(left, 1), _hull(right, 1)
        extra, _ = _row(rng, rng.randint(0, 1), x + 2, 2)
        mu21 = PfaOperation(tuple(_shuffled(rng, left)), B21)
        mu22 = PfaOperation(tuple(_shuffled(rng, right)), B22)
        top = _shuffled(rng, [B21, B22] + extra, keep_first_before=(0, 1))
        mu1 = PfaOperation(tuple(top), plane)
        tree = PfaTree((mu1, mu21, mu22), ((0, top.index(B21)), (0, top.index(B22))))
    pool = list(gens) + [a * b for a, b in itertools.combinations_with_replacement(gens, 2)]
    pool = [c for c in pool if not c.is_zero()]
    args = [rng.choice(pool) for _ in tree.leaves()]
    return tree, args
