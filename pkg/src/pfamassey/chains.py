"""Graded symmetric algebras with Koszul signs.

A generator is ``label (x) form``: for the envelope theories the label is a
Lie algebra basis index and the form sits in Omega_c[1]; for Chern-Simons the
label is the circle part (0 for 1, 1 for theta) and the form sits in
Omega_c[2].  Cohomology generators carry ``form=None``.  Forms are stored with
leading coefficient 1; the scalar lives in the monomial coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .exact_core import ColumnEchelon, as_rational, rational_str
from .forms1d import Form1D, d1, integrate1, wedge1
from .forms2d import Form2D, d2, integrate2, wedge2
from .lie import LieAlgebra

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True, eq=False)
class ChainTheory:
    """Which symmetric algebra we are in: envelope (shift 1) or Chern-Simons (shift 2)."""

    kind: str
    m: int
    lie: Optional[LieAlgebra] = None

    def __post_init__(self):
        if self.kind not in ("envelope", "chernSimons"):
            raise ValueError(f"unknown theory kind {self.kind!r}")
        if self.kind == "envelope" and self.lie is None:
            raise ValueError("an envelope theory needs a Lie algebra")
        if self.kind == "chernSimons" and self.m != 2:
            raise ValueError("the compactified Chern-Simons theory lives on R^2")
        if self.m not in (1, 2):
            raise ValueError("forms are available in dimensions 1 and 2")

    @property
    def shift(self) -> int:
        return 1 if self.kind == "envelope" else 2

    @property
    def labels(self) -> Tuple[str, ...]:
        if self.kind == "envelope":
            return self.lie.basis_names
        return ("[1]", "[θ]")

    def circle_degree(self, label: int) -> int:
        return label if self.kind == "chernSimons" else 0

    def degree(self, label: int, form) -> int:
        form_degree = self.m if form is None else form.degree
        return form_degree - self.shift + self.circle_degree(label)

    # form operations in the ambient dimension
    def d(self, w):
        return d1(w) if self.m == 1 else d2(w)

    def wedge(self, a, b):
        return wedge1(a, b) if self.m == 1 else wedge2(a, b)

    def integrate(self, w) -> Fraction:
        if self.m == 1:
            return integrate1(w) if w.degree == 1 else ZERO
        return integrate2(w)


class Factor:
    """One generator of the symmetric algebra; compared by its sort key."""

    __slots__ = ("label", "form", "degree", "skey", "_hash")

    def __init__(self, label: int, form, degree: int):
        self.label = label
        self.form = form
        self.degree = degree
        self.skey = (degree, label, () if form is None else form.key())
        self._hash = hash(self.skey)

    def __eq__(self, other) -> bool:
        return self.skey == other.skey

    def __lt__(self, other) -> bool:
        return self.skey < other.skey

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Factor({self.label}, {self.form!r}, deg={self.degree})"


Monomial = Tuple[Factor, ...]


def make_factor(theory: ChainTheory, label: int, form) -> Optional[Tuple[Fraction, Factor]]:
    """(scalar, normalized factor) for label (x) form, or None when the form vanishes."""
    if form is None:
        return ONE, Factor(label, None, theory.degree(label, None))
    if form.is_zero():
        return None
    lead = form.leading()
    if lead != 1:
        form = form.scale(1 / lead)
    return lead, Factor(label, form, theory.degree(label, form))


def koszul_sort(factors: Sequence[Factor]) -> Tuple[int, Optional[Monomial]]:
    """Sort factors; returns (sign, sorted tuple) or (0, None) for a repeated odd factor."""
    n = len(factors)
    if n < 2:
        return 1, tuple(factors)
    order = sorted(range(n), key=lambda k: factors[k].skey)
    odd = [k for k in order if factors[k].degree % 2]
    inversions = 0
    for a in range(len(odd)):
        for b in range(a + 1, len(odd)):
            if odd[a] > odd[b]:
                inversions += 1
    out = tuple(factors[k] for k in order)
    for a in range(n - 1):
        if out[a].degree % 2 and out[a] == out[a + 1]:
            return 0, None
    return (-1 if inversions % 2 else 1), out


class Chain:
    """A Q-linear combination of normalized monomials."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[Monomial, Fraction]] = None):
        self.terms: Dict[Monomial, Fraction] = {}
        if terms:
            for mono, c in terms.items():
                if c:
                    self.terms[mono] = as_rational(c)

    @classmethod
    def one(cls) -> "Chain":
        return cls({(): ONE})

    @classmethod
    def zero(cls) -> "Chain":
        return cls()

    @classmethod
    def from_factors(cls, factors: Sequence[Factor], coef=ONE) -> "Chain":
        out = cls()
        out._add_raw(list(factors), as_rational(coef))
        return out

    def _add_raw(self, factors: List[Factor], coef: Fraction) -> None:
        if not coef:
            return
        sign, mono = koszul_sort(factors)
        if not sign:
            return
        v = self.terms.get(mono, ZERO) + sign * coef
        if v:
            self.terms[mono] = v
        else:
            self.terms.pop(mono, None)

    def copy(self) -> "Chain":
        out = Chain()
        out.terms = dict(self.terms)
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __iter__(self) -> Iterator[Tuple[Monomial, Fraction]]:
        return iter(sorted(self.terms.items(), key=lambda t: _mono_key(t[0])))

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, Chain) and self.terms == other.terms

    def __hash__(self):
        raise TypeError("chains are mutable accumulators; compare with ==")

    def __repr__(self) -> str:
        return f"Chain({len(self.terms)} terms)"

    def iadd(self, other: "Chain", s: Fraction = ONE) -> "Chain":
        for mono, c in other.terms.items():
            v = self.terms.get(mono, ZERO) + s * c
            if v:
                self.terms[mono] = v
            else:
                self.terms.pop(mono, None)
        return self

    def __add__(self, other: "Chain") -> "Chain":
        return self.copy().iadd(other)

    def __sub__(self, other: "Chain") -> "Chain":
        return self.copy().iadd(other, -ONE)

    def __neg__(self) -> "Chain":
        return self.scale(-ONE)

    def scale(self, s) -> "Chain":
        s = as_rational(s)
        if not s:
            return Chain()
        out = Chain()
        out.terms = {m: c * s for m, c in self.terms.items()}
        return out

    def __rmul__(self, s) -> "Chain":
        return self.scale(s)

    def __mul__(self, other: "Chain") -> "Chain":
        return multiply(self, other)

    def sym_degrees(self) -> set:
        return {len(m) for m in self.terms}

    def max_sym_degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)


def _mono_key(mono: Monomial):
    return (len(mono), tuple(f.skey for f in mono))


def monomial_degree(mono: Monomial) -> int:
    return sum(f.degree for f in mono)


def multiply(a: Chain, b: Chain) -> Chain:
    out = Chain()
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            out._add_raw(list(ma) + list(mb), ca * cb)
    return out


def product(chains: Iterable[Chain]) -> Chain:
    out = Chain.one()
    for c in chains:
        out = multiply(out, c)
    return out


def total_degree(c: Chain) -> Optional[int]:
    degrees = {monomial_degree(m) for m in c.terms}
    return degrees.pop() if len(degrees) == 1 else None


def homogeneous_parts(c: Chain) -> Dict[int, Chain]:
    parts: Dict[int, Chain] = {}
    for mono, coef in c.terms.items():
        parts.setdefault(monomial_degree(mono), Chain()).terms[mono] = coef
    return dict(sorted(parts.items()))


def factor_chain(theory: ChainTheory, label: int, form, coef=ONE) -> Chain:
    made = make_factor(theory, label, form)
    if made is None:
        return Chain()
    s, f = made
    return Chain({(f,): s * as_rational(coef)})


def lie_factor(theory: ChainTheory, coords: Sequence, form) -> Chain:
    """X (x) form for a Lie element X given by coordinates."""
    out = Chain()
    for k, c in enumerate(coords):
        if c:
            out.iadd(factor_chain(theory, k, form, c))
    return out


def generator(theory: ChainTheory, label: int) -> Chain:
    """A cohomology generator: Lie basis element, or [1] / [θ]."""
    return factor_chain(theory, label, None)


def generator_monomial(theory: ChainTheory, labels: Sequence[int], coef=ONE) -> Chain:
    return Chain.from_factors([make_factor(theory, l, None)[1] for l in labels], coef)


def lie_generator(theory: ChainTheory, coords: Sequence) -> Chain:
    return lie_factor(theory, coords, None)


def replace_factor(mono: Monomial, k: int, new: Chain, coef: Fraction, out: Chain) -> None:
    """Add coef * (mono with factor k replaced by the single-factor chain new) to out."""
    for nm, nc in new.terms.items():
        out._add_raw(list(mono[:k]) + list(nm) + list(mono[k + 1:]), coef * nc)


# -- differentials ------------------------------------------------------------

def d_factor(theory: ChainTheory, f: Factor) -> Chain:
    """Shifted de Rham differential on one generator: (-1)^shift d."""
    if f.form is None:
        return Chain()
    s = -ONE if theory.shift % 2 else ONE
    return factor_chain(theory, f.label, theory.d(f.form), s)


def d_dr_shifted(theory: ChainTheory, c: Chain) -> Chain:
    out = Chain()
    for mono, coef in c.terms.items():
        left = 0
        for k, f in enumerate(mono):
            df = d_factor(theory, f)
            if df:
                replace_factor(mono, k, df, -coef if left % 2 else coef, out)
            left += f.degree
    return out


def _front_sign(mono: Monomial, i: int, j: int) -> int:
    """Koszul sign of moving factors i < j to the front (in that order)."""
    di, dj = mono[i].degree, mono[j].degree
    before_i = sum(f.degree for f in mono[:i])
    between = sum(f.degree for f in mono[:j]) - di
    return -1 if (di * before_i + dj * between) % 2 else 1


def d_ce(theory: ChainTheory, c: Chain) -> Chain:
    if theory.kind != "envelope":
        raise TypeError("the Chevalley-Eilenberg differential belongs to envelope theories")
    g = theory.lie
    out = Chain()
    for mono, coef in c.terms.items():
        n = len(mono)
        for i in range(n):
            fi = mono[i]
            if fi.form is None:
                continue
            for j in range(i + 1, n):
                fj = mono[j]
                if fj.form is None or fi.form.degree + fj.form.degree > theory.m:
                    continue
                br = g.bracket_basis(fi.label, fj.label)
                if not br:
                    continue
                w = theory.wedge(fi.form, fj.form)
                if w.is_zero():
                    continue
                sign = _front_sign(mono, i, j) * (-1 if fi.form.degree % 2 else 1)
                rest = [mono[a] for a in range(n) if a != i and a != j]
                for k, ck in br.items():
                    made = make_factor(theory, k, w)
                    if made:
                        s, f = made
                        out._add_raw([f] + rest, coef * sign * ck * s)
    return out


def circle_pairing(u: int, v: int) -> Fraction:
    """Integral over the circle of u ^ v on the model Lambda(theta)."""
    return ONE if u + v == 1 else ZERO


def bv_pairing(theory: ChainTheory, a: Factor, b: Factor) -> Fraction:
    """<alpha (x) u, beta (x) v> = (-1)^(|u||beta|) int alpha ^ beta * int u ^ v."""
    if a.form is None or b.form is None:
        return ZERO
    circ = circle_pairing(a.label, b.label)
    if not circ or a.form.degree + b.form.degree != theory.m:
        return ZERO
    val = theory.integrate(theory.wedge(a.form, b.form)) * circ
    if theory.circle_degree(a.label) * b.form.degree % 2:
        val = -val
    return val


def bv_laplacian(theory: ChainTheory, c: Chain) -> Chain:
    if theory.kind != "chernSimons":
        raise TypeError("the BV Laplacian belongs to the Chern-Simons theory")
    out = Chain()
    for mono, coef in c.terms.items():
        n = len(mono)
        for i in range(n):
            for j in range(i + 1, n):
                val = bv_pairing(theory, mono[i], mono[j])
                if val:
                    rest = [mono[a] for a in range(n) if a != i and a != j]
                    out._add_raw(rest, coef * val * _front_sign(mono, i, j))
    return out


def perturbation(theory: ChainTheory, c: Chain) -> Chain:
    """The theory's small perturbation of d_dR: d_CE or the BV Laplacian."""
    return d_ce(theory, c) if theory.kind == "envelope" else bv_laplacian(theory, c)


def d_total(theory: ChainTheory, c: Chain) -> Chain:
    return d_dr_shifted(theory, c) + perturbation(theory, c)


# -- exact zero testing --------------------------------------------------------

def _form_vector(w, xs, ys) -> Dict[tuple, Fraction]:
    vec: Dict[tuple, Fraction] = {}
    if isinstance(w, Form1D):
        for j, piece in enumerate(w.coeff.on_knots(xs)):
            for e, c in enumerate(piece):
                if c:
                    vec[(j, e)] = c
        if w.coeff.tail:
            vec[("tail",)] = w.coeff.tail
        return vec
    for comp, cp in enumerate(w.comps):
        for (i, j), p in cp.refine(xs, ys).items():
            for (a, b), c in p.items():
                if c:
                    vec[(comp, i, j, a, b)] = c
    return vec


def _knots(w):
    if isinstance(w, Form1D):
        return set(w.coeff.knots), set()
    xs, ys = set(), set()
    for cp in w.comps:
        xs.update(cp.xs)
        ys.update(cp.ys)
    return xs, ys


def canonicalize(c: Chain) -> Chain:
    """Rewrite every factor form in a basis of the forms occurring, then expand.

    Two chains are equal as elements of the symmetric algebra exactly when
    their canonicalized difference is empty.
    """
    forms = {}
    for mono in c.terms:
        for f in mono:
            if f.form is not None:
                forms.setdefault(f.form.degree, {})[f.form.key()] = f.form
    rewrite: Dict[tuple, List[Tuple[Fraction, object]]] = {}
    for deg, group in forms.items():
        ordered = [group[k] for k in sorted(group)]
        xs, ys = set(), set()
        for w in ordered:
            a, b = _knots(w)
            xs |= a
            ys |= b
        xs, ys = sorted(xs), sorted(ys)
        rows: Dict[tuple, int] = {}
        cols = []
        for w in ordered:
            cols.append({rows.setdefault(k, len(rows)): v for k, v in _form_vector(w, xs, ys).items()})
        ech = ColumnEchelon(len(rows), cols)
        for idx, w in enumerate(ordered):
            sol = ech.solve(cols[idx])
            rewrite[w.key()] = [(v, ordered[k]) for k, v in sorted(sol.items())]
    out = Chain()
    for mono, coef in c.terms.items():
        partial: List[Tuple[List[Factor], Fraction]] = [([], coef)]
        for f in mono:
            if f.form is None:
                partial = [(fs + [f], cf) for fs, cf in partial]
                continue
            nxt = []
            for v, w in rewrite[f.form.key()]:
                g = Factor(f.label, w, f.degree)
                for fs, cf in partial:
                    nxt.append((fs + [g], cf * v))
            partial = nxt
        for fs, cf in partial:
            out._add_raw(fs, cf)
    return out


def chains_equal(a: Chain, b: Chain) -> bool:
    return canonicalize(a - b).is_zero()


def is_zero(c: Chain) -> bool:
    return c.is_zero() or canonicalize(c).is_zero()


# -- presentation ---------------------------------------------------------------

def _coef_str(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def monomial_str(theory: ChainTheory, mono: Monomial) -> str:
    if not mono:
        return "1"
    parts = []
    k = 0
    while k < len(mono):
        f = mono[k]
        run = 1
        while k + run < len(mono) and mono[k + run] == f:
            run += 1
        name = theory.labels[f.label]
        if f.form is not None:
            name = f"{name}⊗ω{f.form.degree}"
        parts.append(name if run == 1 else f"{name}^{run}")
        k += run
    return " ".join(parts)


def to_str(theory: ChainTheory, c: Chain) -> str:
    if c.is_zero():
        return "0"
    out = []
    for mono, coef in c:
        m = monomial_str(theory, mono)
        if m == "1":
            out.append(_coef_str(coef))
        elif coef == 1:
            out.append(m)
        elif coef == -1:
            out.append(f"-{m}")
        else:
            out.append(f"{_coef_str(coef)} {m}")
    return " + ".join(out).replace("+ -", "- ")


def to_json(theory: ChainTheory, c: Chain) -> list:
    out = []
    for mono, coef in c:
        factors = []
        for f in mono:
            entry = {"degree": f.degree}
            if theory.kind == "envelope":
                entry["lieCoords"] = [rational_str(Fraction(int(k == f.label))) for k in range(theory.lie.dim)]
                entry["lieBasis"] = theory.labels[f.label]
            else:
                entry["circlePart"] = "1" if f.label == 0 else "θ"
            entry["form"] = None if f.form is None else f.form.to_json()
            factors.append(entry)
        out.append({"coefficient": rational_str(coef), "factors": factors})
    return out


def from_json(theory: ChainTheory, data: list) -> Chain:
    out = Chain()
    for term in data:
        factors = []
        coef = as_rational(term["coefficient"])
        for entry in term["factors"]:
            if theory.kind == "envelope":
                coords = [as_rational(v) for v in entry["lieCoords"]]
                (label,) = [k for k, v in enumerate(coords) if v]
                coef *= coords[label]
            else:
                label = 0 if entry["circlePart"] == "1" else 1
            form = entry["form"]
            if form is not None:
                form = Form1D.from_json(form) if theory.m == 1 else Form2D.from_json(form)
            s, f = make_factor(theory, label, form)
            coef *= s
            factors.append(f)
        out._add_raw(factors, coef)
    return out
