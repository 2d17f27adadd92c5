"""Factorization envelopes of a Lie algebra on R and R^2.

Chains are Sym(g (x) Omega_c[1]) with d_dR[1] + d_CE; cohomology is Sym(g)
with generators in degree 0 (m = 1) or Sym(g[-1]) with generators in degree
1 (m = 2).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .chains import (Chain, ChainTheory, d_total, factor_chain, generator, generator_monomial, is_zero,
                     lie_generator, monomial_degree)
from .exact_core import bernoulli, binomial
from .forms1d import Form1D, Interval, bump1, indefinite_integral, integrate1, wedge1
from .forms2d import HomotopyBudget, h_unsigned_plane, integrate2, wedge2
from .lie import LieAlgebra, ad_power
from .pfa_trees import PfaOperation, PfaTree
from .transfer_massey import Chi, TheoryContext, strict_mu

ONE = Fraction(1)


@dataclass
class EnvelopeTheory:
    lie: LieAlgebra
    m: int
    ctx: TheoryContext
    certificates: Dict[str, bool] = field(default_factory=dict)

    @property
    def theory(self) -> ChainTheory:
        return self.ctx.theory

    def generators(self) -> List[Chain]:
        return self.ctx.generators()

    def bracket(self, a: Chain, b: Chain) -> Chain:
        return shifted_bracket(self.lie, a, b, self.theory)


def d_total_samples(ctx: TheoryContext) -> List[Chain]:
    """Chains with forms on R^m, long enough for d_CE and d_dR to interact."""
    forms = ctx._chain_samples(ctx.real)
    th = ctx.theory
    n = len(th.labels)
    out = list(forms)
    if len(forms) >= 2:
        out.append(forms[0] * forms[1])
    if n >= 2 and forms:
        out.append(generator(th, 1) * forms[-1])
    return out


def build_envelope(lie: LieAlgebra, m: int = 2, budget: HomotopyBudget = HomotopyBudget(),
                   reference=None, verify: bool = True) -> EnvelopeTheory:
    if m not in (1, 2):
        raise ValueError("envelopes are built on R and R^2; use degree_vanishing for m >= 3")
    th = ChainTheory("envelope", m, lie)
    ctx = TheoryContext(th, budget, reference, verify)
    env = EnvelopeTheory(lie, m, ctx)
    ok = all(is_zero(d_total(th, d_total(th, c))) for c in d_total_samples(ctx))
    env.certificates["d_total^2 = 0"] = ok
    if not ok:
        raise ArithmeticError("d_total does not square to zero")
    return env


# -- the Gutt star-product ---------------------------------------------------------

def _sym1(g: LieAlgebra) -> ChainTheory:
    return ChainTheory("envelope", 1, g)


def gutt_closed(g: LieAlgebra, n: int, x: Sequence, y: Sequence) -> Chain:
    """X^n * Y = sum_j (-1)^j C(n, j) B_j X^(n-j) ad_X^j(Y) in Sym(g)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    th = _sym1(g)
    X = lie_generator(th, x)
    out = Chain()
    for j in range(n + 1):
        c = (-1) ** j * binomial(n, j) * bernoulli(j)
        ad = ad_power(g, x, j, y)
        if c and any(ad):
            term = lie_generator(th, ad)
            for _ in range(n - j):
                term = X * term
            out.iadd(term, c)
    return out


def gutt_via_transfer(env: EnvelopeTheory, n: int, x: Sequence, y: Sequence,
                      D: Optional[Interval] = None, Dprime: Optional[Interval] = None) -> Chain:
    """The transferred product of X^n on D and Y on D' with D left of D'."""
    if env.m != 1:
        raise ValueError("the Gutt product lives on the m = 1 envelope")
    D = D if D is not None else env.ctx.reference
    Dprime = Dprime if Dprime is not None else Interval(D.b, D.b + 1)
    if not D.b <= Dprime.a:
        raise ValueError("D must lie to the left of D'")
    th = env.theory
    X = lie_generator(th, x)
    A = Chain.one()
    for _ in range(n):
        A = A * X
    op = PfaOperation((D, Dprime), env.ctx.real)
    return strict_mu(env.ctx, op, [A, lie_generator(th, y)])


def eta_sequence(n: int, D: Interval = Interval(0, 1), Dprime: Interval = Interval(1, 2)) -> List[Tuple[Form1D, Fraction]]:
    """eta_0 = omega_D', eta_{j+1} = -(n-j) omega_D int(eta_j - omega_D int eta_j), with totals."""
    if n < 1:
        raise ValueError("n must be at least 1")
    wD = bump1(D)
    eta = bump1(Dprime)
    out = [(eta, integrate1(eta))]
    for j in range(n):
        prim = indefinite_integral(eta - wD.scale(integrate1(eta)))
        eta = wedge1(wD, prim).scale(-(n - j))
        out.append((eta, integrate1(eta)))
    return out


def bernoulli_target(n: int, j: int) -> Fraction:
    return (-1) ** j * binomial(n, j) * bernoulli(j)


# -- the degree -1 Poisson bracket ---------------------------------------------------

Table = Callable[[int, int], Chain]


def biderivation(theory: ChainTheory, table: Table, a: Chain, b: Chain) -> Chain:
    """Extend a bracket of generators to a degree -1 biderivation.

    {A, y B'} = {A, y} B' + (-1)^((|A|+1)|y|) y {A, B'} and {A, y} = (-1)^(|A||y|) {y, A}.
    """
    out = Chain()
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            out.iadd(_bracket_mono(theory, table, ma, mb), ca * cb)
    return out


def _mono_chain(mono) -> Chain:
    return Chain.from_factors(list(mono))


def _bracket_mono(theory: ChainTheory, table: Table, ma, mb) -> Chain:
    if not ma or not mb:
        return Chain()
    if len(mb) == 1:
        y = mb[0]
        if len(ma) == 1:
            return table(ma[0].label, y.label)
        sign = -1 if monomial_degree(ma) * y.degree % 2 else 1
        return _bracket_mono(theory, table, mb, ma).scale(sign)
    y, rest = mb[0], mb[1:]
    first = _bracket_mono(theory, table, ma, (y,)) * _mono_chain(rest)
    sign = -1 if (monomial_degree(ma) + 1) * y.degree % 2 else 1
    second = _mono_chain((y,)) * _bracket_mono(theory, table, ma, rest)
    return first + second.scale(sign)


def lie_table(theory: ChainTheory) -> Table:
    g = theory.lie

    def table(i: int, j: int) -> Chain:
        return lie_generator(theory, [g.bracket_basis(i, j).get(k, 0) for k in range(g.dim)])
    return table


def shifted_bracket(g: LieAlgebra, a: Chain, b: Chain, theory: Optional[ChainTheory] = None) -> Chain:
    """{X, Y} = [X, Y] on generators of Sym(g[-1]), extended as a biderivation."""
    theory = theory if theory is not None else ChainTheory("envelope", 2, g)
    return biderivation(theory, lie_table(theory), a, b)


def explicit_bracket(theory: ChainTheory, xs: Sequence[int], ys: Sequence[int]) -> Chain:
    """-sum_i sum_j (-1)^(n+i+j) [X_i, Y_j] prod_(a != i) X_a prod_(b != j) Y_b on monomials of generators."""
    table = lie_table(theory)
    n = len(xs)
    out = Chain()
    for i in range(1, n + 1):
        for j in range(1, len(ys) + 1):
            rest = generator_monomial(theory, [x for a, x in enumerate(xs, 1) if a != i] +
                                      [y for b, y in enumerate(ys, 1) if b != j])
            out.iadd(table(xs[i - 1], ys[j - 1]) * rest, -((-1) ** (n + i + j)))
    return out


# -- Massey prefactors -----------------------------------------------------------------

def _right_free_disks(tree: PfaTree):
    if tree.size != 2 or tree.vertices[0].arity != 2 or tree.vertices[1].arity != 1 or tree.wiring[0][1] != 0:
        raise ValueError("expected a tree t(iota^D_(D1', D2), iota^D1'_D1)")
    outer, inner = tree.vertices
    return inner.inputs[0], outer.inputs[0], outer.inputs[1]


def _h2(ctx: TheoryContext, D, w):
    return -ctx.form_sdr(D).h(w)


def _hR(ctx: TheoryContext, w):
    return h_unsigned_plane(*ctx.reference, w)


def _omega(ctx: TheoryContext, D):
    return ctx.form_sdr(D).i(1)


def phi0(ctx: TheoryContext, tree: PfaTree) -> Fraction:
    """1/2 int( h1(h2_D1'(w_D1)) ^ (w_D2 + w_R2) + h2(w_D2) ^ h2_D1'(w_D1) ), unsigned homotopies."""
    D1, D1p, D2 = _right_free_disks(tree)
    a = _h2(ctx, D1p, _omega(ctx, D1))
    w2 = _omega(ctx, D2)
    first = integrate2(wedge2(_hR(ctx, a), w2 + ctx.omega_real()))
    second = integrate2(wedge2(_hR(ctx, w2), a))
    return (first + second) / 2


def phi(ctx: TheoryContext, tree: PfaTree) -> Fraction:
    """int h1(h2_D1'(w_D1)) ^ w_D2."""
    D1, D1p, D2 = _right_free_disks(tree)
    a = _h2(ctx, D1p, _omega(ctx, D1))
    return integrate2(wedge2(_hR(ctx, a), _omega(ctx, D2)))


def chi_coefficient(ctx: TheoryContext, D, Dprime) -> Fraction:
    """1/2 int h2_R2(w_D') ^ h2_R2(w_D)."""
    return integrate2(wedge2(_hR(ctx, _omega(ctx, Dprime)), _hR(ctx, _omega(ctx, D)))) / 2


def gauge_chi(bracket: Callable[[Chain, Chain], Chain]) -> Chi:
    """chi(iota_(D, D'))(A, B) = chi_coefficient(D, D') {A, B}; zero on all other arities."""
    def chi(ctx: TheoryContext, op: PfaOperation, args: Sequence[Chain]) -> Chain:
        if op.arity != 2:
            return Chain()
        c = chi_coefficient(ctx, *op.inputs)
        return bracket(args[0], args[1]).scale(c) if c else Chain()
    return chi


def default_phi_tree() -> PfaTree:
    from .forms2d import DiskRegion
    from .pfa_trees import standard_trees
    return standard_trees("right-free", {
        "outer": DiskRegion.plane(), "slot": 0,
        "inputs": (DiskRegion.rectangle(0, 3, 0, 3), DiskRegion.rectangle(4, 5, 1, 2)),
        "inner": (DiskRegion.rectangle(1, 2, 1, 2),)})


def sym_monomials(theory: ChainTheory, max_degree: int) -> List[Chain]:
    """All nonzero generator monomials of Sym-degree 1..max_degree."""
    out = []
    labels = range(len(theory.labels))
    for k in range(1, max_degree + 1):
        for combo in itertools.combinations_with_replacement(labels, k):
            c = generator_monomial(theory, combo)
            if not c.is_zero():
                out.append(c)
    return out
