from __future__ import annotations

import itertools
from fractions import Fraction
from math import comb, factorial

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfamassey.chains import Chain, ChainTheory, chains_equal, factor_chain, perturbation
from pfamassey.forms1d import Interval, box1, hat1, sdr_interval
from pfamassey.forms2d import DiskRegion, box2, d2, sdr_rectangle, tensor
from pfamassey.lie import builtin
from pfamassey.sdr_calculus import Sdr, lift_sym, perturb, shift, sym_weight, verify_sdr
from pfamassey.transfer_massey import TheoryContext

LINE = ChainTheory("envelope", 1, builtin("sl2"))
CS = ChainTheory("chernSimons", 2)
D1 = Interval(0, 4)
FORMS1 = [box1(0, 1), hat1(0, 1, 2), box1(1, 3, 2), hat1(1, 2, 4, 3), box1(2, 4, Fraction(1, 2))]
R = DiskRegion.rectangle(0, 3, 0, 3)
FORMS2 = [box2(0, 1, 0, 1), tensor(hat1(0, 1, 2), box1(0, 1)), d2(tensor(hat1(0, 1, 2), hat1(1, 2, 3))),
          tensor(hat1(0, 1, 2), hat1(1, 2, 3))]


def permutation_sum_h(lift: Sdr, mono) -> Chain:
    """(1/n!) sum over orderings of the tensor homotopy id..id h ip..ip, undoing each reordering's Koszul sign."""
    n = len(mono)
    one_factor = [Chain.from_factors([f]) for f in mono]
    h1 = [lift.h(c) for c in one_factor]
    ip1 = [lift.i(lift.p(c)) for c in one_factor]
    reference = Chain.from_factors(list(mono))
    ((ref_mono, ref_coef),) = reference.terms.items()
    out = Chain()
    for sigma in itertools.permutations(range(n)):
        ordered = Chain.from_factors([mono[k] for k in sigma])
        eps = ordered.terms[ref_mono] / ref_coef
        for k in range(n):
            term = Chain.one()
            for j in sigma[:k]:
                term = term * one_factor[j]
            term = term * h1[sigma[k]]
            for j in sigma[k + 1:]:
                term = term * ip1[j]
            left = sum(mono[j].degree for j in sigma[:k])
            out.iadd(term, eps * (-1 if left % 2 else 1))
    return out.scale(Fraction(1, factorial(n)))


def monomials(theory, forms, max_len=4):
    def build(picks):
        c = Chain.one()
        for label, w in picks:
            c = c * factor_chain(theory, label, w)
        return c
    pick = st.tuples(st.integers(0, len(theory.labels) - 1), st.sampled_from(forms))
    return st.lists(pick, min_size=2, max_size=max_len).map(build).filter(lambda c: not c.is_zero())


@settings(max_examples=30, deadline=None)
@given(monomials(LINE, FORMS1))
def test_sym_lift_matches_permutation_sum_line(c):
    lift = lift_sym(LINE, sdr_interval(D1))
    ((mono, coef),) = c.terms.items()
    assert chains_equal(lift.h(c), permutation_sum_h(lift, mono).scale(coef))


@settings(max_examples=20, deadline=None)
@given(monomials(CS, FORMS2, 3))
def test_sym_lift_matches_permutation_sum_plane(c):
    lift = lift_sym(CS, sdr_rectangle(R.x, R.y))
    ((mono, coef),) = c.terms.items()
    assert chains_equal(lift.h(c), permutation_sum_h(lift, mono).scale(coef))


def test_sym_weights_average_over_orderings():
    for n in range(1, 6):
        assert sum(comb(n - 1, s) * sym_weight(n, s) for s in range(n)) == 1


@settings(max_examples=20, deadline=None)
@given(st.lists(monomials(LINE, FORMS1, 3), min_size=1, max_size=3))
def test_lifted_retract_identities(samples):
    lift = lift_sym(LINE, sdr_interval(D1))
    assert verify_sdr(lift, samples) == {}


@settings(max_examples=15, deadline=None)
@given(st.lists(monomials(LINE, FORMS1, 3), min_size=1, max_size=2))
def test_perturbed_retract_identities(samples):
    lift = lift_sym(LINE, sdr_interval(D1))
    s = perturb(lift, lambda c: perturbation(LINE, c))
    assert verify_sdr(s, samples) == {}


def test_shift_keeps_identities():
    s = sdr_interval(D1)
    samples = [box1(0, 1), hat1(0, 1, 2)]
    for k in (1, 2, 3):
        assert verify_sdr(shift(s, k), samples, [Fraction(2)]) == {}


def test_verify_sdr_catches_a_wrong_homotopy():
    s = sdr_interval(D1)
    broken = Sdr(p=s.p, i=s.i, h=lambda w: s.h(w).scale(2) if w.degree == 1 else s.h(w),
                 d_big=s.d_big, d_small=s.d_small)
    assert "d h" in verify_sdr(broken, [box1(0, 1)])


def test_perturbation_changing_i_updates_small_side():
    # big = Q^2 with d = 0 retracting onto the first line; delta(a, b) = (0, a) is small
    s = Sdr(p=lambda v: v[0], i=lambda a: (a, Fraction(0)), h=lambda v: (Fraction(0), Fraction(0)),
            d_big=lambda v: (Fraction(0), Fraction(0)), d_small=lambda a: Fraction(0))
    t = perturb(s, lambda v: (Fraction(0), v[0]) if isinstance(v, tuple) else Fraction(0),
                sym_degree_bound=3, small_samples=[Fraction(1)])
    assert t.meta["i_unchanged"] is False


@pytest.mark.parametrize("D", [Interval(0, 2), Interval(-3, 5)])
def test_improved_retract_identities(D):
    ctx = TheoryContext(LINE)
    s = ctx.improved(D)
    samples = ctx._chain_samples(D)
    assert verify_sdr(s, samples) == {}
