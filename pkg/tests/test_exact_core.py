from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfamassey.exact_core import (SparseMatrix, as_rational, bernoulli, binomial, complement_basis, kernel_basis,
                                  rank, rational_str, solve_in_image)

small = st.integers(min_value=-3, max_value=3)


def matrices(max_rows=5, max_cols=5):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(small, min_size=c, max_size=c), min_size=r, max_size=r)))


def test_bernoulli_values():
    assert [bernoulli(j) for j in range(7)] == [1, Fraction(-1, 2), Fraction(1, 6), 0, Fraction(-1, 30), 0,
                                                Fraction(1, 42)]


def test_binomial():
    assert binomial(5, 2) == 10
    assert binomial(3, 4) == 0


def test_as_rational_rejects_floats():
    assert as_rational("3/4") == Fraction(3, 4)
    with pytest.raises(TypeError):
        as_rational(0.5)


def test_rational_str():
    assert rational_str(Fraction(-1, 30)) == "-1/30"
    assert rational_str(Fraction(2)) == "2/1"


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_rank_nullity_and_kernel(rows):
    A = SparseMatrix.from_dense(rows)
    ker = kernel_basis(A)
    assert rank(A) + len(ker) == A.cols
    for v in ker:
        assert all(c == 0 for c in A.apply(v))


@settings(max_examples=60, deadline=None)
@given(matrices(), st.lists(small, min_size=5, max_size=5))
def test_solve_in_image_roundtrip(rows, x):
    A = SparseMatrix.from_dense(rows)
    b = A.apply(x[:A.cols])
    sol = solve_in_image(A, b)
    assert sol is not None and A.apply(sol) == b


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_complement_spans_with_image(rows):
    A = SparseMatrix.from_dense(rows)
    comp = complement_basis(A)
    assert len(comp) == A.rows - rank(A)
    stacked = SparseMatrix.from_dense([list(r) + [v[k] for v in comp] for k, r in enumerate(A.to_dense())])
    assert rank(stacked) == A.rows


def test_solve_outside_image_is_none():
    A = SparseMatrix.from_dense([[1, 0], [0, 0]])
    assert solve_in_image(A, [0, 1]) is None
