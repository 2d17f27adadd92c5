"""phi0 and phi of the default right-free tree recomputed with sympy polynomials.

Every form involved is polynomial on the unit cells of the integer grid, so a
field is stored as one sympy polynomial per cell of a bounding window.  The
homotopies are written from scratch as iterated integrals, and their defining
identities are checked cellwise before they are used.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Tuple

import pytest

sympy = pytest.importorskip("sympy")
from sympy import Rational, expand, integrate, symbols

from pfamassey.envelopes import build_envelope, default_phi_tree, phi, phi0
from pfamassey.lie import builtin

x, y, t = symbols("x y t", real=True)
XS, YS = range(-2, 8), range(-2, 6)
Field = Dict[Tuple[int, int], object]


def zero() -> Field:
    return {(i, j): sympy.Integer(0) for i in XS for j in YS}


def box(x0, x1, y0, y1, height=1) -> Field:
    f = zero()
    for i in range(x0, x1):
        for j in range(y0, y1):
            f[(i, j)] = Rational(height)
    return f


def bump(x0, x1, y0, y1) -> Field:
    return box(x0, x1, y0, y1, Rational(1, (x1 - x0) * (y1 - y0)))


def add(*fs, scales=None) -> Field:
    scales = scales or [1] * len(fs)
    return {c: expand(sum(s * f[c] for s, f in zip(scales, fs))) for c in fs[0]}


def mul(f: Field, g: Field) -> Field:
    return {c: expand(f[c] * g[c]) for c in f}


def dx(f: Field) -> Field:
    return {c: sympy.diff(v, x) for c, v in f.items()}


def dy(f: Field) -> Field:
    return {c: sympy.diff(v, y) for c, v in f.items()}


def cum_y(f: Field) -> Field:
    out = {}
    for i in XS:
        below = sympy.Integer(0)
        for j in YS:
            out[(i, j)] = expand(below + integrate(f[(i, j)].subs(y, t), (t, j, y)))
            below = expand(below + integrate(f[(i, j)], (y, j, j + 1)))
        assert below == 0, "cum_y of a form with nonzero fiber integral"
    return out


def cum_x(f: Field) -> Field:
    out = {}
    for j in YS:
        left = sympy.Integer(0)
        for i in XS:
            out[(i, j)] = expand(left + integrate(f[(i, j)].subs(x, t), (t, i, x)))
            left = expand(left + integrate(f[(i, j)], (x, i, i + 1)))
    return out


def fiber_y(f: Field) -> Field:
    """(x, y) -> int f(x, s) ds, constant in y."""
    cols = {i: expand(sum(integrate(f[(i, j)], (y, j, j + 1)) for j in YS)) for i in XS}
    return {(i, j): cols[i] for i in XS for j in YS}


def total(f: Field) -> Fraction:
    value = sum(integrate(integrate(v, (x, i, i + 1)), (y, j, j + 1)) for (i, j), v in f.items())
    return Fraction(str(value))


def same(f: Field, g: Field) -> bool:
    return all(expand(f[c] - g[c]) == 0 for c in f)


def h_two(k: Field, rect) -> Tuple[Field, Field]:
    """Unsigned inverse of d on k dx dy for the retract built on rect: (A, B) of A dx + B dy."""
    x0, x1, y0, y1 = rect
    wI, wJ = box(x0, x1, -2, 6, Rational(1, x1 - x0)), box(-2, 8, y0, y1, Rational(1, y1 - y0))
    K = fiber_y(k)
    T = total(k)
    A = add(cum_y(add(k, mul(K, wJ), scales=[1, -1])), scales=[-1])
    B = mul(cum_x(add(K, wI, scales=[1, -T])), wJ)
    return A, B


def h_one(A: Field, B: Field, rect) -> Field:
    """Unsigned inverse of d on the 1-form A dx + B dy; only the dy part contributes."""
    _, _, y0, y1 = rect
    wJ = box(-2, 8, y0, y1, Rational(1, y1 - y0))
    return cum_y(add(B, mul(fiber_y(B), wJ), scales=[1, -1]))


@pytest.fixture(scope="module")
def oracle():
    unit = (0, 1, 0, 1)
    w1, w2, wR = box(1, 2, 1, 2), box(4, 5, 1, 2), box(0, 1, 0, 1)
    w1p = bump(0, 3, 0, 3)
    A, B = h_two(w1, (0, 3, 0, 3))
    # d(A dx + B dy) = w1 - omega_D1'
    assert same(add(dx(B), dy(A), scales=[1, -1]), add(w1, w1p, scales=[1, -1]))
    a_hat = h_one(A, B, unit)
    # d h(a) + h(d a) = a on the plane
    A3, B3 = h_two(add(w1, w1p, scales=[1, -1]), unit)
    assert same(add(dx(a_hat), A3), A) and same(add(dy(a_hat), B3), B)
    A2, B2 = h_two(w2, unit)
    assert same(add(dx(B2), dy(A2), scales=[1, -1]), add(w2, wR, scales=[1, -1]))
    # (A2 dx + B2 dy) ^ (A dx + B dy) = (A2 B - B2 A) dx dy
    cross = add(mul(A2, B), mul(B2, A), scales=[1, -1])
    phi0_value = (total(mul(a_hat, add(w2, wR))) + total(cross)) / 2
    phi_value = total(mul(a_hat, w2))
    return phi0_value, phi_value


def test_phi0_matches_symbolic_oracle(oracle):
    env = build_envelope(builtin("h3"), 2)
    assert phi0(env.ctx, default_phi_tree()) == oracle[0] == Fraction(1, 9)


def test_phi_matches_symbolic_oracle(oracle):
    env = build_envelope(builtin("h3"), 2)
    assert phi(env.ctx, default_phi_tree()) == oracle[1]
