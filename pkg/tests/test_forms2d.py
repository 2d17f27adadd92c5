from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfamassey.forms1d import Interval, box1, hat1
from pfamassey.forms2d import (BudgetExhausted, DiskRegion, Form2D, HomotopyBudget, PolyominoSpace, box2, bump2, d2,
                               integrate2, sdr_plane, sdr_polyomino, sdr_rectangle, tensor, wedge2)
from pfamassey.sdr_calculus import verify_sdr
from pfamassey.transfer_massey import _polyomino_samples, _region_samples, default_configuration, second_configuration

ints = st.integers(0, 3)


@st.composite
def hat_functions(draw):
    x0, y0 = draw(ints), draw(ints)
    w, h = draw(st.integers(1, 2)), draw(st.integers(1, 2))
    peak = draw(st.fractions(min_value=-2, max_value=2, max_denominator=3))
    return tensor(hat1(x0, x0 + Fraction(w, 2), x0 + w), hat1(y0, y0 + Fraction(h, 2), y0 + h, peak))


@st.composite
def one_forms(draw):
    x0, y0 = draw(ints), draw(ints)
    dx_part = tensor(box1(x0, x0 + 1), hat1(y0, y0 + Fraction(1, 2), y0 + 1))
    dy_part = tensor(hat1(x0, x0 + Fraction(1, 2), x0 + 1), box1(y0, y0 + 1))
    return dx_part.scale(draw(st.integers(-2, 2))) + dy_part.scale(draw(st.integers(-2, 2)))


ANNULUS = DiskRegion.polyomino([(i, j) for i in range(3) for j in range(3) if (i, j) != (1, 1)])
L_SHAPE = DiskRegion.polyomino([(0, 0), (1, 0), (2, 0), (0, 1), (0, 2)])


@settings(max_examples=30, deadline=None)
@given(hat_functions())
def test_d_squared_is_zero(f):
    assert d2(d2(f)).is_zero()


@settings(max_examples=30, deadline=None)
@given(hat_functions(), one_forms())
def test_leibniz_and_stokes(f, a):
    assert d2(wedge2(f, a)) == wedge2(d2(f), a) + wedge2(f, d2(a))
    assert integrate2(d2(a)) == 0


def test_wedge_of_one_forms_is_antisymmetric():
    a = tensor(hat1(0, 1, 2), box1(0, 1))
    b = d2(tensor(hat1(0, 1, 2), hat1(0, 1, 2)))
    assert wedge2(a, b) == -wedge2(b, a)


def test_bump2_is_normalized():
    assert integrate2(bump2(DiskRegion.rectangle(0, 3, 1, 2))) == 1
    assert integrate2(bump2(L_SHAPE)) == 1


def test_polyomino_validation():
    assert L_SHAPE.validate() == []
    assert any("Euler" in p for p in ANNULUS.validate())
    assert any("connected" in p for p in DiskRegion.polyomino([(0, 0), (2, 0)]).validate())


def test_containment_and_disjointness():
    big = DiskRegion.rectangle(0, 3, 0, 3)
    assert big.contains(L_SHAPE)
    assert DiskRegion.plane().contains(big)
    assert not L_SHAPE.contains(big)
    assert DiskRegion.rectangle(1, 2, 1, 2).disjoint(L_SHAPE)


def test_region_json_roundtrip():
    for D in (L_SHAPE, DiskRegion.rectangle(0, Fraction(1, 2), 0, 1), DiskRegion.plane()):
        assert DiskRegion.from_json(D.to_json()) == D


def test_rectangle_and_plane_retracts():
    R = DiskRegion.rectangle(0, 2, 0, 3)
    assert verify_sdr(sdr_rectangle(R.x, R.y), _region_samples(R, (Interval(0, 1), Interval(0, 1)))) == {}
    ref = (Interval(0, 1), Interval(0, 1))
    assert verify_sdr(sdr_plane(*ref), _region_samples(DiskRegion.plane(), ref)) == {}


@pytest.mark.parametrize("D", [L_SHAPE, default_configuration().Du, second_configuration().Dd])
def test_polyomino_retract_identities(D):
    assert verify_sdr(sdr_polyomino(D), _polyomino_samples(D)) == {}


@pytest.mark.parametrize("D", [L_SHAPE, default_configuration().Du])
def test_cohomology_probe(D):
    probe = PolyominoSpace(D, HomotopyBudget()).cohomology_probe()
    assert probe == {"H0 = 0": True, "H1 = 0": True, "H2 = Q": True}


def test_annulus_is_refused():
    with pytest.raises(ValueError, match="Euler"):
        PolyominoSpace(ANNULUS, HomotopyBudget())


def test_budget_exhaustion_is_explicit():
    s = sdr_polyomino(L_SHAPE, HomotopyBudget(1))
    w = tensor(hat1(0, Fraction(1, 2), 1), hat1(0, Fraction(1, 2), 1))
    high = wedge2(w, wedge2(w, box2(0, 1, 0, 1)))
    with pytest.raises(BudgetExhausted, match="budget"):
        s.h(high)


@pytest.mark.parametrize("config", [default_configuration(), second_configuration()])
def test_budget_stability_under_doubling(config):
    w = bump2(config.D1) - bump2(config.D2)
    for D in (config.Du, config.Dd):
        small = sdr_polyomino(D, HomotopyBudget(2)).h(w)
        assert sdr_polyomino(D, HomotopyBudget(4)).h(w) == small


def test_budget_rejects_nonsense():
    with pytest.raises(ValueError):
        HomotopyBudget(0)
    with pytest.raises(ValueError):
        HomotopyBudget(1, 0)
