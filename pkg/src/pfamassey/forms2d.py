"""Compactly supported piecewise-polynomial forms on the plane.

A form is stored componentwise (f; P dx + Q dy; k dx^dy), each component a
:class:`CellPoly2`: a bivariate polynomial in global coordinates on every cell
of a tensor grid, kept on the minimal grid so that equal forms compare equal.
Forms can be built from tensor products of 1D forms (:func:`tensor`), which is
also how the rectangle and plane contractions are written.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .exact_core import ColumnEchelon, as_rational, rational_str
from .forms1d import Form1D, Interval, PiecewisePoly, bump1, pderiv, peval

ZERO = Fraction(0)
ONE = Fraction(1)

Poly2 = Dict[Tuple[int, int], Fraction]


class BudgetExhausted(RuntimeError):
    """A polyomino homotopy needed a form outside its finite budget space."""


# -- bivariate polynomial helpers ---------------------------------------------

def _freeze(p: Poly2) -> tuple:
    return tuple(sorted((e, c) for e, c in p.items() if c))


def _p2_add(a: Poly2, b: Poly2, s: Fraction = ONE) -> Poly2:
    out = dict(a)
    for e, c in b.items():
        v = out.get(e, ZERO) + s * c
        if v:
            out[e] = v
        else:
            out.pop(e, None)
    return out


def _p2_mul(a: Poly2, b: Poly2) -> Poly2:
    out: Poly2 = {}
    for (i, j), c in a.items():
        for (k, l), d in b.items():
            e = (i + k, j + l)
            out[e] = out.get(e, ZERO) + c * d
    return {e: c for e, c in out.items() if c}


def _p2_dx(a: Poly2) -> Poly2:
    return {(i - 1, j): i * c for (i, j), c in a.items() if i}


def _p2_dy(a: Poly2) -> Poly2:
    return {(i, j - 1): j * c for (i, j), c in a.items() if j}


def _pow(x: Fraction, n: int) -> Fraction:
    return x ** n


def _p2_int_y(a: Poly2, y0: Fraction, y1: Fraction) -> Tuple[Fraction, ...]:
    """Integral over y in [y0, y1] as a polynomial in x."""
    out: Dict[int, Fraction] = {}
    for (i, j), c in a.items():
        v = c * (_pow(y1, j + 1) - _pow(y0, j + 1)) / (j + 1)
        out[i] = out.get(i, ZERO) + v
    n = max(out, default=-1) + 1
    res = [out.get(k, ZERO) for k in range(n)]
    while res and not res[-1]:
        res.pop()
    return tuple(res)


def _p2_int_x(a: Poly2, x0: Fraction, x1: Fraction) -> Tuple[Fraction, ...]:
    return _p2_int_y({(j, i): c for (i, j), c in a.items()}, x0, x1)


def _p2_prim_y(a: Poly2, y0: Fraction) -> Poly2:
    """y -> integral from y0 to y."""
    out: Poly2 = {}
    for (i, j), c in a.items():
        e = (i, j + 1)
        out[e] = out.get(e, ZERO) + c / (j + 1)
        out[(i, 0)] = out.get((i, 0), ZERO) - c * _pow(y0, j + 1) / (j + 1)
    return {e: c for e, c in out.items() if c}


def _p2_from_x(p: Sequence[Fraction]) -> Poly2:
    return {(k, 0): c for k, c in enumerate(p) if c}


def _p2_from_y(p: Sequence[Fraction]) -> Poly2:
    return {(0, k): c for k, c in enumerate(p) if c}


def _p2_eval(a: Poly2, x: Fraction, y: Fraction) -> Fraction:
    return sum((c * _pow(x, i) * _pow(y, j) for (i, j), c in a.items()), ZERO)


# -- cellwise polynomials -----------------------------------------------------

def _refine_map(old: Sequence[Fraction], new: Sequence[Fraction]) -> List[List[int]]:
    """For each old interval, the indices of the new intervals inside it."""
    out: List[List[int]] = [[] for _ in range(max(len(old) - 1, 0))]
    for I in range(len(new) - 1):
        a = new[I]
        i = bisect_right(old, a) - 1
        if 0 <= i < len(old) - 1 and new[I + 1] <= old[i + 1]:
            out[i].append(I)
    return out


class CellPoly2:
    """A compactly supported function on R^2, polynomial on each grid cell."""

    __slots__ = ("xs", "ys", "cells", "_key", "_hash")

    def __init__(self, xs: Sequence, ys: Sequence, cells: Dict[Tuple[int, int], Poly2], canonical: bool = True):
        xs = tuple(as_rational(v) for v in xs)
        ys = tuple(as_rational(v) for v in ys)
        cells = {ij: p for ij, p in cells.items() if p}
        if canonical:
            xs, ys, cells = _canonical2(xs, ys, cells)
        self.xs = xs
        self.ys = ys
        self.cells = cells
        self._key = None
        self._hash = None

    @classmethod
    def zero(cls) -> "CellPoly2":
        return cls((), (), {}, canonical=False)

    def key(self):
        if self._key is None:
            self._key = (self.xs, self.ys, tuple(sorted((ij, _freeze(p)) for ij, p in self.cells.items())))
        return self._key

    def __eq__(self, other) -> bool:
        return isinstance(other, CellPoly2) and self.key() == other.key()

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.key())
        return self._hash

    def is_zero(self) -> bool:
        return not self.cells

    def __repr__(self) -> str:
        return f"CellPoly2(xs={[str(v) for v in self.xs]}, ys={[str(v) for v in self.ys]}, cells={len(self.cells)})"

    def boxes(self) -> List[Tuple[Fraction, Fraction, Fraction, Fraction]]:
        return [(self.xs[i], self.xs[i + 1], self.ys[j], self.ys[j + 1]) for (i, j) in sorted(self.cells)]

    def refine(self, xs: Sequence[Fraction], ys: Sequence[Fraction]) -> Dict[Tuple[int, int], Poly2]:
        """Cells on a finer grid (without canonicalizing)."""
        if not self.cells:
            return {}
        if not set(self.xs).issubset(xs) or not set(self.ys).issubset(ys):
            raise ValueError("target grid does not refine this function")
        mx = _refine_map(self.xs, xs)
        my = _refine_map(self.ys, ys)
        out = {}
        for (i, j), p in self.cells.items():
            for I in mx[i]:
                for J in my[j]:
                    out[(I, J)] = p
        return out

    def _common(self, other: "CellPoly2"):
        xs = tuple(sorted(set(self.xs) | set(other.xs)))
        ys = tuple(sorted(set(self.ys) | set(other.ys)))
        return xs, ys, self.refine(xs, ys), other.refine(xs, ys)

    def add(self, other: "CellPoly2", s: Fraction = ONE) -> "CellPoly2":
        if not other.cells or not s:
            return self
        if not self.cells:
            return other.scale(s)
        xs, ys, a, b = self._common(other)
        out = dict(a)
        for ij, p in b.items():
            out[ij] = _p2_add(out.get(ij, {}), p, s)
        return CellPoly2(xs, ys, out)

    def __add__(self, other: "CellPoly2") -> "CellPoly2":
        return self.add(other)

    def __sub__(self, other: "CellPoly2") -> "CellPoly2":
        return self.add(other, -ONE)

    def __neg__(self) -> "CellPoly2":
        return self.scale(-ONE)

    def scale(self, s) -> "CellPoly2":
        s = as_rational(s)
        if not s or not self.cells:
            return CellPoly2.zero()
        return CellPoly2(self.xs, self.ys, {ij: {e: s * c for e, c in p.items()} for ij, p in self.cells.items()}, canonical=False)

    def __mul__(self, other: "CellPoly2") -> "CellPoly2":
        if not self.cells or not other.cells:
            return CellPoly2.zero()
        xs, ys, a, b = self._common(other)
        out = {ij: _p2_mul(p, b[ij]) for ij, p in a.items() if ij in b}
        return CellPoly2(xs, ys, out)

    def times_x(self, f: PiecewisePoly) -> "CellPoly2":
        """Multiply by a function of x alone."""
        if not self.cells or f.is_zero():
            return CellPoly2.zero()
        xs = tuple(sorted(set(self.xs) | set(f.knots)))
        cells = self.refine(xs, self.ys)
        pieces = f.on_knots(xs)
        out = {}
        for (i, j), p in cells.items():
            q = _p2_from_x(pieces[i])
            if q:
                out[(i, j)] = _p2_mul(p, q)
        return CellPoly2(xs, self.ys, out)

    def dx(self) -> "CellPoly2":
        return CellPoly2(self.xs, self.ys, {ij: _p2_dx(p) for ij, p in self.cells.items()})

    def dy(self) -> "CellPoly2":
        return CellPoly2(self.xs, self.ys, {ij: _p2_dy(p) for ij, p in self.cells.items()})

    def integral(self) -> Fraction:
        total = ZERO
        for (i, j), p in self.cells.items():
            q = _p2_int_y(p, self.ys[j], self.ys[j + 1])
            F = [ZERO] + [c / (k + 1) for k, c in enumerate(q)]
            total += peval(tuple(F), self.xs[i + 1]) - peval(tuple(F), self.xs[i])
        return total

    def fiber_y(self) -> PiecewisePoly:
        """x -> integral over all y."""
        if not self.cells:
            return PiecewisePoly.zero()
        cols: Dict[int, Tuple[Fraction, ...]] = {}
        for (i, j), p in self.cells.items():
            q = _p2_int_y(p, self.ys[j], self.ys[j + 1])
            from .forms1d import padd
            cols[i] = padd(cols.get(i, ()), q)
        return PiecewisePoly(self.xs, [cols.get(i, ()) for i in range(len(self.xs) - 1)])

    def cum_y(self) -> "CellPoly2":
        """(x, y) -> integral of the function from -infinity to y; must stay compactly supported."""
        if not self.cells:
            return self
        nx, ny = len(self.xs) - 1, len(self.ys) - 1
        out = {}
        for i in range(nx):
            acc: Poly2 = {}
            for j in range(ny):
                p = self.cells.get((i, j), {})
                prim = _p2_add(acc, _p2_prim_y(p, self.ys[j]))
                if prim:
                    out[(i, j)] = prim
                if p:
                    acc = _p2_add(acc, _p2_from_x(_p2_int_y(p, self.ys[j], self.ys[j + 1])))
            if acc:
                raise ValueError("fiberwise primitive is not compactly supported")
        return CellPoly2(self.xs, self.ys, out)

    def __call__(self, x, y) -> Fraction:
        x, y = as_rational(x), as_rational(y)
        i = bisect_right(self.xs, x) - 1
        j = bisect_right(self.ys, y) - 1
        p = self.cells.get((i, j))
        return _p2_eval(p, x, y) if p else ZERO

    def max_degree(self) -> int:
        return max((max(a, b) for p in self.cells.values() for (a, b) in p), default=-1)

    def to_json(self) -> dict:
        return {
            "xs": [rational_str(v) for v in self.xs],
            "ys": [rational_str(v) for v in self.ys],
            "cells": [
                {"cell": [i, j], "poly": [[a, b, rational_str(c)] for (a, b), c in _freeze(p)]}
                for (i, j), p in sorted(self.cells.items())
            ],
        }

    @classmethod
    def from_json(cls, d: dict) -> "CellPoly2":
        cells = {}
        for entry in d["cells"]:
            i, j = entry["cell"]
            cells[(i, j)] = {(a, b): as_rational(c) for a, b, c in entry["poly"]}
        return cls(d["xs"], d["ys"], cells)


def outer(fx: PiecewisePoly, gy: PiecewisePoly) -> CellPoly2:
    """(x, y) -> f(x) g(y)."""
    if fx.is_zero() or gy.is_zero():
        return CellPoly2.zero()
    if fx.tail or gy.tail:
        raise ValueError("outer product of non-compact functions")
    cells = {}
    for i, p in enumerate(fx.pieces):
        if not p:
            continue
        for j, q in enumerate(gy.pieces):
            if q:
                cells[(i, j)] = _p2_mul(_p2_from_x(p), _p2_from_y(q))
    return CellPoly2(fx.knots, gy.knots, cells)


def _canonical2(xs, ys, cells):
    if not cells:
        return (), (), {}
    nx, ny = len(xs) - 1, len(ys) - 1
    frozen = {ij: _freeze(p) for ij, p in cells.items()}
    cols: Dict[int, Dict[int, tuple]] = {}
    rows: Dict[int, Dict[int, tuple]] = {}
    for (i, j), f in frozen.items():
        cols.setdefault(i, {})[j] = f
        rows.setdefault(j, {})[i] = f
    keep_x = [k for k in range(nx + 1) if cols.get(k - 1, {}) != cols.get(k, {})]
    keep_y = [k for k in range(ny + 1) if rows.get(k - 1, {}) != rows.get(k, {})]
    if len(keep_x) == nx + 1 and len(keep_y) == ny + 1:
        return xs, ys, cells
    new_xs = tuple(xs[k] for k in keep_x)
    new_ys = tuple(ys[k] for k in keep_y)
    out = {}
    for (i, j), p in cells.items():
        I = bisect_right(new_xs, xs[i]) - 1
        J = bisect_right(new_ys, ys[j]) - 1
        out[(I, J)] = p
    return new_xs, new_ys, out


# -- forms --------------------------------------------------------------------

_COMPONENTS = {0: ("1",), 1: ("dx", "dy"), 2: ("dxdy",)}


class Form2D:
    """A compactly supported form on R^2 of degree 0, 1 or 2."""

    __slots__ = ("degree", "comps", "_key", "_hash")

    def __init__(self, degree: int, comps: Sequence[CellPoly2]):
        if degree not in _COMPONENTS:
            raise ValueError("2D forms have degree 0, 1 or 2")
        comps = tuple(comps)
        if len(comps) != len(_COMPONENTS[degree]):
            raise ValueError(f"degree {degree} needs {len(_COMPONENTS[degree])} components")
        self.degree = degree
        self.comps = comps
        self._key = None
        self._hash = None

    @classmethod
    def zero(cls, degree: int) -> "Form2D":
        return cls(degree, [CellPoly2.zero()] * len(_COMPONENTS[degree]))

    @property
    def dim(self) -> int:
        return 2

    @classmethod
    def from_terms(cls, terms: Iterable[Tuple[Form1D, Form1D, Fraction]]) -> "Form2D":
        total: Optional[Form2D] = None
        for fx, gy, s in terms:
            t = tensor(fx, gy).scale(s)
            total = t if total is None else total + t
        if total is None:
            raise ValueError("empty term list")
        return total

    def key(self):
        if self._key is None:
            self._key = (self.degree, tuple(c.key() for c in self.comps))
        return self._key

    def __eq__(self, other) -> bool:
        return isinstance(other, Form2D) and self.key() == other.key()

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.key())
        return self._hash

    def __repr__(self) -> str:
        return f"Form2D({self.degree}, {list(self.comps)})"

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.comps)

    def __add__(self, other: "Form2D") -> "Form2D":
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.degree != other.degree:
            raise ValueError(f"adding forms of degrees {self.degree} and {other.degree}")
        return Form2D(self.degree, [a + b for a, b in zip(self.comps, other.comps)])

    def __neg__(self) -> "Form2D":
        return Form2D(self.degree, [-c for c in self.comps])

    def __sub__(self, other: "Form2D") -> "Form2D":
        return self + (-other)

    def scale(self, s) -> "Form2D":
        return Form2D(self.degree, [c.scale(s) for c in self.comps])

    def __rmul__(self, s) -> "Form2D":
        return self.scale(s)

    def leading(self) -> Fraction:
        for c in self.comps:
            for ij in sorted(c.cells):
                fr = _freeze(c.cells[ij])
                if fr:
                    return fr[0][1]
        return ZERO

    def boxes(self):
        out = set()
        for c in self.comps:
            out.update(c.boxes())
        return sorted(out)

    def max_poly_degree(self) -> int:
        return max(c.max_degree() for c in self.comps)

    def to_json(self) -> dict:
        return {"degree": self.degree,
                "components": {name: c.to_json() for name, c in zip(_COMPONENTS[self.degree], self.comps)}}

    @classmethod
    def from_json(cls, d: dict) -> "Form2D":
        deg = int(d["degree"])
        return cls(deg, [CellPoly2.from_json(d["components"][n]) for n in _COMPONENTS[deg]])


def tensor(fx: Form1D, gy: Form1D) -> Form2D:
    """The form fx(x) ^ gy(y) (x-factor first)."""
    c = outer(fx.coeff, gy.coeff)
    z = CellPoly2.zero()
    if fx.degree == 0 and gy.degree == 0:
        return Form2D(0, [c])
    if fx.degree == 1 and gy.degree == 0:
        return Form2D(1, [c, z])
    if fx.degree == 0 and gy.degree == 1:
        return Form2D(1, [z, c])
    return Form2D(2, [c])


def d2(w: Form2D) -> Form2D:
    if w.degree == 0:
        f = w.comps[0]
        return Form2D(1, [f.dx(), f.dy()])
    if w.degree == 1:
        P, Q = w.comps
        return Form2D(2, [Q.dx() - P.dy()])
    return Form2D.zero(2)


def wedge2(a: Form2D, b: Form2D) -> Form2D:
    deg = a.degree + b.degree
    if deg > 2:
        return Form2D.zero(2)
    if a.degree == 0:
        f = a.comps[0]
        return Form2D(b.degree, [f * c for c in b.comps])
    if b.degree == 0:
        f = b.comps[0]
        return Form2D(a.degree, [c * f for c in a.comps])
    P1, Q1 = a.comps
    P2, Q2 = b.comps
    return Form2D(2, [P1 * Q2 - Q1 * P2])


def integrate2(w: Form2D) -> Fraction:
    if w.degree != 2:
        return ZERO
    return w.comps[0].integral()


# -- regions ------------------------------------------------------------------

Box = Tuple[Fraction, Fraction, Fraction, Fraction]


@dataclass(frozen=True)
class DiskRegion:
    """A rectangle, a polyomino of grid cells, or the whole plane."""

    kind: str
    x: Optional[Interval] = None
    y: Optional[Interval] = None
    cells: FrozenSet[Tuple[int, int]] = frozenset()
    pitch: Fraction = ONE

    def __post_init__(self):
        object.__setattr__(self, "pitch", as_rational(self.pitch))
        object.__setattr__(self, "cells", frozenset((int(i), int(j)) for i, j in self.cells))
        if self.kind == "rectangle":
            if self.x is None or self.y is None or not (self.x.bounded and self.y.bounded):
                raise ValueError("a rectangle needs two bounded intervals")
        elif self.kind == "polyomino":
            if not self.cells:
                raise ValueError("a polyomino needs at least one cell")
            if self.pitch <= 0:
                raise ValueError("grid pitch must be positive")
        elif self.kind != "plane":
            raise ValueError(f"unknown region kind {self.kind!r}")

    @classmethod
    def rectangle(cls, x0, x1, y0, y1) -> "DiskRegion":
        return cls("rectangle", Interval(x0, x1), Interval(y0, y1))

    @classmethod
    def polyomino(cls, cells: Iterable[Tuple[int, int]], pitch=1) -> "DiskRegion":
        return cls("polyomino", cells=frozenset(cells), pitch=pitch)

    @classmethod
    def plane(cls) -> "DiskRegion":
        return cls("plane")

    @property
    def dim(self) -> int:
        return 2

    def boxes(self) -> List[Box]:
        if self.kind == "rectangle":
            return [(self.x.a, self.x.b, self.y.a, self.y.b)]
        if self.kind == "polyomino":
            s = self.pitch
            return [(i * s, (i + 1) * s, j * s, (j + 1) * s) for i, j in sorted(self.cells)]
        raise ValueError("the plane has no finite box decomposition")

    def __str__(self) -> str:
        if self.kind == "rectangle":
            return f"{self.x}x{self.y}"
        if self.kind == "polyomino":
            return f"polyomino{sorted(self.cells)}@{self.pitch}"
        return "R^2"

    def contains(self, other: "DiskRegion") -> bool:
        if self.kind == "plane":
            return True
        if other.kind == "plane":
            return False
        return boxes_cover(self.boxes(), other.boxes())

    def disjoint(self, other: "DiskRegion") -> bool:
        if self.kind == "plane" or other.kind == "plane":
            return False
        return all(not _overlap(a, b) for a in self.boxes() for b in other.boxes())

    def contains_boxes(self, boxes: Sequence[Box]) -> bool:
        if self.kind == "plane":
            return True
        return boxes_cover(self.boxes(), boxes)

    def validate(self) -> List[str]:
        if self.kind != "polyomino":
            return []
        problems = []
        if not _cells_connected(self.cells):
            problems.append("polyomino interior is not connected")
        chi = euler_characteristic(self.cells)
        if chi != 1:
            problems.append(f"polyomino interior has Euler characteristic {chi}, not 1")
        return problems

    def to_json(self) -> dict:
        if self.kind == "rectangle":
            return {"kind": "rectangle",
                    "intervals": [[rational_str(self.x.a), rational_str(self.x.b)],
                                  [rational_str(self.y.a), rational_str(self.y.b)]],
                    "gridPitch": None}
        if self.kind == "polyomino":
            return {"kind": "polyomino", "cells": [list(c) for c in sorted(self.cells)],
                    "gridPitch": rational_str(self.pitch)}
        return {"kind": "plane", "gridPitch": None}

    @classmethod
    def from_json(cls, d: dict) -> "DiskRegion":
        kind = d["kind"]
        if kind == "rectangle":
            (x0, x1), (y0, y1) = d["intervals"]
            return cls.rectangle(x0, x1, y0, y1)
        if kind == "polyomino":
            return cls.polyomino([tuple(c) for c in d["cells"]], d.get("gridPitch") or 1)
        if kind == "plane":
            return cls.plane()
        raise ValueError(f"unknown region kind {kind!r}")


def _overlap(a: Box, b: Box) -> bool:
    return a[0] < b[1] and b[0] < a[1] and a[2] < b[3] and b[2] < a[3]


def boxes_cover(outer_boxes: Sequence[Box], inner_boxes: Sequence[Box]) -> bool:
    """Is the union of inner_boxes contained in the union of outer_boxes?"""
    xs = sorted({v for b in list(outer_boxes) + list(inner_boxes) for v in b[:2]})
    ys = sorted({v for b in list(outer_boxes) + list(inner_boxes) for v in b[2:]})
    for x0, x1 in zip(xs, xs[1:]):
        for y0, y1 in zip(ys, ys[1:]):
            cell = (x0, x1, y0, y1)
            if any(_inside(cell, b) for b in inner_boxes) and not any(_inside(cell, b) for b in outer_boxes):
                return False
    return True


def _inside(cell: Box, b: Box) -> bool:
    return b[0] <= cell[0] and cell[1] <= b[1] and b[2] <= cell[2] and cell[3] <= b[3]


def _cells_connected(cells: FrozenSet[Tuple[int, int]]) -> bool:
    cells = set(cells)
    if not cells:
        return False
    start = min(cells)
    seen = {start}
    stack = [start]
    while stack:
        i, j = stack.pop()
        for n in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)):
            if n in cells and n not in seen:
                seen.add(n)
                stack.append(n)
    return seen == cells


def euler_characteristic(cells: Iterable[Tuple[int, int]]) -> int:
    """Euler characteristic of the open interior: cells - interior edges + interior vertices."""
    cells = set(cells)
    faces = len(cells)
    edges = sum(1 for (i, j) in cells if (i + 1, j) in cells) + sum(1 for (i, j) in cells if (i, j + 1) in cells)
    verts = sum(1 for (i, j) in cells if {(i + 1, j), (i, j + 1), (i + 1, j + 1)} <= cells)
    return faces - edges + verts


def form_supported_in(w, region: DiskRegion) -> bool:
    if region.kind == "plane":
        return True
    return region.contains_boxes(w.boxes())


def extend_by_zero(w: Form2D, source: DiskRegion, target: DiskRegion) -> Form2D:
    if not form_supported_in(w, source):
        raise ValueError(f"form is not supported in {source}")
    if not target.contains(source):
        raise ValueError(f"{source} is not contained in {target}")
    return w


# -- bumps and contractions ---------------------------------------------------

def box2(x0, x1, y0, y1, height=1) -> Form2D:
    return tensor(Form1D(1, PiecewisePoly.on_interval(x0, x1, (as_rational(height),))),
                  Form1D(1, PiecewisePoly.on_interval(y0, y1, (ONE,))))


def bump2(D: DiskRegion) -> Form2D:
    if D.kind == "rectangle":
        return tensor(bump1(D.x), bump1(D.y))
    if D.kind == "polyomino":
        i, j = min(D.cells)
        s = D.pitch
        return box2(i * s, (i + 1) * s, j * s, (j + 1) * s, 1 / (s * s))
    raise ValueError("bump2 of the plane depends on a reference rectangle")


def _tensor_h(w: Form2D, wI: PiecewisePoly, wJ: PiecewisePoly) -> Form2D:
    """h = h_I (x) i_J p_J + id (x) h_J with Koszul signs, written componentwise."""
    if w.degree == 0 or w.is_zero():
        return Form2D.zero(0 if w.degree <= 1 else 1)
    if w.degree == 1:
        Q = w.comps[1]
        G = Q.fiber_y()
        return Form2D(0, [-(Q - outer(G, wJ)).cum_y()])
    k = w.comps[0]
    K = k.fiber_y()
    T = K.integral()
    dx_part = (k - outer(K, wJ)).cum_y()
    dy_part = -outer((K - wI.scale(T)).cumulative(), wJ)
    return Form2D(1, [dx_part, dy_part])


def _form_sdr(name: str, region: DiskRegion, omega: Form2D, h, d_small_zero=True):
    from .sdr_calculus import Sdr

    def check(w: Form2D) -> None:
        if region.kind != "plane" and not form_supported_in(w, region):
            raise ValueError(f"form not supported in {region}")

    def p(w: Form2D) -> Fraction:
        check(w)
        return integrate2(w) if w.degree == 2 else ZERO

    def i(k) -> Form2D:
        return omega.scale(as_rational(k))

    def hh(w: Form2D) -> Form2D:
        check(w)
        return h(w)

    return Sdr(p=p, i=i, h=hh, d_big=d2, d_small=lambda k: ZERO, name=name,
               theory="forms", small_degree=lambda k: 2, meta={"region": region, "omega": omega})


def sdr_rectangle(I: Interval, J: Interval):
    """Tensor product of the two interval contractions."""
    wI, wJ = bump1(I).coeff, bump1(J).coeff
    region = DiskRegion("rectangle", I, J)
    return _form_sdr(f"rectangle{region}", region, bump2(region), lambda w: _tensor_h(w, wI, wJ))


def sdr_plane(I0: Interval, J0: Interval):
    """Global contraction of R^2 built from the reference rectangle I0 x J0."""
    wI, wJ = bump1(I0).coeff, bump1(J0).coeff
    omega = tensor(bump1(I0), bump1(J0))
    return _form_sdr(f"plane[{I0}x{J0}]", DiskRegion.plane(), omega, lambda w: _tensor_h(w, wI, wJ))


def h_unsigned_plane(I0: Interval, J0: Interval, w: Form2D) -> Form2D:
    """h^r on R^2 (the inverse of d on the chosen complement), i.e. minus the contraction homotopy."""
    return -_tensor_h(w, bump1(I0).coeff, bump1(J0).coeff)


# -- polyomino contractions ---------------------------------------------------

@dataclass(frozen=True)
class HomotopyBudget:
    maxPolyDegree: int = 2
    gridRefinement: int = 1

    def __post_init__(self):
        if self.maxPolyDegree < 1:
            raise ValueError("maxPolyDegree must be at least 1")
        if self.gridRefinement < 1:
            raise ValueError("gridRefinement must be positive")

    def doubled(self) -> "HomotopyBudget":
        return HomotopyBudget(2 * self.maxPolyDegree, self.gridRefinement)


@dataclass(frozen=True)
class _Basis1D:
    """Hierarchical 1D spaces on a knot vector: hats + bubbles, boxes + bubble derivatives."""

    knots: Tuple[Fraction, ...]
    zero_forms: Tuple[Tuple[str, PiecewisePoly, FrozenSet[int]], ...]
    one_forms: Tuple[Tuple[str, PiecewisePoly, FrozenSet[int]], ...]
    d: Tuple[Dict[int, Fraction], ...]  # d of zero_forms[k] in one_forms coordinates


def _basis_1d(knots: Sequence[Fraction], degree: int) -> _Basis1D:
    n = len(knots) - 1
    zero, one, d = [], [], []
    for c in range(n):
        a, b = knots[c], knots[c + 1]
        one.append(("A", PiecewisePoly.on_interval(a, b, (ONE,)), frozenset({c})))
    for t in range(1, n):
        a, m, b = knots[t - 1], knots[t], knots[t + 1]
        up = (-a / (m - a), 1 / (m - a))
        down = (b / (b - m), -1 / (b - m))
        zero.append(("A", PiecewisePoly((a, m, b), (up, down)), frozenset({t - 1, t})))
        d.append({t - 1: 1 / (m - a), t: -1 / (b - m)})
    for c in range(n):
        a, b = knots[c], knots[c + 1]
        for e in range(degree - 1):
            # (x - a)^(e + 1) (b - x)
            poly = (ONE,)
            from .forms1d import pmul
            for _ in range(e + 1):
                poly = pmul(poly, (-a, ONE))
            poly = pmul(poly, (b, -ONE))
            bubble = PiecewisePoly.on_interval(a, b, poly)
            zero.append(("B", bubble, frozenset({c})))
            one.append(("B", PiecewisePoly.on_interval(a, b, pderiv(poly)), frozenset({c})))
            d.append({len(one) - 1: ONE})
    return _Basis1D(tuple(knots), tuple(zero), tuple(one), tuple(d))


class PolyominoSpace:
    """Finite budget model of compactly supported forms on a polyomino.

    Basis forms are tensor products of 1D basis functions whose support lies in
    the (refined) cell set; this is exactly the space of cellwise polynomial
    forms of the given degree with vanishing tangential boundary trace.
    Lowest-order (hat/box) products are listed first.
    """

    def __init__(self, region: DiskRegion, budget: HomotopyBudget):
        problems = region.validate()
        if region.kind != "polyomino" or problems:
            raise ValueError(f"not a valid polyomino disk: {problems or region.kind}")
        self.region = region
        self.budget = budget
        r = budget.gridRefinement
        s = region.pitch / r
        imin = min(i for i, _ in region.cells)
        imax = max(i for i, _ in region.cells)
        jmin = min(j for _, j in region.cells)
        jmax = max(j for _, j in region.cells)
        self.xs = tuple((imin * r + t) * s for t in range((imax - imin + 1) * r + 1))
        self.ys = tuple((jmin * r + t) * s for t in range((jmax - jmin + 1) * r + 1))
        self.fine_cells = frozenset(
            ((i - imin) * r + u, (j - jmin) * r + v) for i, j in region.cells for u in range(r) for v in range(r)
        )
        k = budget.maxPolyDegree
        self.bx = _basis_1d(self.xs, k)
        self.by = _basis_1d(self.ys, k)
        self.V0 = self._products(self.bx.zero_forms, self.by.zero_forms, "1")
        self.V1 = self._products(self.bx.one_forms, self.by.zero_forms, "dx") + \
            self._products(self.bx.zero_forms, self.by.one_forms, "dy")
        self.V1.sort(key=lambda e: (e[0], 0 if e[1] == "dx" else 1, e[2], e[3]))
        self.V2 = self._products(self.bx.one_forms, self.by.one_forms, "dxdy")
        self.index1 = {(c, u, v): n for n, (_, c, u, v) in enumerate(self.V1)}
        self.index2 = {(u, v): n for n, (_, _, u, v) in enumerate(self.V2)}
        self._d0 = [self._d0_column(e) for e in self.V0]
        self._d1 = [self._d1_column(e) for e in self.V1]
        self._ech_d0 = ColumnEchelon(len(self.V1), self._d0)
        self.K1 = self._ech_d0.complement_rows()
        self._ech_h2 = ColumnEchelon(len(self.V2), [self._d1[r] for r in self.K1])
        self._ech_h1 = ColumnEchelon(len(self.V1), [{r: ONE} for r in self.K1] + self._d0)
        self._coord = {}

    def _products(self, bu, bv, comp):
        out = []
        for u, (tu, _, su) in enumerate(bu):
            for v, (tv, _, sv) in enumerate(bv):
                if all((a, b) in self.fine_cells for a in su for b in sv):
                    rank = 0 if (tu, tv) == ("A", "A") else 1
                    out.append((rank, comp, u, v))
        out.sort()
        return out

    def _d0_column(self, e) -> Dict[int, Fraction]:
        _, _, u, v = e
        col: Dict[int, Fraction] = {}
        for u1, c in self.bx.d[u].items():
            n = self.index1[("dx", u1, v)]
            col[n] = col.get(n, ZERO) + c
        for v1, c in self.by.d[v].items():
            n = self.index1[("dy", u, v1)]
            col[n] = col.get(n, ZERO) + c
        return {r: c for r, c in col.items() if c}

    def _d1_column(self, e) -> Dict[int, Fraction]:
        _, comp, u, v = e
        col: Dict[int, Fraction] = {}
        if comp == "dx":
            # d(P dx) = -dP/dy dx^dy
            for v1, c in self.by.d[v].items():
                n = self.index2[(u, v1)]
                col[n] = col.get(n, ZERO) - c
        else:
            for u1, c in self.bx.d[u].items():
                n = self.index2[(u1, v)]
                col[n] = col.get(n, ZERO) + c
        return {r: c for r, c in col.items() if c}

    # basis <-> forms
    def _factor_pieces(self, f: PiecewisePoly, knots) -> Dict[int, Tuple[Fraction, ...]]:
        return {c: p for c, p in enumerate(f.on_knots(knots)) if p}

    def _expand(self, degree: int, e) -> Dict[tuple, Fraction]:
        _, comp, u, v = e
        if degree == 0:
            fu, fv = self.bx.zero_forms[u][1], self.by.zero_forms[v][1]
        elif degree == 2:
            fu, fv = self.bx.one_forms[u][1], self.by.one_forms[v][1]
        elif comp == "dx":
            fu, fv = self.bx.one_forms[u][1], self.by.zero_forms[v][1]
        else:
            fu, fv = self.bx.zero_forms[u][1], self.by.one_forms[v][1]
        out = {}
        pu = self._factor_pieces(fu, self.xs)
        pv = self._factor_pieces(fv, self.ys)
        for a, p in pu.items():
            for b, q in pv.items():
                for ex, cx in enumerate(p):
                    for ey, cy in enumerate(q):
                        if cx and cy:
                            out[(comp, a, b, ex, ey)] = cx * cy
        return out

    def _coordinate_system(self, degree: int):
        if degree not in self._coord:
            basis = {0: self.V0, 1: self.V1, 2: self.V2}[degree]
            rows: Dict[tuple, int] = {}
            cols = []
            for e in basis:
                col = {}
                for key, c in self._expand(degree, e).items():
                    col[rows.setdefault(key, len(rows))] = c
                cols.append(col)
            self._coord[degree] = (rows, ColumnEchelon(len(rows), cols), cols)
        return self._coord[degree]

    def coordinates(self, w: Form2D, what: str) -> Dict[int, Fraction]:
        rows, ech, _ = self._coordinate_system(w.degree)
        vec: Dict[int, Fraction] = {}
        names = _COMPONENTS[w.degree]
        for comp, c in zip(names, w.comps):
            if c.is_zero():
                continue
            if not set(c.xs).issubset(self.xs) or not set(c.ys).issubset(self.ys):
                raise BudgetExhausted(f"budget exhausted in {what}: form breakpoints are off the budget grid "
                                      f"({self.budget}) of {self.region}")
            for (a, b), p in c.refine(self.xs, self.ys).items():
                for (ex, ey), v in p.items():
                    key = (comp, a, b, ex, ey)
                    if key not in rows:
                        raise BudgetExhausted(f"budget exhausted in {what}: component {comp} needs monomial "
                                              f"x^{ex} y^{ey} on a cell outside the budget space ({self.budget}) of {self.region}")
                    vec[rows[key]] = v
        sol = ech.solve(vec)
        if sol is None:
            raise BudgetExhausted(f"budget exhausted in {what}: degree-{w.degree} form is not in the budget space "
                                  f"({self.budget}) of {self.region}")
        return sol

    def form(self, degree: int, coeffs: Dict[int, Fraction]) -> Form2D:
        _, _, cols = self._coordinate_system(degree)
        rows, _, _ = self._coord[degree]
        inv = {n: key for key, n in rows.items()}
        acc: Dict[tuple, Fraction] = {}
        for k, c in coeffs.items():
            if not c:
                continue
            for r, v in cols[k].items():
                acc[r] = acc.get(r, ZERO) + c * v
        names = _COMPONENTS[degree]
        comp_cells = {name: {} for name in names}
        for r, v in acc.items():
            if not v:
                continue
            comp, a, b, ex, ey = inv[r]
            cell = comp_cells[comp].setdefault((a, b), {})
            cell[(ex, ey)] = cell.get((ex, ey), ZERO) + v
        return Form2D(degree, [CellPoly2(self.xs, self.ys, comp_cells[n]) for n in names])

    # the unsigned inverses of d on the chosen complements
    def h_unsigned(self, w: Form2D) -> Form2D:
        if w.is_zero():
            return Form2D.zero(max(w.degree - 1, 0))
        if w.degree == 2:
            omega = bump2(self.region)
            target = w - omega.scale(integrate2(w))
            if target.is_zero():
                return Form2D.zero(1)
            vec = self.coordinates(target, "h2 right-hand side")
            sol = self._ech_h2.solve(vec)
            if sol is None:
                raise BudgetExhausted(f"budget exhausted in h2 solve on {self.region} ({self.budget})")
            return self.form(1, {self.K1[k]: c for k, c in sol.items()})
        if w.degree == 1:
            vec = self.coordinates(w, "h1 right-hand side")
            sol = self._ech_h1.solve(vec)
            if sol is None:
                raise BudgetExhausted(f"budget exhausted in h1 solve on {self.region} ({self.budget})")
            nk = len(self.K1)
            return self.form(0, {k - nk: c for k, c in sol.items() if k >= nk})
        return Form2D.zero(0)

    def cohomology_probe(self) -> Dict[str, bool]:
        """Kernel = image checks matching H^0_c = H^1_c = 0 and H^2_c = Q."""
        rank_d0 = self._ech_d0.rank
        rank_d1 = ColumnEchelon(len(self.V2), self._d1).rank
        return {
            "H0 = 0": rank_d0 == len(self.V0),
            "H1 = 0": len(self.V1) - rank_d1 == rank_d0,
            "H2 = Q": len(self.V2) - rank_d1 == 1,
        }


def sdr_polyomino(D: DiskRegion, budget: HomotopyBudget = HomotopyBudget()):
    space = PolyominoSpace(D, budget)
    sdr = _form_sdr(f"polyomino{sorted(D.cells)}", D, bump2(D), lambda w: -space.h_unsigned(w))
    sdr.meta["space"] = space
    return sdr


def sdr_region(D: DiskRegion, budget: HomotopyBudget = HomotopyBudget(), reference: Optional[Tuple[Interval, Interval]] = None):
    """The contraction attached to a 2D disk: rectangles and the plane explicitly, polyominoes by solving."""
    if D.kind == "rectangle":
        return sdr_rectangle(D.x, D.y)
    if D.kind == "polyomino":
        return sdr_polyomino(D, budget)
    if reference is None:
        raise ValueError("the plane needs a reference rectangle")
    return sdr_plane(*reference)
