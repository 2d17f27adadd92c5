"""Compactly supported piecewise-polynomial forms on the real line.

Polynomials are stored in the global coordinate x (coefficient tuples, lowest
degree first), so restricting a piece to a sub-interval never changes it.
Every :class:`PiecewisePoly` is kept in a canonical form: no trailing zero
coefficients, no knot separating two identical pieces, no zero pieces at the
ends.  Equal functions therefore have equal keys, which is what lets forms act
as hashable factors of symmetric monomials.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .exact_core import as_rational, rational_str

Poly = Tuple[Fraction, ...]
ZERO = Fraction(0)
ONE = Fraction(1)


# -- univariate polynomial helpers -------------------------------------------

def ptrim(c: Sequence[Fraction]) -> Poly:
    c = list(c)
    while c and not c[-1]:
        c.pop()
    return tuple(c)


def padd(a: Poly, b: Poly) -> Poly:
    n = max(len(a), len(b))
    return ptrim([(a[k] if k < len(a) else ZERO) + (b[k] if k < len(b) else ZERO) for k in range(n)])


def pscale(a: Poly, s: Fraction) -> Poly:
    if not s:
        return ()
    return tuple(s * v for v in a)


def pmul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ()
    out = [ZERO] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return ptrim(out)


def pderiv(a: Poly) -> Poly:
    return ptrim([k * a[k] for k in range(1, len(a))])


def pantideriv(a: Poly) -> Poly:
    """Antiderivative with zero constant term."""
    if not a:
        return ()
    return ptrim([ZERO] + [a[k] / (k + 1) for k in range(len(a))])


def peval(a: Poly, x: Fraction) -> Fraction:
    acc = ZERO
    for c in reversed(a):
        acc = acc * x + c
    return acc


def pintegral(a: Poly, lo: Fraction, hi: Fraction) -> Fraction:
    F = pantideriv(a)
    return peval(F, hi) - peval(F, lo)


# -- piecewise polynomials ----------------------------------------------------

class PiecewisePoly:
    """A function on R, polynomial on each interval between consecutive knots.

    Zero left of the first knot; right of the last knot it equals the constant
    ``tail`` (zero for compactly supported functions).
    """

    __slots__ = ("knots", "pieces", "tail", "_hash")

    def __init__(self, knots: Sequence, pieces: Sequence[Sequence], tail=0):
        knots = tuple(as_rational(k) for k in knots)
        pieces = [ptrim(as_rational(c) for c in p) for p in pieces]
        tail = as_rational(tail)
        if knots and len(pieces) != len(knots) - 1:
            raise ValueError("piece count must be knot count - 1")
        if not knots and pieces:
            raise ValueError("pieces given without knots")
        for a, b in zip(knots, knots[1:]):
            if not a < b:
                raise ValueError("knots must be strictly increasing")
        ks, ps = _canonical(list(knots), pieces, tail)
        self.knots: Tuple[Fraction, ...] = ks
        self.pieces: Tuple[Poly, ...] = ps
        self.tail: Fraction = tail
        self._hash = None

    # construction helpers
    @classmethod
    def zero(cls) -> "PiecewisePoly":
        return cls((), ())

    @classmethod
    def on_interval(cls, a, b, coeffs: Sequence) -> "PiecewisePoly":
        return cls((a, b), (tuple(coeffs),))

    # identity
    def key(self):
        return (self.knots, self.pieces, self.tail)

    def __eq__(self, other) -> bool:
        return isinstance(other, PiecewisePoly) and self.key() == other.key()

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.key())
        return self._hash

    def __repr__(self) -> str:
        return f"PiecewisePoly(knots={[str(k) for k in self.knots]}, pieces={[[str(c) for c in p] for p in self.pieces]}, tail={self.tail})"

    def is_zero(self) -> bool:
        return not self.knots and not self.tail

    @property
    def compact(self) -> bool:
        return not self.tail

    @property
    def degree(self) -> int:
        return max((len(p) - 1 for p in self.pieces), default=-1)

    def support(self) -> Optional[Tuple[Fraction, Fraction]]:
        if not self.knots:
            return None
        return self.knots[0], self.knots[-1]

    # evaluation
    def piece_at(self, x: Fraction, side: str = "right") -> Poly:
        x = as_rational(x)
        if not self.knots:
            return (self.tail,) if self.tail else ()
        if side == "right":
            idx = bisect_right(self.knots, x) - 1
        else:
            idx = bisect_left(self.knots, x) - 1
        if idx < 0:
            return ()
        if idx >= len(self.pieces):
            return (self.tail,) if self.tail else ()
        return self.pieces[idx]

    def __call__(self, x, side: str = "right") -> Fraction:
        return peval(self.piece_at(x, side), as_rational(x))

    # refinement
    def on_knots(self, knots: Sequence[Fraction]) -> List[Poly]:
        """Pieces on the (finer) knot vector; every own knot must belong to it."""
        own = set(self.knots)
        if not own.issubset(knots):
            raise ValueError("target knot vector does not refine this function")
        out = []
        for a, b in zip(knots, knots[1:]):
            out.append(self._piece_between(a, b))
        return out

    def _piece_between(self, a: Fraction, b: Fraction) -> Poly:
        if not self.knots or b <= self.knots[0]:
            return ()
        if a >= self.knots[-1]:
            return (self.tail,) if self.tail else ()
        idx = bisect_right(self.knots, a) - 1
        return self.pieces[idx]

    # arithmetic
    def _binary(self, other: "PiecewisePoly", op) -> "PiecewisePoly":
        knots = sorted(set(self.knots) | set(other.knots))
        a = self.on_knots(knots)
        b = other.on_knots(knots)
        return PiecewisePoly(knots, [op(x, y) for x, y in zip(a, b)], _tail_op(op, self.tail, other.tail))

    def __add__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        return self._binary(other, padd)

    def __neg__(self) -> "PiecewisePoly":
        return self.scale(-ONE)

    def __sub__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        return self + (-other)

    def scale(self, s) -> "PiecewisePoly":
        s = as_rational(s)
        if not s:
            return PiecewisePoly.zero()
        return PiecewisePoly(self.knots, [pscale(p, s) for p in self.pieces], self.tail * s)

    def __mul__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        return self._binary(other, pmul)

    def derivative(self) -> "PiecewisePoly":
        return PiecewisePoly(self.knots, [pderiv(p) for p in self.pieces])

    def integral(self, lo=None, hi=None) -> Fraction:
        """Integral over [lo, hi] (default: the knot span; a nonzero tail is refused)."""
        if lo is None and hi is None:
            if self.tail:
                raise ValueError("integral over R of a function with a nonzero tail")
            return sum((pintegral(p, a, b) for p, a, b in zip(self.pieces, self.knots, self.knots[1:])), ZERO)
        lo = as_rational(lo) if lo is not None else (self.knots[0] if self.knots else ZERO)
        hi = as_rational(hi) if hi is not None else (self.knots[-1] if self.knots else ZERO)
        if hi < lo:
            return -self.integral(hi, lo)
        knots = sorted(set(self.knots) | {lo, hi})
        total = ZERO
        for a, b in zip(knots, knots[1:]):
            if a >= lo and b <= hi:
                total += pintegral(self._piece_between(a, b), a, b)
        if self.knots and hi > self.knots[-1] and self.tail:
            total += self.tail * (hi - max(lo, self.knots[-1]))
        return total

    def cumulative(self) -> "PiecewisePoly":
        """x -> integral from -infinity to x; the result has a tail iff the total integral is nonzero."""
        if self.tail:
            raise ValueError("cumulative integral of a function with a nonzero tail")
        acc = ZERO
        out = []
        for p, a, b in zip(self.pieces, self.knots, self.knots[1:]):
            F = pantideriv(p)
            out.append(padd(F, (acc - peval(F, a),)))
            acc += peval(F, b) - peval(F, a)
        return PiecewisePoly(self.knots, out, acc)

    # serialization
    def to_json(self) -> dict:
        d = {"knots": [rational_str(k) for k in self.knots],
             "pieces": [[rational_str(c) for c in p] for p in self.pieces]}
        if self.tail:
            d["tail"] = rational_str(self.tail)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "PiecewisePoly":
        return cls(d["knots"], d["pieces"], d.get("tail", 0))


def _tail_op(op, s: Fraction, t: Fraction) -> Fraction:
    r = op((s,) if s else (), (t,) if t else ())
    if len(r) > 1:
        raise ValueError("tails must stay constant")
    return r[0] if r else ZERO


def _canonical(knots: List[Fraction], pieces: List[Poly], tail: Fraction):
    if not knots:
        return (), ()
    # merge identical neighbours
    ks = [knots[0]]
    ps: List[Poly] = []
    for k, p in zip(knots[1:], pieces):
        if ps and ps[-1] == p:
            ks[-1] = k
        else:
            ps.append(p)
            ks.append(k)
    # strip zero pieces at both ends (the right end only when the tail is zero)
    while ps and not ps[0]:
        ps.pop(0)
        ks.pop(0)
    if not tail:
        while ps and not ps[-1]:
            ps.pop()
            ks.pop()
    else:
        while ps and ps[-1] == (tail,):
            ps.pop()
            ks.pop()
    if not ps:
        if tail:
            return (ks[0],), ()
        return (), ()
    return tuple(ks), tuple(ps)


# -- intervals and forms ------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """Open interval (a, b); ``None`` marks an infinite end, so Interval() is R."""

    a: Optional[Fraction] = None
    b: Optional[Fraction] = None

    def __post_init__(self):
        a = None if self.a is None else as_rational(self.a)
        b = None if self.b is None else as_rational(self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if a is not None and b is not None and not a < b:
            raise ValueError(f"empty interval ({a}, {b})")

    @property
    def bounded(self) -> bool:
        return self.a is not None and self.b is not None

    @property
    def dim(self) -> int:
        return 1

    def contains(self, other: "Interval") -> bool:
        lo_ok = self.a is None or (other.a is not None and other.a >= self.a)
        hi_ok = self.b is None or (other.b is not None and other.b <= self.b)
        return lo_ok and hi_ok

    def disjoint(self, other: "Interval") -> bool:
        if self.b is not None and other.a is not None and self.b <= other.a:
            return True
        if other.b is not None and self.a is not None and other.b <= self.a:
            return True
        return False

    def contains_span(self, lo: Fraction, hi: Fraction) -> bool:
        return (self.a is None or lo >= self.a) and (self.b is None or hi <= self.b)

    def __str__(self) -> str:
        a = "-inf" if self.a is None else str(self.a)
        b = "inf" if self.b is None else str(self.b)
        return f"({a},{b})"

    def to_json(self) -> dict:
        return {"kind": "interval",
                "intervals": [[None if self.a is None else rational_str(self.a),
                               None if self.b is None else rational_str(self.b)]]}


REAL_LINE = Interval()


class Form1D:
    """A degree 0 or 1 compactly supported form f or f dx."""

    __slots__ = ("degree", "coeff", "_hash")

    def __init__(self, degree: int, coeff: PiecewisePoly):
        if degree not in (0, 1):
            raise ValueError("1D forms have degree 0 or 1")
        self.degree = degree
        self.coeff = coeff
        self._hash = None

    @classmethod
    def zero(cls, degree: int) -> "Form1D":
        return cls(degree, PiecewisePoly.zero())

    def key(self):
        return (self.degree, self.coeff.key())

    def __eq__(self, other) -> bool:
        return isinstance(other, Form1D) and self.key() == other.key()

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.key())
        return self._hash

    def __repr__(self) -> str:
        return f"Form1D({self.degree}, {self.coeff!r})"

    def is_zero(self) -> bool:
        return self.coeff.is_zero()

    @property
    def dim(self) -> int:
        return 1

    def __add__(self, other: "Form1D") -> "Form1D":
        # a zero form carries no trustworthy degree (h of a 0-form, say)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.degree != other.degree:
            raise ValueError(f"adding forms of degrees {self.degree} and {other.degree}")
        return Form1D(self.degree, self.coeff + other.coeff)

    def __sub__(self, other: "Form1D") -> "Form1D":
        return self + (-other)

    def __neg__(self) -> "Form1D":
        return Form1D(self.degree, -self.coeff)

    def scale(self, s) -> "Form1D":
        return Form1D(self.degree, self.coeff.scale(s))

    def __rmul__(self, s) -> "Form1D":
        return self.scale(s)

    def leading(self) -> Fraction:
        """First nonzero coefficient in key order (used to normalize factors)."""
        for p in self.coeff.pieces:
            for c in p:
                if c:
                    return c
        return self.coeff.tail

    def support_span(self) -> Optional[Tuple[Fraction, Fraction]]:
        return self.coeff.support()

    def supported_in(self, D: Interval) -> bool:
        span = self.coeff.support()
        if span is None:
            return True
        if self.coeff.tail:
            return D.b is None and (D.a is None or span[0] >= D.a)
        return D.contains_span(*span)

    def is_valid(self) -> bool:
        """Degree-0 forms must be continuous and vanish at the outer knots."""
        if self.degree == 1:
            return not self.coeff.tail
        c = self.coeff
        if not c.knots:
            return not c.tail
        vals_left = [peval(p, a) for p, a in zip(c.pieces, c.knots)]
        vals_right = [peval(p, b) for p, b in zip(c.pieces, c.knots[1:])]
        if not vals_left or vals_left[0] != 0:
            return not vals_left and not c.tail
        for r, l in zip(vals_right, vals_left[1:]):
            if r != l:
                return False
        return vals_right[-1] == c.tail

    def to_json(self) -> dict:
        d = {"degree": self.degree}
        d.update(self.coeff.to_json())
        return d

    @classmethod
    def from_json(cls, d: dict) -> "Form1D":
        return cls(int(d["degree"]), PiecewisePoly.from_json(d))


# -- constructors -------------------------------------------------------------

def box1(a, b, height=1) -> Form1D:
    """height * dx on (a, b)."""
    return Form1D(1, PiecewisePoly.on_interval(a, b, (as_rational(height),)))


def hat1(a, m, b, peak=1) -> Form1D:
    """Continuous piecewise-linear 0-form, zero outside (a, b), value ``peak`` at m."""
    a, m, b, peak = map(as_rational, (a, m, b, peak))
    up = (-a * peak / (m - a), peak / (m - a))
    down = (b * peak / (b - m), -peak / (b - m))
    return Form1D(0, PiecewisePoly((a, m, b), (up, down)))


def bump1(D: Interval) -> Form1D:
    """Normalized box 1-form of height 1/(b - a) on D."""
    if not D.bounded:
        raise ValueError("bump1 needs a bounded interval")
    return box1(D.a, D.b, 1 / (D.b - D.a))


# -- operations ---------------------------------------------------------------

def d1(f: Form1D) -> Form1D:
    if f.degree == 1:
        return Form1D.zero(1)
    return Form1D(1, f.coeff.derivative())


def wedge1(f: Form1D, g: Form1D) -> Form1D:
    """Pointwise product; degree overflow gives the zero top form."""
    deg = f.degree + g.degree
    if deg > 1:
        return Form1D.zero(1)
    return Form1D(deg, f.coeff * g.coeff)


def integrate1(f: Form1D, over: Optional[Interval] = None) -> Fraction:
    if over is None or (over.a is None and over.b is None):
        return f.coeff.integral()
    return f.coeff.integral(over.a, over.b)


def indefinite_integral(w: Form1D) -> Form1D:
    """Primitive vanishing left of the support (carries a constant tail when the total is nonzero)."""
    if w.degree != 1:
        raise ValueError("indefinite_integral takes a 1-form")
    return Form1D(0, w.coeff.cumulative())


def sdr_interval(D: Interval, omega_D: Optional[Form1D] = None):
    """(p_D, i_D, h_D) on compactly supported forms in D.

    p_D = integral, i_D(k) = k omega_D and h_D = -h^r_D where the unsigned
    inverse of d on 1-forms is h^r(w) = int(w - omega_D int_D w).
    """
    from .sdr_calculus import Sdr

    if omega_D is None:
        omega_D = bump1(D)
    if omega_D.degree != 1 or not omega_D.supported_in(D) or integrate1(omega_D) != 1:
        raise ValueError(f"omega_D must be a 1-form supported in {D} with integral 1")

    def check(w: Form1D) -> None:
        if not w.supported_in(D):
            raise ValueError(f"form not supported in {D}")

    def p(w: Form1D) -> Fraction:
        check(w)
        return integrate1(w) if w.degree == 1 else ZERO

    def i(k) -> Form1D:
        return omega_D.scale(as_rational(k))

    def h(w: Form1D) -> Form1D:
        check(w)
        if w.degree == 0:
            return Form1D.zero(0)
        return -indefinite_integral(w - omega_D.scale(integrate1(w)))

    return Sdr(
        p=p, i=i, h=h,
        d_big=d1, d_small=lambda k: ZERO,
        name=f"interval{D}", theory="forms",
        small_degree=lambda k: 1,
    )


def h_unsigned(D: Interval, omega_D: Form1D, w: Form1D) -> Form1D:
    """h^r_D on 1-forms: int(w - omega_D int w)."""
    return indefinite_integral(w - omega_D.scale(integrate1(w)))
