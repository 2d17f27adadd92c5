"""Exact rational arithmetic helpers: Bernoulli numbers, binomials and sparse
Gaussian elimination over Q."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

Rational = Fraction
Vector = List[Fraction]


def as_rational(x) -> Fraction:
    """Coerce ints, Fractions and "num/den" strings to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def rational_str(x: Fraction) -> str:
    """Serialize as "num/den" (integers keep the /1 so the shape is uniform)."""
    x = as_rational(x)
    return f"{x.numerator}/{x.denominator}"


def binomial(n: int, k: int) -> Fraction:
    if n < 0 or k < 0:
        raise ValueError("binomial needs nonnegative arguments")
    if k > n:
        return Fraction(0)
    return Fraction(comb(n, k))


@lru_cache(maxsize=None)
def _bernoulli_table(j: int) -> Tuple[Fraction, ...]:
    table = [Fraction(1)]
    for k in range(1, j + 1):
        # sum_{r=0}^{k} C(k+1, r) B_r = 0, solved for B_k
        acc = sum((Fraction(comb(k + 1, r)) * table[r] for r in range(k)), Fraction(0))
        table.append(-acc / (k + 1))
    return tuple(table)


def bernoulli(j: int) -> Fraction:
    """B_j with B_1 = -1/2."""
    if j < 0:
        raise ValueError("bernoulli index must be nonnegative")
    return _bernoulli_table(j)[j]


@dataclass
class SparseMatrix:
    """rows x cols matrix over Q; only nonzero entries are stored."""

    rows: int
    cols: int
    entries: Dict[Tuple[int, int], Fraction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean = {}
        for (r, c), v in self.entries.items():
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise ValueError(f"entry ({r}, {c}) outside a {self.rows}x{self.cols} matrix")
            v = as_rational(v)
            if v:
                clean[(r, c)] = v
        self.entries = clean

    @classmethod
    def from_columns(cls, rows: int, columns: Sequence[Mapping[int, Fraction]]) -> "SparseMatrix":
        entries = {}
        for c, col in enumerate(columns):
            for r, v in col.items():
                if v:
                    entries[(r, c)] = v
        return cls(rows, len(columns), entries)

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence]) -> "SparseMatrix":
        nrows = len(rows)
        ncols = len(rows[0]) if nrows else 0
        entries = {}
        for r, row in enumerate(rows):
            if len(row) != ncols:
                raise ValueError("ragged dense matrix")
            for c, v in enumerate(row):
                v = as_rational(v)
                if v:
                    entries[(r, c)] = v
        return cls(nrows, ncols, entries)

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls(n, n, {(k, k): Fraction(1) for k in range(n)})

    def columns(self) -> List[Dict[int, Fraction]]:
        cols: List[Dict[int, Fraction]] = [dict() for _ in range(self.cols)]
        for (r, c), v in self.entries.items():
            cols[c][r] = v
        return cols

    def apply(self, x: Sequence) -> Vector:
        if len(x) != self.cols:
            raise ValueError(f"vector of length {len(x)} against {self.cols} columns")
        out = [Fraction(0)] * self.rows
        for (r, c), v in self.entries.items():
            xc = x[c]
            if xc:
                out[r] += v * xc
        return out

    def to_dense(self) -> List[Vector]:
        out = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out


def _axpy(target: Dict[int, Fraction], scale: Fraction, src: Mapping[int, Fraction]) -> None:
    for k, v in src.items():
        nv = target.get(k, Fraction(0)) + scale * v
        if nv:
            target[k] = nv
        else:
            target.pop(k, None)


class ColumnEchelon:
    """Incremental column reduction of a sparse matrix.

    Columns are processed left to right; each column is reduced against the
    pivots found so far and, if something survives, the smallest surviving row
    index becomes its pivot.  The columns that produce pivots form the fixed
    pivot-column complement of the kernel used by :func:`solve_in_image`.
    """

    def __init__(self, nrows: int, columns: Iterable[Mapping[int, Fraction]] = ()):
        self.nrows = nrows
        self.ncols = 0
        # pivot row -> (reduced column with 1 at pivot, combination of original columns)
        self._pivots: Dict[int, Tuple[Dict[int, Fraction], Dict[int, Fraction]]] = {}
        self.pivot_columns: List[int] = []
        self.pivot_rows: List[int] = []
        for col in columns:
            self.add_column(col)

    @property
    def rank(self) -> int:
        return len(self._pivots)

    def _reduce(self, vec: Mapping[int, Fraction]) -> Tuple[Dict[int, Fraction], Dict[int, Fraction]]:
        """Return (remainder, combo) with vec = remainder + sum combo[c] * column c."""
        rem = {k: as_rational(v) for k, v in vec.items() if v}
        combo: Dict[int, Fraction] = {}
        # stored pivot columns vanish on every other pivot row, so each
        # elimination step removes one pivot row for good
        while True:
            hits = [r for r in rem if r in self._pivots]
            if not hits:
                return rem, combo
            r = min(hits)
            coef = rem[r]
            col, comb_ = self._pivots[r]
            _axpy(rem, -coef, col)
            _axpy(combo, coef, comb_)

    def add_column(self, col: Mapping[int, Fraction]) -> Optional[int]:
        index = self.ncols
        self.ncols += 1
        for r in col:
            if not 0 <= r < self.nrows:
                raise ValueError(f"row index {r} outside {self.nrows} rows")
        rem, combo = self._reduce(col)
        if not rem:
            return None
        piv = min(rem)
        scale = 1 / rem[piv]
        rem = {k: v * scale for k, v in rem.items()}
        own = {k: -v * scale for k, v in combo.items()}
        own[index] = own.get(index, Fraction(0)) + scale
        # keep earlier pivot columns reduced with respect to the new pivot
        for r, (pcol, pcomb) in self._pivots.items():
            c = pcol.get(piv)
            if c:
                _axpy(pcol, -c, rem)
                _axpy(pcomb, -c, own)
        self._pivots[piv] = (rem, own)
        self.pivot_columns.append(index)
        self.pivot_rows.append(piv)
        return piv

    def solve(self, b: Mapping[int, Fraction]) -> Optional[Dict[int, Fraction]]:
        """Sparse x with A x = b, supported on pivot columns; None if b is not in the image."""
        rem, combo = self._reduce(b)
        if rem:
            return None
        return combo

    def in_image(self, b: Mapping[int, Fraction]) -> bool:
        return not self._reduce(b)[0]

    def complement_rows(self) -> List[int]:
        """Row indices whose unit vectors span a complement of the image."""
        taken = set(self._pivots)
        return [r for r in range(self.nrows) if r not in taken]


def _as_sparse(b: Sequence) -> Dict[int, Fraction]:
    return {k: as_rational(v) for k, v in enumerate(b) if v}


def solve_in_image(A: SparseMatrix, b: Sequence) -> Optional[Vector]:
    """Some x with A x = b, or None when b lies outside image(A)."""
    if len(b) != A.rows:
        raise ValueError(f"right-hand side of length {len(b)} against {A.rows} rows")
    ech = ColumnEchelon(A.rows, A.columns())
    sol = ech.solve(_as_sparse(b))
    if sol is None:
        return None
    x = [Fraction(0)] * A.cols
    for c, v in sol.items():
        x[c] = v
    return x


def complement_basis(A: SparseMatrix) -> List[Vector]:
    """Unit vectors e_r (r not a pivot row) spanning a complement of image(A)."""
    ech = ColumnEchelon(A.rows, A.columns())
    out = []
    for r in ech.complement_rows():
        v = [Fraction(0)] * A.rows
        v[r] = Fraction(1)
        out.append(v)
    return out


def rank(A: SparseMatrix) -> int:
    return ColumnEchelon(A.rows, A.columns()).rank


def kernel_basis(A: SparseMatrix) -> List[Vector]:
    """Basis of ker(A): one vector per non-pivot column."""
    ech = ColumnEchelon(A.rows)
    out: List[Vector] = []
    for c, col in enumerate(A.columns()):
        rem, combo = ech._reduce(col)
        if rem:
            ech.add_column(col)
            continue
        ech.ncols += 1
        v = [Fraction(0)] * A.cols
        v[c] = Fraction(1)
        for k, coef in combo.items():
            v[k] -= coef
        out.append(v)
    return out
