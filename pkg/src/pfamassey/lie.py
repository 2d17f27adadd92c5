"""Finite-dimensional Lie algebras over Q given by structure constants."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Tuple

from .exact_core import as_rational, rational_str

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

DATA_DIR = Path(__file__).with_name("data")

LieElement = Tuple[Fraction, ...]


@dataclass(frozen=True)
class LieAlgebra:
    """[e_i, e_j] = sum_k c[(i, j, k)] e_k; only nonzero constants are stored."""

    name: str
    basis_names: Tuple[str, ...]
    constants: Mapping[Tuple[int, int, int], Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (i, j, k), v in dict(self.constants).items():
            for idx in (i, j, k):
                if not 0 <= idx < self.dim:
                    raise ValueError(f"structure constant index {idx} outside dimension {self.dim}")
            v = as_rational(v)
            if v:
                clean[(i, j, k)] = v
        object.__setattr__(self, "constants", clean)
        table: Dict[Tuple[int, int], Dict[int, Fraction]] = {}
        for (i, j, k), v in clean.items():
            table.setdefault((i, j), {})[k] = v
        object.__setattr__(self, "_table", table)

    @property
    def dim(self) -> int:
        return len(self.basis_names)

    def index(self, name: str) -> int:
        try:
            return self.basis_names.index(name)
        except ValueError:
            raise ValueError(f"{name!r} is not a basis element of {self.name}") from None

    def basis(self, i: int) -> LieElement:
        return tuple(Fraction(int(k == i)) for k in range(self.dim))

    def element(self, coords: Sequence) -> LieElement:
        if len(coords) != self.dim:
            raise ValueError(f"expected {self.dim} coordinates, got {len(coords)}")
        return tuple(as_rational(c) for c in coords)

    def bracket_basis(self, i: int, j: int) -> Dict[int, Fraction]:
        return self._table.get((i, j), {})

    def is_abelian(self) -> bool:
        return not self.constants

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "basisNames": list(self.basis_names),
            "structureConstants": [[self.basis_names[i], self.basis_names[j], self.basis_names[k], rational_str(v)]
                                   for (i, j, k), v in sorted(self.constants.items())],
        }


def bracket(g: LieAlgebra, x: Sequence, y: Sequence) -> LieElement:
    if len(x) != g.dim or len(y) != g.dim:
        raise ValueError(f"elements must have {g.dim} coordinates")
    out = [Fraction(0)] * g.dim
    for (i, j, k), c in g.constants.items():
        if x[i] and y[j]:
            out[k] += c * as_rational(x[i]) * as_rational(y[j])
    return tuple(out)


def ad_power(g: LieAlgebra, x: Sequence, j: int, y: Sequence) -> LieElement:
    if j < 0:
        raise ValueError("ad power must be nonnegative")
    out = tuple(as_rational(c) for c in y)
    for _ in range(j):
        out = bracket(g, x, out)
    return out


def validate(g: LieAlgebra) -> List[str]:
    """All antisymmetry and Jacobi violations; an empty list means g is a Lie algebra."""
    problems = []
    n = g.dim
    names = g.basis_names
    for i in range(n):
        for j in range(n):
            for k in range(n):
                a = g.constants.get((i, j, k), 0)
                b = g.constants.get((j, i, k), 0)
                if a + b and i <= j:
                    problems.append(f"antisymmetry violated at ({names[i]}, {names[j]}, {names[k]})")
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                ei, ej, ek = g.basis(i), g.basis(j), g.basis(k)
                total = [Fraction(0)] * n
                for a, b, c in ((ei, ej, ek), (ej, ek, ei), (ek, ei, ej)):
                    t = bracket(g, a, bracket(g, b, c))
                    total = [u + v for u, v in zip(total, t)]
                if any(total):
                    problems.append(f"Jacobi violated at ({names[i]}, {names[j]}, {names[k]})")
    return problems


def from_dict(d: Mapping, name: str = "lie", check: bool = True) -> LieAlgebra:
    """Build from {basisNames, brackets: [{x, y, value: {name: rational}}]}.

    A bracket [x, y] implies [y, x] = -[x, y] unless the reverse is listed too.
    """
    if "basisNames" not in d:
        raise ValueError("Lie algebra description needs basisNames")
    names = tuple(str(s) for s in d["basisNames"])
    if len(set(names)) != len(names):
        raise ValueError("duplicate basis names")
    idx = {s: k for k, s in enumerate(names)}

    def lookup(s):
        if s not in idx:
            raise ValueError(f"unknown basis name {s!r}")
        return idx[s]

    given: Dict[Tuple[int, int, int], Fraction] = {}
    pairs = set()
    for entry in d.get("brackets", []):
        i, j = lookup(entry["x"]), lookup(entry["y"])
        pairs.add((i, j))
        for s, v in entry.get("value", {}).items():
            given[(i, j, lookup(s))] = given.get((i, j, lookup(s)), Fraction(0)) + as_rational(str(v))
    constants = dict(given)
    for (i, j, k), v in given.items():
        if (j, i) not in pairs:
            constants[(j, i, k)] = -v
    g = LieAlgebra(str(d.get("name", name)), names, constants)
    if check:
        problems = validate(g)
        if problems:
            raise ValueError("invalid Lie algebra: " + "; ".join(problems))
    return g


def load(path) -> LieAlgebra:
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".toml":
        d = tomllib.loads(text)
    else:
        d = json.loads(text)
    return from_dict(d, name=path.stem)


def builtin(name: str) -> LieAlgebra:
    """One of the shipped fixtures: abelian2, h3, sl2, aff2."""
    for suffix in (".json", ".toml"):
        p = DATA_DIR / f"{name}{suffix}"
        if p.exists():
            return load(p)
    raise ValueError(f"no shipped Lie algebra called {name!r}")


def abelian(n: int) -> LieAlgebra:
    return LieAlgebra(f"abelian{n}", tuple(f"A{k + 1}" for k in range(n)), {})


BUILTIN_NAMES = ("abelian2", "h3", "sl2", "aff2")
