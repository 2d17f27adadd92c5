"""Strong deformation retracts (p, i, h) as values.

Conventions: ``h`` has degree -1 and satisfies d h + h d = i p - id on the
big complex, together with p i = id, h i = 0, p h = 0, h h = 0 and the chain
map conditions for p and i.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import factorial
from typing import Callable, Dict, List, Optional, Sequence

Map = Callable[[object], object]


def _is_zero(x) -> bool:
    if hasattr(x, "is_zero"):
        return x.is_zero()
    return x == 0


def _chain_zero(x) -> bool:
    """Chains may hide cancellations between linearly dependent factor forms."""
    if not hasattr(x, "terms"):
        return False
    from .chains import is_zero
    return is_zero(x)


@dataclass(frozen=True)
class Sdr:
    """A strong deformation retract from a big complex onto a small one."""

    p: Map
    i: Map
    h: Map
    d_big: Map
    d_small: Map
    name: str = "sdr"
    theory: str = "forms"
    small_degree: Optional[Callable[[object], int]] = None
    meta: Dict[str, object] = field(default_factory=dict)


IDENTITIES = ("d i", "d p", "p i", "d h", "h i", "p h", "h h")


def verify_sdr(s: Sdr, samples: Sequence, small_samples: Optional[Sequence] = None) -> Dict[str, List[tuple]]:
    """Exact residuals of the seven side conditions; an empty dict means all pass.

    ``samples`` live in the big complex; ``small_samples`` default to p(samples).
    """
    samples = list(samples)
    if small_samples is None:
        small_samples = [s.p(x) for x in samples]
    report: Dict[str, List[tuple]] = {}

    def record(name: str, idx: int, residual) -> None:
        if not _is_zero(residual) and not _chain_zero(residual):
            report.setdefault(name, []).append((idx, residual))

    for k, a in enumerate(small_samples):
        record("d i", k, s.d_big(s.i(a)) - s.i(s.d_small(a)))
        record("p i", k, s.p(s.i(a)) - a)
        record("h i", k, s.h(s.i(a)))
    for k, x in enumerate(samples):
        hx = s.h(x)
        record("d p", k, s.p(s.d_big(x)) - s.d_small(s.p(x)))
        record("d h", k, s.d_big(hx) + s.h(s.d_big(x)) - (s.i(s.p(x)) - x))
        record("p h", k, s.p(hx))
        record("h h", k, s.h(hx))
    return report


def _scaled(x, s: int):
    if s == 1 or _is_zero(x):
        return x
    return -x if not hasattr(x, "scale") else x.scale(s)


def shift(s: Sdr, k: int) -> Sdr:
    """The k-fold suspension: d and h pick up (-1)^k, p and i (degree 0) do not."""
    sign = -1 if k % 2 else 1
    return Sdr(
        p=s.p, i=s.i,
        h=lambda x: _scaled(s.h(x), sign),
        d_big=lambda x: _scaled(s.d_big(x), sign),
        d_small=lambda x: _scaled(s.d_small(x), sign),
        name=f"{s.name}[{k}]", theory=s.theory, small_degree=s.small_degree, meta=dict(s.meta, shift=k),
    )


def sym_weight(n: int, s: int) -> Fraction:
    """Share of the n! orderings with exactly s identity slots before the homotopy."""
    return Fraction(factorial(s) * factorial(n - 1 - s), factorial(n))


class SymLift:
    """Sym-lift of a generator-level retract of forms into a chain theory.

    Generator maps (with the suspension sign on h):
      p(label (x) w) = (integral of w) [label],  i([label]) = label (x) w_D,
      h(label (x) w) = (-1)^shift label (x) h_D(w).
    On a monomial v_1...v_n the homotopy is
      sum_k (-1)^(|v_1|+...+|v_{k-1}|) sum_{S} w(|S|) (id on S, h on v_k, i p elsewhere),
    S running over subsets of the other positions and w(s) = s!(n-1-s)!/n!;
    this is the average over all n! orderings.
    """

    def __init__(self, chain_theory, form_sdr: Sdr):
        self.theory = chain_theory
        self.form_sdr = form_sdr
        self._p: Dict[object, object] = {}
        self._i: Dict[object, object] = {}
        self._h: Dict[object, object] = {}
        self.h_sign = -1 if chain_theory.shift % 2 else 1

    # generator level: each returns (scalar, Factor) or None
    def p_gen(self, f):
        if f not in self._p:
            from .chains import make_factor
            val = Fraction(0) if f.form is None else self.form_sdr.p(f.form)
            self._p[f] = None if not val else (val, make_factor(self.theory, f.label, None)[1])
        return self._p[f]

    def i_gen(self, f):
        if f not in self._i:
            from .chains import make_factor
            self._i[f] = make_factor(self.theory, f.label, self.form_sdr.i(1))
        return self._i[f]

    def ip_gen(self, f):
        pf = self.p_gen(f)
        if pf is None:
            return None
        s, g = pf
        si, gi = self.i_gen(g)
        return s * si, gi

    def h_gen(self, f):
        if f not in self._h:
            from .chains import make_factor
            if f.form is None:
                self._h[f] = None
            else:
                made = make_factor(self.theory, f.label, self.form_sdr.h(f.form))
                self._h[f] = None if made is None else (self.h_sign * made[0], made[1])
        return self._h[f]

    def _tensor_map(self, c, gen):
        from .chains import Chain
        out = Chain()
        for mono, coef in c.terms.items():
            scal = coef
            factors = []
            for f in mono:
                r = gen(f)
                if r is None:
                    break
                scal *= r[0]
                factors.append(r[1])
            else:
                out._add_raw(factors, scal)
        return out

    def p(self, c):
        return self._tensor_map(c, self.p_gen)

    def i(self, c):
        return self._tensor_map(c, self.i_gen)

    def h(self, c):
        from .chains import Chain
        out = Chain()
        for mono, coef in c.terms.items():
            self._h_monomial(mono, coef, out)
        return out

    def _h_monomial(self, mono, coef, out) -> None:
        n = len(mono)
        ips = [self.ip_gen(f) for f in mono]
        left = 0
        for k in range(n):
            hk = self.h_gen(mono[k])
            if hk is not None:
                sign = -1 if left % 2 else 1
                others = [a for a in range(n) if a != k]
                forced = [a for a in others if ips[a] is None]
                free = [a for a in others if ips[a] is not None]
                for r in range(len(free) + 1):
                    for extra in combinations(free, r):
                        S = set(forced).union(extra)
                        scal = coef * sign * sym_weight(n, len(S)) * hk[0]
                        factors = []
                        for a in range(n):
                            if a == k:
                                factors.append(hk[1])
                            elif a in S:
                                factors.append(mono[a])
                            else:
                                scal *= ips[a][0]
                                factors.append(ips[a][1])
                        out._add_raw(factors, scal)
            left += mono[k].degree

    def sdr(self, name: str = "sym") -> Sdr:
        from .chains import Chain, d_dr_shifted
        theory = self.theory
        return Sdr(p=self.p, i=self.i, h=self.h,
                   d_big=lambda c: d_dr_shifted(theory, c), d_small=lambda c: Chain(),
                   name=name, theory=theory.kind, meta={"lift": self})


def lift_sym(chain_theory, form_sdr: Sdr, name: Optional[str] = None) -> Sdr:
    return SymLift(chain_theory, form_sdr).sdr(name or f"Sym({form_sdr.name})")


class PerturbationNotSmall(RuntimeError):
    """The perturbation series did not terminate within the declared bound."""


def _series(x, first: Map, step: Map, bound: int):
    """sum_j first((step)^j x), stopping when the iterate vanishes."""
    acc = None
    y = x
    for _ in range(bound + 1):
        if _is_zero(y):
            return acc if acc is not None else first(y)
        term = first(y)
        acc = term if acc is None else acc + term
        y = step(y)
    if not _is_zero(y):
        raise PerturbationNotSmall(f"perturbation series still nonzero after {bound} steps")
    return acc


def _sym_bound(x) -> int:
    return x.max_sym_degree() + 1 if hasattr(x, "max_sym_degree") else 16


def perturb(s: Sdr, delta: Map, sym_degree_bound: Optional[int] = None, small_samples: Sequence = ()) -> Sdr:
    """Homological perturbation of s by a small delta.

    p^ = sum p (delta h)^j, h^ = sum h (delta h)^j.  When delta i vanishes on the
    supplied samples, i and the small differential are kept, otherwise
    i^ = sum (h delta)^j i and d_small^ = d_small + p delta i^.
    """
    def bound(x) -> int:
        return sym_degree_bound if sym_degree_bound is not None else _sym_bound(x)

    def step(y):
        return delta(s.h(y))

    def p_hat(x):
        return _series(x, s.p, step, bound(x))

    def h_hat(x):
        return _series(x, s.h, step, bound(x))

    i_unchanged = all(_is_zero(delta(s.i(a))) for a in small_samples)
    if i_unchanged:
        i_hat = s.i
        d_small = s.d_small
    else:
        def i_hat(a):
            return _series(s.i(a), lambda y: y, lambda y: s.h(delta(y)), bound(s.i(a)))

        def d_small(a):
            return s.d_small(a) + s.p(delta(i_hat(a)))

    def d_big(x):
        return s.d_big(x) + delta(x)

    return Sdr(p=p_hat, i=i_hat, h=h_hat, d_big=d_big, d_small=d_small,
               name=f"perturbed({s.name})", theory=s.theory, small_degree=s.small_degree,
               meta=dict(s.meta, i_unchanged=i_unchanged, base=s))


def improve_locally_constant(local: Sdr, global_sdr: Sdr) -> Sdr:
    """Retract of a disk's complex onto the constant cohomology of R^m.

    i~ = i_D, p~ = p_{R^m} (extension by zero is the identity on our
    representation), h~ = h_D - i_D p_{R^m} h_D.  The identifications of the
    cohomologies of D and R^m are identities for both shipped theories.
    """
    def h_tilde(x):
        hx = local.h(x)
        return hx - local.i(global_sdr.p(hx))

    return Sdr(p=global_sdr.p, i=local.i, h=h_tilde, d_big=local.d_big, d_small=local.d_small,
               name=f"improved({local.name})", theory=local.theory, small_degree=local.small_degree,
               meta=dict(local.meta, improved=True))
