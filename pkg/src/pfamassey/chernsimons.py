"""Linear Chern-Simons theory on R^2 x S^1, compactified along the circle.

The circle's de Rham algebra is replaced by its formal model Lambda(theta)
with zero homotopy, so chains are Sym(Omega_c(R^2)[2] (x) Lambda(theta)) with
d_dR[2] + Delta_BV and cohomology Sym([1], [theta]) with [1] in degree 0 and
[theta] in degree 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence

from .chains import Chain, ChainTheory, bv_laplacian, d_total, is_zero
from .envelopes import biderivation, d_total_samples
from .forms2d import HomotopyBudget
from .pfa_trees import PfaOperation
from .transfer_massey import LConfiguration, TheoryContext, l_invariant, strict_mu

ONE_LABEL, THETA_LABEL = 0, 1


@dataclass
class CsTheory:
    ctx: TheoryContext
    certificates: Dict[str, bool] = field(default_factory=dict)

    @property
    def theory(self) -> ChainTheory:
        return self.ctx.theory

    def generators(self) -> List[Chain]:
        return self.ctx.generators()

    def bracket(self, a: Chain, b: Chain) -> Chain:
        return cs_bracket(self.theory, a, b)


def build_cs(budget: HomotopyBudget = HomotopyBudget(), reference=None, verify: bool = True) -> CsTheory:
    th = ChainTheory("chernSimons", 2)
    ctx = TheoryContext(th, budget, reference, verify)
    cs = CsTheory(ctx)
    cs.certificates["d_total^2 = 0"] = all(is_zero(d_total(th, d_total(th, c))) for c in d_total_samples(ctx))
    i_real = ctx.global_sdr.i
    cs.certificates["Delta_BV i = 0"] = all(is_zero(bv_laplacian(th, i_real(a))) for a in ctx.small_samples())
    failed = [k for k, ok in cs.certificates.items() if not ok]
    if failed:
        raise ArithmeticError(f"Chern-Simons certificates failed: {failed}")
    return cs


def cs_structure_maps(cs: CsTheory, op: PfaOperation, args: Sequence[Chain]) -> Chain:
    return strict_mu(cs.ctx, op, args)


def cs_table(theory: ChainTheory):
    """{[1], [theta]} = {[theta], [1]} = 1, all other generator brackets vanish."""
    def table(i: int, j: int) -> Chain:
        return Chain.one() if {i, j} == {ONE_LABEL, THETA_LABEL} else Chain()
    return table


def cs_bracket(theory: ChainTheory, a: Chain, b: Chain) -> Chain:
    return biderivation(theory, cs_table(theory), a, b)


def cs_l_invariant(cs: CsTheory, config: LConfiguration, a: Chain, b: Chain) -> Chain:
    return l_invariant(cs.ctx, config, a, b)
