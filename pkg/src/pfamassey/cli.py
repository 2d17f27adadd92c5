"""Command-line front end: exact JSON certificates and text tables.

Exit codes: 0 all certificates pass, 1 configuration error, 2 mathematical
mismatch, 3 homotopy budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import lie as lie_mod
from .chains import Chain, ChainTheory, chains_equal, is_zero, to_json, to_str
from .exact_core import rational_str
from .forms1d import Interval
from .forms2d import BudgetExhausted, DiskRegion, HomotopyBudget

SCHEMA_VERSION = "1.0"

EXIT_OK, EXIT_CONFIG, EXIT_MISMATCH, EXIT_BUDGET = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    theory: str = "envelope"
    lie: str = "h3"
    m: int = 2
    budget: HomotopyBudget = field(default_factory=HomotopyBudget)
    reference: Optional[list] = None
    configuration: object = "default"
    pairs: List[List[str]] = field(default_factory=list)

    def lie_algebra(self) -> lie_mod.LieAlgebra:
        return resolve_lie(self.lie)

    def reference_disks(self):
        if self.reference is None:
            return None
        if self.m == 1:
            a, b = self.reference
            return Interval(a, b)
        (a, b), (c, d) = self.reference
        return Interval(a, b), Interval(c, d)

    def to_json(self) -> dict:
        return {"theory": self.theory, "lieAlgebra": self.lie if self.theory == "envelope" else None, "m": self.m,
                "budget": {"maxPolyDegree": self.budget.maxPolyDegree, "gridRefinement": self.budget.gridRefinement},
                "referenceDisks": self.reference,
                "configuration": self.configuration if isinstance(self.configuration, str) else "inline"}


def resolve_lie(spec) -> lie_mod.LieAlgebra:
    if isinstance(spec, dict):
        return lie_mod.from_dict(spec)
    if spec in lie_mod.BUILTIN_NAMES:
        return lie_mod.builtin(spec)
    p = Path(spec)
    if not p.exists():
        raise ConfigError(f"Lie algebra {spec!r} is neither a shipped name {lie_mod.BUILTIN_NAMES} nor a file")
    return lie_mod.load(p)


def load_config_file(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file {path} does not exist")
    text = p.read_text()
    if p.suffix == ".toml":
        return lie_mod.tomllib.loads(text)
    return json.loads(text)


def build_run_config(args: argparse.Namespace, default_m: int) -> RunConfig:
    raw = load_config_file(args.config) if args.config else {}
    known = {"theory", "lieAlgebra", "m", "budget", "referenceDisks", "configuration", "pairs", "grid"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    cfg = RunConfig(m=default_m)
    cfg.theory = raw.get("theory", cfg.theory)
    if cfg.theory not in ("envelope", "chernSimons"):
        raise ConfigError(f"theory must be envelope or chernSimons, not {cfg.theory!r}")
    cfg.lie = raw.get("lieAlgebra", cfg.lie)
    cfg.m = int(raw.get("m", default_m))
    budget = dict(raw.get("budget", {}))
    grid = dict(raw.get("grid", {}))
    if set(grid) - {"refinement"}:
        raise ConfigError(f"grid only takes 'refinement', got {sorted(grid)}")
    if "refinement" in grid:
        budget["gridRefinement"] = grid["refinement"]
    if getattr(args, "budget_degree", None) is not None:
        budget["maxPolyDegree"] = args.budget_degree
    try:
        cfg.budget = HomotopyBudget(**budget)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad budget {budget}: {exc}") from None
    cfg.reference = raw.get("referenceDisks")
    cfg.configuration = raw.get("configuration", "default")
    if getattr(args, "configuration", None):
        cfg.configuration = args.configuration
    cfg.pairs = [list(p) for p in raw.get("pairs", [])]
    if getattr(args, "lie", None):
        cfg.lie = args.lie
    if cfg.theory == "chernSimons" and cfg.m != 2:
        raise ConfigError("the Chern-Simons theory is two-dimensional")
    if cfg.m not in (1, 2):
        raise ConfigError("m must be 1 or 2")
    return cfg


def parse_monomial(theory: ChainTheory, text: str) -> Chain:
    """Whitespace separated generator names with optional ^k, e.g. "X^2 Y" or "[1] [θ]"."""
    aliases = {"1": "[1]", "theta": "[θ]", "θ": "[θ]"}
    names = list(theory.labels)
    out = Chain.one()
    for token in text.split():
        name, _, power = token.partition("^")
        name = aliases.get(name, name) if theory.kind == "chernSimons" else name
        if name not in names:
            raise ConfigError(f"unknown generator {name!r}; expected one of {names}")
        from .chains import generator
        g = generator(theory, names.index(name))
        for _ in range(int(power or 1)):
            out = out * g
    return out


def _q(x: Fraction) -> str:
    return rational_str(Fraction(x))


def _chain_record(theory: ChainTheory, c: Chain) -> dict:
    return {"text": to_str(theory, c), "terms": to_json(theory, c)}


# -- commands -------------------------------------------------------------------------

def cmd_gutt(cfg: RunConfig, n: int, verify_transfer: bool) -> dict:
    from .envelopes import build_envelope, gutt_closed, gutt_via_transfer
    g = cfg.lie_algebra()
    env = build_envelope(g, 1, cfg.budget, cfg.reference_disks()) if verify_transfer else None
    th = ChainTheory("envelope", 1, g)
    rows = []
    ok = True
    for i, x in enumerate(g.basis_names):
        for j, y in enumerate(g.basis_names):
            closed = gutt_closed(g, n, g.basis(i), g.basis(j))
            row = {"x": x, "y": y, "n": n, "closed": _chain_record(th, closed)}
            if env is not None:
                transfer = gutt_via_transfer(env, n, g.basis(i), g.basis(j))
                diff = closed - transfer
                match = is_zero(diff)
                ok = ok and match
                row.update(transfer=_chain_record(th, transfer), difference=_chain_record(th, diff), match=match)
            rows.append(row)
    return {"command": "gutt", "lieAlgebra": g.to_json(), "rows": rows,
            "certificates": {"transfer = closed form": ok} if verify_transfer else {},
            "status": "pass" if ok else "mismatch"}


def cmd_eta(n: int) -> dict:
    from .envelopes import bernoulli_target, eta_sequence
    if n < 1:
        raise ConfigError("--n must be at least 1 for eta")
    rows = []
    ok = True
    for j, (_, total) in enumerate(eta_sequence(n)):
        expected = bernoulli_target(n, j)
        rows.append({"j": j, "integral": _q(total), "expected": _q(expected), "match": total == expected})
        ok = ok and total == expected
    return {"command": "eta", "n": n, "rows": rows, "certificates": {"Bernoulli recurrence": ok},
            "status": "pass" if ok else "mismatch"}


def _theory_for(cfg: RunConfig):
    if cfg.theory == "chernSimons":
        from .chernsimons import build_cs
        return build_cs(cfg.budget, cfg.reference_disks())
    from .envelopes import build_envelope
    if cfg.m != 2:
        raise ConfigError("this command needs the m = 2 envelope or the Chern-Simons theory")
    return build_envelope(cfg.lie_algebra(), 2, cfg.budget, cfg.reference_disks())


def _configuration(cfg: RunConfig):
    from .transfer_massey import LConfiguration, configuration
    if isinstance(cfg.configuration, str):
        try:
            return configuration(cfg.configuration)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return LConfiguration.from_json(cfg.configuration)


def cmd_massey(cfg: RunConfig, corrupt: bool = False) -> dict:
    from .envelopes import default_phi_tree, phi, phi0
    from .transfer_massey import (cocycle_residual, corrupted, massey_beta2, massey_beta2_direct,
                                  standard_cocycle_trees, standard_fork)
    T = _theory_for(cfg)
    ctx, th = T.ctx, T.theory
    tree = default_phi_tree()
    p0, p = phi0(ctx, tree), phi(ctx, tree)
    gens = T.generators()
    pairs = [(parse_monomial(th, a), parse_monomial(th, b), f"{a} | {b}") for a, b in cfg.pairs] or \
        [(a, b, f"{to_str(th, a)} | {to_str(th, b)}") for a in gens for b in gens]
    certs: Dict[str, bool] = {}
    values = []
    for A, B, label in pairs:
        beta = massey_beta2(ctx, tree, [A, B])
        direct = massey_beta2_direct(ctx, tree, [A, B])
        expected = T.bracket(A, B).scale(p0)
        values.append({"args": label, "beta": _chain_record(th, beta), "phi0Bracket": _chain_record(th, expected),
                       "match": chains_equal(beta, expected), "directRouteMatch": chains_equal(beta, direct)})
    certs["beta = phi0 {A, B}"] = all(v["match"] for v in values)
    certs["difference formula = improved transfer"] = all(v["directRouteMatch"] for v in values)
    fork = standard_fork()
    fork_vals = [massey_beta2(ctx, fork, [a, b]) for a in gens for b in gens]
    certs["fork trees vanish"] = all(is_zero(v) for v in fork_vals)
    residuals = []
    for tr, args in standard_cocycle_trees(gens):
        beta = massey_beta2
        if corrupt:
            target = cocycle_residual(ctx, tr, args).control_tree()
            if target is not None:
                beta = corrupted(massey_beta2, target)
        r = cocycle_residual(ctx, tr, args, beta=beta)
        residuals.append({"shape": r.shape, "residual": _chain_record(th, r.residual), "vanishes": r.vanishes()})
    certs["cocycle residuals vanish"] = all(r["vanishes"] for r in residuals)
    ok = all(certs.values())
    return {"command": "massey", "config": cfg.to_json(), "phi0": _q(p0), "phi": _q(p),
            "tree": tree.to_json(), "values": values, "cocycleResiduals": residuals,
            "certificates": certs, "status": "pass" if ok else "mismatch"}


def cmd_l_invariant(cfg: RunConfig) -> dict:
    from .envelopes import sym_monomials
    from .transfer_massey import l_invariant, poisson_residuals, second_configuration
    T = _theory_for(cfg)
    ctx, th = T.ctx, T.theory
    config = _configuration(cfg)
    problems = config.validate()
    if problems:
        raise ConfigError("invalid L configuration: " + "; ".join(problems))
    other = second_configuration() if config.name != "second" else _configuration(RunConfig(configuration="default"))
    gens = T.generators()
    names = list(th.labels)
    matrix = []
    certs: Dict[str, bool] = {}
    agree = same = True
    for i, a in enumerate(gens):
        row = []
        for j, b in enumerate(gens):
            L = l_invariant(ctx, config, a, b)
            L2 = l_invariant(ctx, other, a, b)
            expected = T.bracket(a, b)
            agree = agree and chains_equal(L, expected)
            same = same and chains_equal(L, L2)
            row.append({"x": names[i], "y": names[j], "L": _chain_record(th, L)})
        matrix.append(row)
    certs["L = bracket on generators"] = agree
    certs["configuration independence"] = same

    def L(a, b):
        return l_invariant(ctx, config, a, b)
    res = poisson_residuals(L, th, sym_monomials(th, 2), gens)
    for k, bad in res.items():
        certs[k] = not bad
    ok = all(certs.values())
    return {"command": "l-invariant", "config": cfg.to_json(), "configuration": config.to_json(),
            "comparedWith": other.name, "matrix": matrix, "certificates": certs,
            "status": "pass" if ok else "mismatch"}


# -- rendering ------------------------------------------------------------------------

def render(report: dict) -> str:
    lines = [f"{report['command']}: {report['status'].upper()}"]
    cmd = report["command"]
    if cmd == "gutt":
        for r in report["rows"]:
            line = f"  {r['x']}^{r['n']}⋆{r['y']} = {r['closed']['text']}"
            if "match" in r:
                line += f"    transfer: {r['transfer']['text']}    {'MATCH' if r['match'] else 'MISMATCH'}"
            lines.append(line)
    elif cmd == "eta":
        lines.append("  j  integral  expected  match")
        for r in report["rows"]:
            lines.append(f"  {r['j']}  {r['integral']}  {r['expected']}  {r['match']}")
    elif cmd == "massey":
        lines.append(f"  phi0 = {report['phi0']}   phi = {report['phi']}")
        for v in report["values"]:
            lines.append(f"  beta({v['args']}) = {v['beta']['text']}   [{'ok' if v['match'] else 'MISMATCH'}]")
        for r in report["cocycleResiduals"]:
            lines.append(f"  cocycle {r['shape']}: residual {r['residual']['text']}")
    elif cmd == "l-invariant":
        for row in report["matrix"]:
            lines.append("  " + "   ".join(f"L({e['x']},{e['y']}) = {e['L']['text']}" for e in row))
    for k, v in report.get("certificates", {}).items():
        lines.append(f"  [{'PASS' if v else 'FAIL'}] {k}")
    return "\n".join(lines)


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pfamassey", description="Exact Massey-product certificates for prefactorization algebras.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON or TOML run configuration")
        p.add_argument("--json", help="write the JSON report here ('-' for stdout)")
        p.add_argument("--budget-degree", type=int, dest="budget_degree", help="maxPolyDegree of the homotopy budget")

    p = sub.add_parser("gutt", help="Gutt star-product table X^n * Y")
    common(p)
    p.add_argument("--lie", help="shipped Lie algebra name or JSON/TOML file")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--verify-transfer", action="store_true", dest="verify_transfer")
    p = sub.add_parser("eta", help="Bernoulli recurrence table")
    common(p)
    p.add_argument("--n", type=int, default=2)
    p = sub.add_parser("massey", help="first-order Massey cocycle certificates")
    common(p)
    p.add_argument("--lie")
    p.add_argument("--debug-corrupt-sign", action="store_true", dest="debug_corrupt_sign")
    p = sub.add_parser("l-invariant", help="the L-invariant and its Poisson properties")
    common(p)
    p.add_argument("--lie")
    p.add_argument("--configuration", help="shipped disk configuration name")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gutt":
            report = cmd_gutt(build_run_config(args, 1), args.n, args.verify_transfer)
        elif args.command == "eta":
            report = cmd_eta(args.n)
        elif args.command == "massey":
            report = cmd_massey(build_run_config(args, 2), args.debug_corrupt_sign)
        else:
            report = cmd_l_invariant(build_run_config(args, 2))
    except BudgetExhausted as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report["schemaVersion"] = SCHEMA_VERSION
    text = dumps(report)
    if args.json == "-":
        sys.stdout.write(text)
    else:
        if args.json:
            Path(args.json).write_text(text)
        print(render(report))
    return EXIT_OK if report["status"] == "pass" else EXIT_MISMATCH


if __name__ == "__main__":
    sys.exit(main())
