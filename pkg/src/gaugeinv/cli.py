"""Command-line interface: analysis, invariant construction, gauging, verification.

Commands
--------
analyze <spec.json>
    Print the term-lattice classification and hypothesis flags.
invariants <spec.json> [--templates <file>] [--verify] [--seed K] [--format F]
    Construct the complete set of invariants (or run the staged template
    engine) and print the records with the completeness audit.
gauge <operator.json> --g <expr>
    Print the gauged operator e^{-g} L e^{g}.
verify <spec.json> --expr <expr> [--seed K]
    Print the verification report for one expression over the class.

Exit codes: 0 success, 1 parse error, 2 hypothesis/semantic error,
3 verification failure.

Template files are JSON of the form::

    {"check_closure": false,
     "stages": [
       {"templates": [
          {"prefactor": "a[1,1]",
           "factors": [{"powers": [[1, 0]], "shift": "p"},
                       {"powers": [[1, 0], [0, 1]], "shift": "r"}]}],
        "targets": [[2, 0], [1, 1], [0, 2]]}]}

Stages are cumulative: each stage adds its templates and targets to the
preceding ones and the whole parameter set is re-solved.  ``prefactor``
defaults to "1"; shifts and prefactors use the expression grammar.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import multiindex as mi
from .classify import ClassSpec, ClassSpecError, analyze
from .grammar import ExprParseError, parse_expr, print_expr
from .invariants import (
    HypothesisError,
    SolveError,
    TemplateNotClosedError,
    complete_set,
    upward_invariants_from_template,
)
from .jetalg import JetExpr, JetVariable, KIND_COEFF, KIND_GAUGE, Poly
from .opalg import DiffOperator, Factor, FactorTemplate, gauge
from .verify import DEFAULT_SEED, DeltaContext, UnknownCoefficientError, report

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_HYPOTHESIS = 2
EXIT_VERIFY = 3


# ---------------------------------------------------------------------------
# LaTeX emission (paper-style subscripts: a_{20xx}, g_{xy}).
# ---------------------------------------------------------------------------


def _latex_names(n: int) -> list[str]:
    return ["x", "y", "z"][:n] if n <= 3 else [f"x_{i}" for i in range(1, n + 1)]


def _latex_var(v: JetVariable, names: list[str]) -> str:
    base = v.base
    if base.kind == KIND_COEFF:
        head = "a"
        sub = "".join(map(str, base.vector))
    elif base.kind == KIND_GAUGE:
        head = base.name
        sub = ""
    else:
        head = base.name
        sub = ""
    sub += "".join(names[i] * k for i, k in enumerate(v.deriv))
    return f"{head}_{{{sub}}}" if sub else head


def _latex_frac(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    sign = "-" if c.numerator < 0 else ""
    return f"{sign}\\frac{{{abs(c.numerator)}}}{{{c.denominator}}}"


def _latex_poly(p: Poly, names: list[str]) -> str:
    if not p.terms:
        return "0"
    parts = []
    for mono, c in p.sorted_terms():
        body = " ".join(
            _latex_var(v, names) + (f"^{{{e}}}" if e > 1 else "")
            for v, e in mono
        )
        if not body:
            text = _latex_frac(c)
        elif c == 1:
            text = body
        elif c == -1:
            text = "-" + body
        else:
            text = _latex_frac(c) + " " + body
        if parts and not text.startswith("-"):
            parts.append("+ " + text)
        elif parts:
            parts.append("- " + text.lstrip("-"))
        else:
            parts.append(text)
    return " ".join(parts)


def latex_expr(e: JetExpr, dim: int | None = None) -> str:
    """Paper-style LaTeX for a JetExpr."""
    n = dim if dim is not None else _infer_dim(e)
    names = _latex_names(n)
    num = _latex_poly(e.num, names)
    if e.den.is_const():
        return num
    return f"\\frac{{{num}}}{{{_latex_poly(e.den, names)}}}"


def _infer_dim(e: JetExpr) -> int:
    for v in e.variables():
        return len(v.deriv)
    return 1


def latex_operator(L: DiffOperator) -> str:
    names = _latex_names(L.dim)
    parts = []
    for v in mi.sort_canonical(L.terms):
        c = L.terms[v]
        d = "".join(names[i] * k for i, k in enumerate(v))
        dtext = f"\\partial_{{{d}}}" if d else ""
        ctext = latex_expr(c, L.dim)
        if dtext and ctext == "1":
            ctext = ""
        elif " " in ctext or "+" in ctext[1:] or "-" in ctext[1:]:
            ctext = f"\\left({ctext}\\right)"
        parts.append((ctext + " " + dtext).strip())
    return " + ".join(parts) if parts else "0"


# ---------------------------------------------------------------------------
# Template file loading.
# ---------------------------------------------------------------------------


def load_templates(path: str, dim: int):
    """Parse a template file into (stages, stage_targets, check_closure)."""
    with open(path) as fh:
        data = json.load(fh)
    stages = []
    targets = []
    for stage in data["stages"]:
        templates = []
        for t in stage["templates"]:
            prefactor = parse_expr(str(t.get("prefactor", "1")), dim)
            factors = tuple(
                Factor(
                    tuple(tuple(map(int, w)) for w in f["powers"]),
                    parse_expr(str(f.get("shift", "0")), dim),
                )
                for f in t["factors"]
            )
            templates.append(FactorTemplate(dim, factors, prefactor))
        stages.append(templates)
        targets.append([tuple(map(int, v)) for v in stage["targets"]])
    return stages, targets, bool(data.get("check_closure", False))


# ---------------------------------------------------------------------------
# Commands.
# ---------------------------------------------------------------------------


def _emit(payload: dict, fmt: str, latex_lines: list[str]) -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    elif fmt == "latex":
        for line in latex_lines:
            print(line)
    else:
        _emit_text(payload)


def _emit_text(payload: dict, indent: int = 0) -> None:
    pad = "  " * indent
    for key, value in payload.items():
        if isinstance(value, dict):
            print(f"{pad}{key}:")
            _emit_text(value, indent + 1)
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            print(f"{pad}{key}:")
            for item in value:
                _emit_text(item, indent + 1)
                print()
        else:
            print(f"{pad}{key}: {value}")


def cmd_analyze(args) -> int:
    spec = ClassSpec.load(args.spec)
    an = analyze(spec)
    payload = an.to_json()
    _emit(payload, args.format, [json.dumps(payload)])
    if not (an.approximately_flat and an.framed):
        return EXIT_HYPOTHESIS
    return EXIT_OK


def cmd_invariants(args) -> int:
    spec = ClassSpec.load(args.spec)
    an = analyze(spec)
    if args.templates:
        stages, targets, closure = load_templates(args.templates, spec.dimension)
        records = upward_invariants_from_template(an, stages, targets, closure)
        audit = {"upward": len(records)}
    else:
        records, audit = complete_set(spec)
    if args.verify:
        ctx = DeltaContext.for_class(spec)
        for r in records:
            rep = report(r.expression, ctx, seed=args.seed)
            if not (rep["invariant"] and rep["numeric_check"]):
                print(
                    f"verification failed for {r.label}: "
                    f"residual {rep.get('residual', '?')}",
                    file=sys.stderr,
                )
                return EXIT_VERIFY
    payload = {"invariants": [r.to_json() for r in records], "audit": audit}
    latex_lines = [
        f"{r.label} &= {latex_expr(r.expression, spec.dimension)} \\\\"
        for r in records
    ]
    _emit(payload, args.format, latex_lines)
    return EXIT_OK


def cmd_gauge(args) -> int:
    with open(args.operator) as fh:
        L = DiffOperator.from_json(json.load(fh))
    gauged = gauge(L)
    if args.g is not None and args.g.strip() not in ("g", ""):
        g_expr = parse_expr(args.g, L.dim)
        from .jetalg import gauge_symbol
        gauged = gauged.substitute({gauge_symbol(): g_expr})
    payload = {"operator": gauged.to_json()}
    _emit(payload, args.format, [latex_operator(gauged)])
    return EXIT_OK


def cmd_verify(args) -> int:
    spec = ClassSpec.load(args.spec)
    E = parse_expr(args.expr, spec.dimension)
    ctx = DeltaContext.for_class(spec)
    rep = report(E, ctx, seed=args.seed)
    _emit(rep, args.format, [latex_expr(E, spec.dimension)])
    if not rep["invariant"]:
        return EXIT_VERIFY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaugeinv",
        description="Gauge (Laplace) invariants of linear PDE operator classes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument(
            "--format", choices=("json", "latex", "text"), default="json"
        )

    p = sub.add_parser("analyze", help="classify a class spec")
    p.add_argument("spec")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("invariants", help="construct invariants")
    p.add_argument("spec")
    p.add_argument("--templates", help="staged template JSON file")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common(p)
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("gauge", help="gauge-transform an operator")
    p.add_argument("operator")
    p.add_argument("--g", default=None, help="gauge function expression")
    common(p)
    p.set_defaults(func=cmd_gauge)

    p = sub.add_parser("verify", help="verify an expression over a class")
    p.add_argument("spec")
    p.add_argument("--expr", required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (json.JSONDecodeError, ExprParseError, FileNotFoundError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (
        ClassSpecError,
        HypothesisError,
        SolveError,
        TemplateNotClosedError,
        UnknownCoefficientError,
        ValueError,
        KeyError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS


if __name__ == "__main__":
    sys.exit(main())
