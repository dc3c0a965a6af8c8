"""Construction of complete sets of gauge invariants.

Four kinds of invariants are produced for a maximally generated,
approximately flat, framed class:

* maximal — the coefficients of the maximal terms themselves;
* extra — one per redundant submaximal gauge equation (s - n of them);
* compatibility — one per variable pair, from equating mixed partials of
  the solved g_{x_i} expressions (n(n-1)/2 of them);
* upward — one per interior vector v, of the form a_v - E, obtained from
  an incomplete factorization L = C + N.

Upward invariants come either from the generic constructor (the C_m sum of
shifted-factor products plus B_w correction operators) or from a
user-supplied staged template, both solved by exact elimination.  A
recursion for the bottom invariant of the totally hyperbolic class in any
dimension is also provided.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import jetalg
from . import multiindex as mi
from .classify import ClassAnalysis, ClassSpec, analyze, class_operator, phi
from .grammar import print_expr
from .jetalg import (
    BaseSymbol,
    JetExpr,
    JetVariable,
    KIND_COEFF,
    KIND_GAUGE,
    KIND_PARAM,
    ONE,
    Poly,
    ZERO,
    coeff_symbol,
    gauge_symbol,
    param_symbol,
    substitute,
)
from .multiindex import MultiIndex
from .opalg import DiffOperator, Factor, FactorTemplate, expand_sum, gauge


class HypothesisError(ValueError):
    """A hypothesis of the main construction fails for this class."""


class NotApproximatelyFlatError(HypothesisError):
    pass


class NotFramedError(HypothesisError):
    pass


class SolveError(ValueError):
    """A parameter solve is not uniquely possible."""


class TemplateNotClosedError(ValueError):
    """The template family is not closed under gauge transformations."""


def _vec_tag(v: MultiIndex) -> str:
    return "".join(map(str, v)) if all(x < 10 for x in v) else ",".join(map(str, v))


def _var_names(n: int) -> list[str]:
    return ["x", "y", "z"][:n] if n <= 3 else [f"x{i}" for i in range(1, n + 1)]


def delta_symbol(v: MultiIndex) -> BaseSymbol:
    """Parameter placeholder for Delta a_v in gradient solutions."""
    return param_symbol("D" + "_".join(map(str, v)))


def _delta_to_coeff(dim: int, vectors: Iterable[MultiIndex]) -> dict[BaseSymbol, JetExpr]:
    return {
        delta_symbol(v): JetExpr.symbol(coeff_symbol(v), dim=dim) for v in vectors
    }


@dataclass(frozen=True)
class Representation:
    """An incomplete factorization L = C + N backing an upward invariant."""

    templates: tuple[FactorTemplate, ...]
    bindings: dict[BaseSymbol, JetExpr]

    def to_json(self) -> dict:
        return {
            "template": " + ".join(t.text() for t in self.templates),
            "bindings": {
                s.text(): print_expr(e)
                for s, e in sorted(self.bindings.items(), key=lambda p: p[0].text())
            },
        }


@dataclass(frozen=True)
class InvariantRecord:
    kind: str  # maximal | extra | compatibility | upward
    label: str
    expression: JetExpr
    assumptions: tuple[JetExpr, ...] = ()
    target_vector: MultiIndex | None = None
    representation: Representation | None = None

    def __post_init__(self):
        if any(s.kind == KIND_GAUGE for s in self.expression.base_symbols()):
            raise ValueError(
                f"invariant {self.label} contains the gauge symbol"
            )

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "label": self.label,
            "expression": print_expr(self.expression),
            "assumptions": [print_expr(a) for a in self.assumptions],
        }
        if self.target_vector is not None:
            out["target_vector"] = list(self.target_vector)
        if self.representation is not None:
            out["representation"] = self.representation.to_json()
        return out


# Parameters appearing in a ClassSpec (symbolic maximal coefficients such
# as p, q in the five-order 3D class) are legitimate constituents of
# invariants; solver parameters are not, and must never leak into records.


def _spec_params(spec: ClassSpec) -> frozenset[BaseSymbol]:
    out: set[BaseSymbol] = set()
    for _, c in spec.maximal_terms:
        out |= {s for s in c.base_symbols() if s.kind == KIND_PARAM}
    return frozenset(out)


def _check_no_solver_params(
    expr: JetExpr, label: str, allowed: frozenset[BaseSymbol]
) -> None:
    bad = {
        s for s in expr.base_symbols()
        if s.kind == KIND_PARAM and s not in allowed
    }
    if bad:
        raise SolveError(
            f"invariant {label} contains unresolved parameters: "
            + ", ".join(sorted(b.text() for b in bad))
        )


@dataclass(frozen=True)
class GradientSolution:
    """The solved linear system Delta a_{v_i} = phi(v_i) . grad g."""

    analysis: ClassAnalysis
    chosen: tuple[MultiIndex, ...]
    gradient: tuple[JetExpr, ...]  # g_{x_i} as JetExpr in Delta symbols
    residual_vectors: tuple[MultiIndex, ...]
    assumptions: tuple[JetExpr, ...]


def _strip_content(e: JetExpr) -> JetExpr:
    """Divide out the rational content (nonvanishing of 2a is that of a)."""
    coeffs = list(e.num.terms.values())
    if not coeffs:
        return e
    num_gcd = 0
    den_lcm = 1
    for c in coeffs:
        num_gcd = math.gcd(num_gcd, abs(c.numerator))
        den_lcm = den_lcm * c.denominator // math.gcd(den_lcm, c.denominator)
    content = Fraction(num_gcd, den_lcm)
    # sign convention: positive constant term if there is one, else a
    # positive leading monomial (so 1 - 2ab stays put but -a becomes a)
    anchor = () if () in e.num.terms else min(e.num.terms, key=jetalg._mono_key)
    if e.num.terms[anchor] < 0:
        content = -content
    return e / JetExpr.const(content)


def _dedupe(exprs: Iterable[JetExpr]) -> tuple[JetExpr, ...]:
    out: list[JetExpr] = []
    for e in exprs:
        if e.is_const():
            continue
        e = _strip_content(e)
        if not any(e == o for o in out):
            out.append(e)
    return tuple(out)


def _gauss_solve(
    rows: Sequence[Sequence[JetExpr]], rhs: Sequence[JetExpr]
) -> tuple[list[JetExpr], list[JetExpr]]:
    """Solve the square system rows . x = rhs by exact elimination.

    Pivots prefer constant entries; every non-constant pivot is returned
    as a nonvanishing assumption.  Raises SolveError on a singular system.
    """
    n = len(rows)
    aug = [list(row) + [r] for row, r in zip(rows, rhs)]
    assumptions: list[JetExpr] = []
    where = [-1] * n
    used_rows: set[int] = set()
    for col in range(n):
        candidates = [
            i for i in range(n) if i not in used_rows and not aug[i][col].is_zero()
        ]
        if not candidates:
            raise SolveError(f"singular system: no pivot for column {col + 1}")
        pivot_row = min(
            candidates, key=lambda i: (0 if aug[i][col].is_const() else 1, i)
        )
        pivot = aug[pivot_row][col]
        if not pivot.is_const():
            assumptions.append(pivot)
        used_rows.add(pivot_row)
        where[col] = pivot_row
        for i in range(n):
            if i != pivot_row and not aug[i][col].is_zero():
                factor = aug[i][col] / pivot
                aug[i] = [a - factor * b for a, b in zip(aug[i], aug[pivot_row])]
    solution = []
    for col in range(n):
        row = aug[where[col]]
        solution.append(row[n] / row[col])
    return solution, assumptions


def solve_gradient(analysis: ClassAnalysis) -> GradientSolution:
    """Determine grad g from the framing set's Delta-equations."""
    if not analysis.approximately_flat:
        raise NotApproximatelyFlatError("class is not approximately flat")
    if not analysis.framed:
        rows = "; ".join(
            f"phi{s} = ({', '.join(print_expr(e) for e in phi(analysis, s))})"
            for s in mi.sort_canonical(analysis.submaximal_set)
        )
        raise NotFramedError(f"class is not framed; phi-vectors: {rows}")
    chosen = analysis.framing_set
    matrix = [phi(analysis, s) for s in chosen]
    rhs = [JetExpr.symbol(delta_symbol(s), dim=analysis.dimension) for s in chosen]
    gradient, assumptions = _gauss_solve(matrix, rhs)
    residual = tuple(
        s for s in mi.sort_canonical(analysis.submaximal_set) if s not in chosen
    )
    return GradientSolution(
        analysis, chosen, tuple(gradient), residual, _dedupe(assumptions)
    )


def maximal_invariants(spec: ClassSpec) -> list[InvariantRecord]:
    return [
        InvariantRecord(
            "maximal",
            f"I_max{{{_vec_tag(v)}}}",
            spec.coefficient(v),
            target_vector=v,
        )
        for v in spec.maximal_vectors()
    ]


def extra_invariants(sol: GradientSolution) -> list[InvariantRecord]:
    """One invariant per redundant submaximal equation.

    For a residual submaximal vector v, substituting the solved gradient
    into Delta a_v = phi(v) . grad g yields a linear relation among the
    Delta a_u with invariant coefficients; dropping the Deltas makes it an
    invariant.  When phi(v) has a single nonzero entry kappa the relation
    is divided by kappa, which reproduces the quotient forms used for
    symbolic maximal coefficients (e.g. a_220/p - a_112/3).
    """
    an = sol.analysis
    dim = an.dimension
    to_coeff = _delta_to_coeff(dim, an.submaximal_set)
    records = []
    for v in sol.residual_vectors:
        row = phi(an, v)
        raw = JetExpr.symbol(delta_symbol(v), dim=dim)
        for entry, g in zip(row, sol.gradient):
            raw = raw - entry * g
        nonzero = [e for e in row if not e.is_zero()]
        kappa = nonzero[0] if len(nonzero) == 1 else ONE
        expr = substitute(raw / kappa, to_coeff)
        assumptions = _dedupe(list(sol.assumptions) + [kappa])
        records.append(
            InvariantRecord(
                "extra", f"I_e{{{_vec_tag(v)}}}", expr, assumptions, target_vector=v
            )
        )
    return records


def compatibility_invariants(sol: GradientSolution) -> list[InvariantRecord]:
    """d_j(g_{x_i}) - d_i(g_{x_j}) = 0 rearranged, for each pair i < j."""
    an = sol.analysis
    dim = an.dimension
    names = _var_names(dim)
    to_coeff = _delta_to_coeff(dim, an.submaximal_set)
    records = []
    for i in range(dim):
        for j in range(i + 1, dim):
            mixed = sol.gradient[i].derive(j + 1, dim) - sol.gradient[j].derive(i + 1, dim)
            expr = substitute(mixed, to_coeff)
            records.append(
                InvariantRecord(
                    "compatibility",
                    f"I_c({names[i]},{names[j]})",
                    expr,
                    sol.assumptions,
                )
            )
    return records


# ---------------------------------------------------------------------------
# The generic C_m construction (sum of shifted-factor products).
# ---------------------------------------------------------------------------


def _f_submax(analysis: ClassAnalysis) -> dict[MultiIndex, MultiIndex]:
    """f : S' -> M, each residual submaximal to its lexicographically
    smallest covering maximal vector."""
    out = {}
    framing = set(analysis.framing_set or ())
    for v in analysis.submaximal_set - framing:
        covering = sorted(m for m in analysis.maximal_set if mi.covers(m, v))
        out[v] = covering[0]
    return out


def _f_interior(analysis: ClassAnalysis) -> dict[MultiIndex, MultiIndex]:
    """f : V -> lattice, each interior vector to its lexicographically
    smallest non-maximal covering vector (one always exists)."""
    out = {}
    non_max = analysis.all_vectors - analysis.maximal_set
    for v in analysis.interior_set:
        covering = sorted(u for u in non_max if mi.covers(u, v))
        out[v] = covering[0]
    return out


def _c_param(i: int) -> BaseSymbol:
    return param_symbol(f"c{i}")


def _p_param(v: MultiIndex) -> BaseSymbol:
    return param_symbol("p" + "_".join(map(str, v)))


def _q_param(v: MultiIndex) -> BaseSymbol:
    return param_symbol("q" + "_".join(map(str, v)))


def build_Cm(
    analysis: ClassAnalysis, adjust: Mapping[MultiIndex, int] | None = None
) -> tuple[tuple[FactorTemplate, ...], dict[BaseSymbol, JetExpr], tuple[JetExpr, ...]]:
    """The class C_m zeroing all maximal and submaximal terms.

    Returns (templates, parameter bindings, assumptions).  ``adjust`` maps
    lattice vectors to integer counts subtracted from their coefficients
    before solving (used when correction operators B_w contribute
    principal symbols at submaximal vectors).
    """
    if not analysis.approximately_flat:
        raise NotApproximatelyFlatError("class is not approximately flat")
    if not analysis.framed:
        raise NotFramedError("class is not framed")
    adjust = dict(adjust or {})
    n = analysis.dimension
    spec = analysis.spec
    fmap = _f_submax(analysis)
    preimage: dict[MultiIndex, set[MultiIndex]] = {}
    for v, m in fmap.items():
        preimage.setdefault(m, set()).add(v)

    templates = []
    for m in mi.sort_canonical(analysis.maximal_set):
        S_m = [
            i for i in range(1, n + 1)
            if tuple(a - b for a, b in zip(m, mi.unit(n, i))) in preimage.get(m, ())
        ]
        u_m = list(m)
        for i in S_m:
            u_m[i - 1] -= 1
        factors = []
        for i in range(1, n + 1):
            ci = JetExpr.symbol(_c_param(i), dim=n)
            factors.extend([Factor.single(mi.unit(n, i), ci)] * u_m[i - 1])
        for i in S_m:
            pv = tuple(a - b for a, b in zip(m, mi.unit(n, i)))
            factors.append(
                Factor.single(mi.unit(n, i), JetExpr.symbol(_p_param(pv), dim=n))
            )
        templates.append(FactorTemplate(n, tuple(factors), spec.coefficient(m)))
    templates = tuple(templates)

    def adjusted(v: MultiIndex) -> JetExpr:
        a_v = JetExpr.symbol(coeff_symbol(v), dim=n)
        k = adjust.get(v, 0)
        return a_v - JetExpr.const(k) if k else a_v

    # The c_i are fixed by the framing-set equations phi(v_i) . c = a_{v_i}.
    matrix = [phi(analysis, s) for s in analysis.framing_set]
    rhs = [adjusted(s) for s in analysis.framing_set]
    c_values, assumptions = _gauss_solve(matrix, rhs)
    bindings: dict[BaseSymbol, JetExpr] = {
        _c_param(i + 1): c_values[i] for i in range(n)
    }

    # Each residual submaximal coefficient then determines its p_v.
    expanded = expand_sum(templates)
    for v in mi.sort_canonical(fmap):
        eq = substitute(expanded.coefficient(v), bindings) - adjusted(v)
        value, pivot = _solve_param_linear(eq, _p_param(v), n)
        bindings[_p_param(v)] = value
        if not pivot.is_const():
            assumptions.append(pivot)
    return templates, bindings, _dedupe(assumptions)


def _solve_param_linear(
    eq: JetExpr, param: BaseSymbol, dim: int
) -> tuple[JetExpr, JetExpr]:
    """Solve eq == 0 for param, requiring eq to be linear in it.

    Returns (value, pivot coefficient).  Linearity and solvability are
    checked, not assumed.
    """
    at = [
        substitute(eq, {param: JetExpr.const(k)}) for k in range(3)
    ]
    if not (at[2] - at[1].scale(2) + at[0]).is_zero():
        raise SolveError(f"equation is not linear in {param.text()}")
    pivot = at[1] - at[0]
    if pivot.is_zero():
        raise SolveError(f"parameter {param.text()} does not occur in its equation")
    return -at[0] / pivot, pivot


def upward_invariant_generic(
    analysis: ClassAnalysis, v: MultiIndex
) -> InvariantRecord:
    """Upward invariant for the interior vector v by the generic method.

    Forms C = C_m + sum of B_w over interior w strictly above v, where
    B_w = (d_{x_j} + q_w) prod_i (d_{x_i} + c_i)^{w(i)} and f(w) = w + e_j
    is the lexicographically smallest non-maximal cover of w.  The c_i and
    p_u are solved against L' = L - sum of d^{f(w)}; the q_w are then
    forced one at a time in decreasing graded-lexicographic order.
    """
    v = tuple(v)
    if v not in analysis.interior_set:
        raise ValueError(f"{v} is not an interior vector")
    n = analysis.dimension
    W = [w for w in mi.sort_canonical(analysis.interior_set) if mi.below(v, w)]
    fint = _f_interior(analysis)
    adjust: dict[MultiIndex, int] = {}
    for w in W:
        adjust[fint[w]] = adjust.get(fint[w], 0) + 1

    templates, bindings, assumptions = build_Cm(analysis, adjust)

    b_templates = []
    for w in W:
        j = next(
            i for i in range(1, n + 1)
            if mi.add(w, mi.unit(n, i)) == fint[w]
        )
        factors = [Factor.single(mi.unit(n, j), JetExpr.symbol(_q_param(w), dim=n))]
        for i in range(1, n + 1):
            ci = JetExpr.symbol(_c_param(i), dim=n)
            factors.extend([Factor.single(mi.unit(n, i), ci)] * w[i - 1])
        b_templates.append(FactorTemplate(n, tuple(factors)))

    all_templates = templates + tuple(b_templates)
    C = expand_sum(all_templates)
    L = class_operator(analysis.spec)
    D = L - C

    # q_w solves, decreasing graded order with lexicographic tie-break.
    for w in W:
        eq = substitute(D.coefficient(w), bindings)
        value, pivot = _solve_param_linear(eq, _q_param(w), n)
        bindings[_q_param(w)] = value
        if not pivot.is_const():
            assumptions = assumptions + (pivot,)

    expr = substitute(D.coefficient(v), bindings)
    _check_no_solver_params(expr, f"I_{{{_vec_tag(v)}}}", _spec_params(analysis.spec))
    return InvariantRecord(
        "upward",
        f"I_{{{_vec_tag(v)}}}",
        expr,
        _dedupe(assumptions),
        target_vector=v,
        representation=Representation(all_templates, bindings),
    )


# ---------------------------------------------------------------------------
# Staged user-template engine.
# ---------------------------------------------------------------------------


def _template_params(
    templates: Iterable[FactorTemplate],
    spec_params: frozenset[BaseSymbol] = frozenset(),
) -> set[BaseSymbol]:
    out: set[BaseSymbol] = set()
    for t in templates:
        for f in t.factors:
            out |= {
                s for s in f.shift.base_symbols()
                if s.kind == KIND_PARAM and s not in spec_params
            }
    return out


def check_gauge_closure(
    templates: Sequence[FactorTemplate],
    maximal: frozenset[MultiIndex] | set[MultiIndex] | None = None,
    spec_params: frozenset[BaseSymbol] = frozenset(),
) -> None:
    """Verify the template family is closed under gauge transformations.

    Conjugation sends each first-order factor (d_w + shift) to
    (d_w + shift + sum of g_{x_i} over the powers); the family is closed
    iff this can be realized by reparametrizing the solver parameters,
    i.e. every parameter receives the same gauge increment in all of its
    occurrences.  Sharing a parameter between factors with different
    derivative directions breaks this and raises TemplateNotClosedError.
    """
    if not templates:
        return
    n = templates[0].dim
    g = gauge_symbol()
    increments: dict[BaseSymbol, JetExpr] = {}
    for t in templates:
        for s in t.prefactor.base_symbols():
            if s.kind == KIND_GAUGE:
                raise TemplateNotClosedError("prefactor contains the gauge symbol")
            if s.kind == KIND_COEFF and (maximal is None or s.vector not in maximal):
                raise TemplateNotClosedError(
                    f"prefactor coefficient {s.text()} is not gauge invariant"
                )
            if s.kind == KIND_PARAM and s not in spec_params:
                raise TemplateNotClosedError(
                    "prefactor contains a solver parameter"
                )
        for f in t.factors:
            if any(mi.order(w) != 1 for w in f.powers):
                raise TemplateNotClosedError(
                    "closure check requires first-order factors"
                )
            increment = ZERO
            for w in f.powers:
                increment = increment + JetExpr(Poly.var(JetVariable(g, w)))
            params = {
                s for s in f.shift.base_symbols()
                if s.kind == KIND_PARAM and s not in spec_params
            }
            if not params:
                raise TemplateNotClosedError(
                    f"factor shift {print_expr(f.shift)} has no solver "
                    "parameter to absorb the gauge increment"
                )
            if len(params) > 1:
                raise TemplateNotClosedError(
                    "closure check requires one solver parameter per factor"
                )
            (param,) = params
            coeff = f.shift - substitute(f.shift, {param: ZERO})
            if coeff != JetExpr.symbol(param, dim=n):
                raise TemplateNotClosedError(
                    f"parameter {param.text()} must appear with unit "
                    "coefficient in its factor shift"
                )
            if param in increments:
                if increments[param] != increment:
                    raise TemplateNotClosedError(
                        f"parameter {param.text()} is shared between factors "
                        "with different derivative directions"
                    )
            else:
                increments[param] = increment


def upward_invariants_from_template(
    analysis: ClassAnalysis,
    stages: Sequence[Sequence[FactorTemplate]],
    stage_targets: Sequence[Sequence[MultiIndex]],
    check_closure: bool = False,
) -> list[InvariantRecord]:
    """Run the staged elimination of Examples 4.x style constructions.

    Stage k subtracts the cumulative template sum from the generic class
    operator and re-solves all template parameters so that every
    cumulative target coefficient vanishes; each solve step must find an
    equation that is linear in exactly one undetermined parameter.  The
    coefficients at maximal vectors of the remaining support then become
    upward invariants.
    """
    if len(stages) != len(stage_targets):
        raise ValueError("stages and stage_targets must have equal length")
    spec_params = _spec_params(analysis.spec)
    n = analysis.dimension
    L = class_operator(analysis.spec)
    records: list[InvariantRecord] = []
    emitted: set[MultiIndex] = set()
    cumulative: list[FactorTemplate] = []
    targets: list[MultiIndex] = []
    for stage_templates, new_targets in zip(stages, stage_targets):
        cumulative.extend(stage_templates)
        targets.extend(tuple(t) for t in new_targets)
        if check_closure:
            check_gauge_closure(cumulative, analysis.maximal_set, spec_params)
        C = expand_sum(cumulative)
        D = L - C
        params = _template_params(cumulative, spec_params)
        bindings: dict[BaseSymbol, JetExpr] = {}
        assumptions: list[JetExpr] = []
        pending = list(dict.fromkeys(targets))
        progress = True
        while pending and progress:
            progress = False
            for t in list(pending):
                eq = substitute(D.coefficient(t), bindings)
                present = {
                    s for s in eq.base_symbols() if s in params and s not in bindings
                }
                if not present:
                    if eq.is_zero():
                        pending.remove(t)
                        progress = True
                        continue
                    raise SolveError(
                        f"target {t} cannot be zeroed: residual {print_expr(eq)}"
                    )
                if len(present) == 1:
                    param = next(iter(present))
                    value, pivot = _solve_param_linear(eq, param, n)
                    bindings[param] = value
                    if not pivot.is_const():
                        assumptions.append(pivot)
                    pending.remove(t)
                    progress = True
        if pending:
            raise SolveError(
                "stage not uniquely solvable; unresolved targets "
                + ", ".join(map(str, pending))
            )
        unsolved = params - set(bindings)
        if unsolved:
            raise SolveError(
                "stage leaves parameters undetermined: "
                + ", ".join(sorted(s.text() for s in unsolved))
            )
        N_terms = {
            u: substitute(c, bindings) for u, c in D.terms.items()
        }
        support = {u for u, c in N_terms.items() if not c.is_zero()}
        rep = Representation(tuple(cumulative), dict(bindings))
        for u in mi.sort_canonical(mi.maximal_elements(support)):
            if u in emitted:
                continue
            emitted.add(u)
            label = f"I_{{{_vec_tag(u)}}}"
            _check_no_solver_params(N_terms[u], label, spec_params)
            records.append(
                InvariantRecord(
                    "upward",
                    label,
                    N_terms[u],
                    _dedupe(assumptions),
                    target_vector=u,
                    representation=rep,
                )
            )
    return records


# ---------------------------------------------------------------------------
# The inductive totally hyperbolic recursion.
# ---------------------------------------------------------------------------


def _lift_hyperbolic(expr: JetExpr, m: int) -> JetExpr:
    """Rewrite a bottom invariant of L_m as one of L_{m+1}.

    Every coefficient b_alpha of the m-dimensional class is replaced by
    N_alpha = a_{alpha 0} - (a_{1...10} - 1) a_{alpha 1} - d_{m+1} a_{alpha 1},
    with derivative multi-indices extended by a trailing zero.
    """
    dim = m + 1
    p = JetExpr.symbol(coeff_symbol((1,) * m + (0,)), dim=dim) - ONE

    def lifted(alpha: MultiIndex) -> JetExpr:
        a1 = JetExpr.symbol(coeff_symbol(alpha + (1,)), dim=dim)
        a0 = JetExpr.symbol(coeff_symbol(alpha + (0,)), dim=dim)
        return a0 - p * a1 - a1.derive(dim, dim)

    cache: dict[JetVariable, JetExpr] = {}

    def value(var: JetVariable) -> JetExpr:
        if var not in cache:
            base = lifted(var.base.vector)
            cache[var] = base.derive_multi(var.deriv + (0,))
        return cache[var]

    def apply_poly(poly: Poly) -> JetExpr:
        total = ZERO
        for mono, c in poly.terms.items():
            t = JetExpr.const(c)
            for var, e in mono:
                t = t * value(var) ** e
            total = total + t
        return total

    return apply_poly(expr.num) / apply_poly(expr.den)


def recursive_hyperbolic_bottom(n: int) -> InvariantRecord:
    """Bottom upward invariant of the class generated by d_{x_1...x_n}.

    Built by the recursion C = (d_{x_{n+1}} + p) L_n with b_alpha = a_{alpha 1}
    and p = a_{1...10} - 1, starting from
    I_00 = a_00 - (a_10 a_01 + a_10x1) in dimension 2.
    """
    if n < 2:
        raise ValueError("dimension must be at least 2")
    a = lambda v: JetExpr.symbol(coeff_symbol(v), dim=2)
    expr = a((0, 0)) - (a((1, 0)) * a((0, 1)) + a((1, 0)).derive(1, 2))
    for m in range(2, n):
        expr = _lift_hyperbolic(expr, m)
    return InvariantRecord(
        "upward", f"I_{{{'0' * n}}}", expr, target_vector=(0,) * n
    )


def hyperbolic_templates_3d() -> tuple[list[list[FactorTemplate]], list[list[MultiIndex]]]:
    """The two stages used for the 3D hyperbolic class d_xyz.

    Stage 1 is (d_x+p)(d_y+q)(d_z+r); stage 2 adds the cyclic sum
    (d_x+s)(d_y+q) + (d_y+t)(d_z+r) + (d_z+u)(d_x+p), whose factor order
    is chosen to produce q_x, r_y and p_z rather than s_x, t_y and u_z.
    """
    n = 3
    par = lambda name: JetExpr.symbol(param_symbol(name), dim=n)
    ex, ey, ez = mi.unit(n, 1), mi.unit(n, 2), mi.unit(n, 3)
    f = Factor.single
    stage1 = [
        FactorTemplate(n, (f(ex, par("p")), f(ey, par("q")), f(ez, par("r"))))
    ]
    stage2 = [
        FactorTemplate(n, (f(ex, par("s")), f(ey, par("q")))),
        FactorTemplate(n, (f(ey, par("t")), f(ez, par("r")))),
        FactorTemplate(n, (f(ez, par("u")), f(ex, par("p")))),
    ]
    targets1 = [(1, 1, 0), (1, 0, 1), (0, 1, 1)]
    targets2 = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    return [stage1, stage2], [targets1, targets2]


def symmetric_bottom_invariant_3d() -> InvariantRecord:
    """The symmetric form of I_000 for the 3D hyperbolic class.

    Combines the template I_000 with compatibility and first-level upward
    invariants:
    I_000 + I_cxz - (1/3)(I_cxz)_y - (1/3)(I_cyz)_x - I_100 - I_010 - I_001 - 1.
    """
    spec = ClassSpec(3, (((1, 1, 1), ONE),))
    an = analyze(spec)
    sol = solve_gradient(an)
    compat = {r.label: r.expression for r in compatibility_invariants(sol)}
    stages, targets = hyperbolic_templates_3d()
    ups = {
        tuple(r.target_vector): r.expression
        for r in upward_invariants_from_template(an, stages, targets)
    }
    i_cxz = compat["I_c(x,z)"]
    i_cyz = compat["I_c(y,z)"]
    expr = (
        ups[(0, 0, 0)]
        + i_cxz
        - i_cxz.derive(2, 3).scale(Fraction(1, 3))
        - i_cyz.derive(1, 3).scale(Fraction(1, 3))
        - ups[(1, 0, 0)]
        - ups[(0, 1, 0)]
        - ups[(0, 0, 1)]
        - ONE
    )
    return InvariantRecord("upward", "I_{000}^sym", expr, target_vector=(0, 0, 0))


def x3_strict_upward(
    i_10: InvariantRecord, i_01: InvariantRecord
) -> tuple[InvariantRecord, InvariantRecord]:
    """The manipulated combinations proposed for the X^3 class.

    Given the template invariants I_10 and I_01 for the class generated by
    {d_xxx, a_11 d_xy, a_02 d_yy}, forms
    (I_10 + a_11 I_01)/(1 - 2 a_11 a_02) and
    (I_01 + 2 a_02 I_10)/(1 - 2 a_11 a_02),
    recording 1 - 2 a_11 a_02 as an assumption.  (The two inputs are in
    fact proportional, so these combinations coincide with the inputs.)
    """
    a11 = JetExpr.symbol(coeff_symbol((1, 1)), dim=2)
    a02 = JetExpr.symbol(coeff_symbol((0, 2)), dim=2)
    denom = ONE - a11 * a02.scale(2)
    first = (i_10.expression + a11 * i_01.expression) / denom
    second = (i_01.expression + a02.scale(2) * i_10.expression) / denom
    assumptions = _dedupe(
        list(i_10.assumptions) + list(i_01.assumptions) + [denom]
    )
    return (
        InvariantRecord("upward", "I_{10}*", first, assumptions, target_vector=(1, 0)),
        InvariantRecord("upward", "I_{01}*", second, assumptions, target_vector=(0, 1)),
    )


# ---------------------------------------------------------------------------
# Orchestration and the completeness audit.
# ---------------------------------------------------------------------------


def complete_set(spec: ClassSpec) -> tuple[list[InvariantRecord], dict]:
    """Assemble a complete set of invariants with its completeness audit.

    Raises NotApproximatelyFlatError / NotFramedError (with diagnostics)
    when the hypotheses of the main construction fail.
    """
    an = analyze(spec)
    sol = solve_gradient(an)  # raises on hypothesis failure
    records = maximal_invariants(spec)
    records += extra_invariants(sol)
    records += compatibility_invariants(sol)
    for v in mi.sort_canonical(an.interior_set):
        records.append(upward_invariant_generic(an, v))
    n = spec.dimension
    s = len(an.submaximal_set)
    counts = {k: sum(1 for r in records if r.kind == k)
              for k in ("maximal", "extra", "compatibility", "upward")}
    expected = {
        "maximal": len(an.maximal_set),
        "extra": s - n,
        "compatibility": n * (n - 1) // 2,
        "upward": len(an.interior_set),
    }
    audit = {
        "counts": counts,
        "expected": expected,
        "complete": counts == expected,
    }
    return records, audit


def is_upward_form(record: InvariantRecord, analysis: ClassAnalysis) -> bool:
    """Check the structural condition on an upward record: the expression
    is a_v - E where E references only coefficients of vectors strictly
    above v, or maximal/submaximal vectors."""
    v = record.target_vector
    if v is None:
        return False
    a_v = JetExpr.symbol(coeff_symbol(v), dim=analysis.dimension)
    E = a_v - record.expression
    allowed = analysis.maximal_set | analysis.submaximal_set | {
        u for u in analysis.all_vectors if mi.below(v, u)
    }
    return all(
        s.vector in allowed
        for s in E.base_symbols()
        if s.kind == KIND_COEFF
    )
