"""Analysis of a maximally generated class of operators.

A class is specified by its maximal terms: an antichain of multi-indices
with nonzero coefficients (literal constants or symbols).  The term lattice
is the down set of the maximal vectors; every vector is classified as
maximal, submaximal (covered only by maximal vectors), or interior.  The
module decides the two hypotheses of the main construction — approximately
flat and framed — and selects a framing set.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from . import multiindex as mi
from .grammar import parse_expr, print_expr
from .jetalg import JetExpr, coeff_symbol
from .multiindex import MultiIndex


class ClassSpecError(ValueError):
    """Invalid class specification."""


def _valid_coefficient(c: JetExpr) -> bool:
    """Literal nonzero constant, or a single underived symbol."""
    if c.is_zero():
        return False
    if c.is_const():
        return True
    vs = c.variables()
    if len(vs) != 1:
        return False
    v = next(iter(vs))
    return any(v.deriv) is False and c == JetExpr.symbol(v.base, v.deriv)


@dataclass(frozen=True)
class ClassSpec:
    """Dimension plus the maximal terms (vector, coefficient) of the class."""

    dimension: int
    maximal_terms: tuple[tuple[MultiIndex, JetExpr], ...]

    def __post_init__(self):
        if self.dimension < 1:
            raise ClassSpecError(f"dimension must be >= 1, got {self.dimension}")
        if not self.maximal_terms:
            raise ClassSpecError("at least one maximal term is required")
        vectors = [v for v, _ in self.maximal_terms]
        for v in vectors:
            mi.check_index(v, self.dimension)
        if len(set(vectors)) != len(vectors):
            raise ClassSpecError("duplicate maximal vectors")
        if not mi.is_antichain(vectors):
            raise ClassSpecError("maximal vectors must form an antichain")
        for v, c in self.maximal_terms:
            if not _valid_coefficient(c):
                raise ClassSpecError(
                    f"coefficient of {v} must be a nonzero constant or a single symbol"
                )

    def maximal_vectors(self) -> list[MultiIndex]:
        return mi.sort_canonical(v for v, _ in self.maximal_terms)

    def coefficient(self, v: MultiIndex) -> JetExpr:
        for w, c in self.maximal_terms:
            if w == tuple(v):
                return c
        raise KeyError(f"{v} is not a maximal vector")

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "maximal_terms": [
                {"vector": list(v), "coefficient": print_expr(c)}
                for v, c in self.maximal_terms
            ],
        }

    @staticmethod
    def from_json(data: dict) -> "ClassSpec":
        try:
            dim = int(data["dimension"])
            terms = tuple(
                (tuple(t["vector"]), parse_expr(str(t["coefficient"]), dim))
                for t in data["maximal_terms"]
            )
        except (KeyError, TypeError) as exc:
            raise ClassSpecError(f"malformed class spec: {exc}") from exc
        return ClassSpec(dim, terms)

    @staticmethod
    def load(path: str) -> "ClassSpec":
        with open(path) as fh:
            return ClassSpec.from_json(json.load(fh))


@dataclass(frozen=True)
class ClassAnalysis:
    """Term lattice classification and hypothesis flags for a class."""

    spec: ClassSpec
    all_vectors: frozenset[MultiIndex]
    maximal_set: frozenset[MultiIndex]
    submaximal_set: frozenset[MultiIndex]
    interior_set: frozenset[MultiIndex]
    approximately_flat: bool
    flat_witness: tuple[MultiIndex, ...] | None  # s_i with s_i + e_i maximal
    framed: bool
    framing_set: tuple[MultiIndex, ...] | None
    framing_assumptions: tuple[JetExpr, ...]

    @property
    def dimension(self) -> int:
        return self.spec.dimension

    def to_json(self) -> dict:
        out = {
            "dimension": self.dimension,
            "all_vectors": [list(v) for v in mi.sort_canonical(self.all_vectors)],
            "maximal": [list(v) for v in mi.sort_canonical(self.maximal_set)],
            "submaximal": [list(v) for v in mi.sort_canonical(self.submaximal_set)],
            "interior": [list(v) for v in mi.sort_canonical(self.interior_set)],
            "approximately_flat": self.approximately_flat,
            "framed": self.framed,
        }
        if self.flat_witness is not None:
            out["flat_witness"] = [list(v) for v in self.flat_witness]
        if self.framing_set is not None:
            out["framing_set"] = [list(v) for v in self.framing_set]
        if self.framing_assumptions:
            out["assumptions"] = [print_expr(e) for e in self.framing_assumptions]
        return out


def phi(analysis: ClassAnalysis, v: MultiIndex) -> tuple[JetExpr, ...]:
    """The row phi(v) = sum over {i : v + e_i maximal} of (v(i)+1) a_{v+e_i} e_i."""
    v = tuple(v)
    if v not in analysis.submaximal_set:
        raise ValueError(f"{v} is not submaximal")
    n = analysis.dimension
    row = []
    for i in range(1, n + 1):
        up = mi.add(v, mi.unit(n, i))
        if up in analysis.maximal_set:
            row.append(analysis.spec.coefficient(up).scale(Fraction(v[i - 1] + 1)))
        else:
            row.append(JetExpr.const(0))
    return tuple(row)


def _matching_witness(analysis_sub, maximal, n) -> tuple[MultiIndex, ...] | None:
    """Distinct s_1..s_n in S with s_i + e_i maximal, via augmenting paths."""
    candidates = {
        i: [s for s in mi.sort_canonical(analysis_sub)
            if mi.add(s, tuple(1 if k == i else 0 for k in range(n))) in maximal]
        for i in range(n)
    }
    match: dict[MultiIndex, int] = {}

    def augment(i, seen):
        for s in candidates[i]:
            if s in seen:
                continue
            seen.add(s)
            if s not in match or augment(match[s], seen):
                match[s] = i
                return True
        return False

    for i in range(n):
        if not augment(i, set()):
            return None
    inverse = {i: s for s, i in match.items()}
    return tuple(inverse[i] for i in range(n))


def _framing_order_key(s: MultiIndex, row: tuple[JetExpr, ...]):
    """Prefer rows with a single constant entry, then a single symbolic
    entry, then the rest; canonical vector order within each group.

    This keeps the selected equations as simple as possible (each such row
    determines one g_{x_i} directly) and matches the selections made in
    worked examples.
    """
    nonzero = [e for e in row if not e.is_zero()]
    if len(nonzero) == 1:
        group = 0 if nonzero[0].is_const() else 1
    else:
        group = 2
    return (group, mi.canonical_key(s))


def _reduce_row(row, reduced, assumptions):
    row = list(row)
    for pivot_col, prow in reduced:
        if not row[pivot_col].is_zero():
            factor = row[pivot_col] / prow[pivot_col]
            row = [ri - factor * pi for ri, pi in zip(row, prow)]
    for j, e in enumerate(row):
        if not e.is_zero():
            if not e.is_const():
                assumptions.append(e)
            return j, row
    return None, row


def analyze(spec: ClassSpec) -> ClassAnalysis:
    n = spec.dimension
    maximal = frozenset(v for v, _ in spec.maximal_terms)
    all_vectors = frozenset(mi.down_set(maximal))
    submaximal = frozenset(
        v for v in all_vectors - maximal
        if all(u in maximal
               for u in all_vectors if mi.covers(u, v))
        and any(mi.covers(u, v) for u in all_vectors)
    )
    interior = all_vectors - maximal - submaximal

    witness = _matching_witness(submaximal, maximal, n)

    # Greedy framing-set selection: scan S in the preference order, keep a
    # vector iff its phi-row strictly increases the symbolic rank.
    partial = ClassAnalysis(
        spec, all_vectors, maximal, submaximal, interior,
        witness is not None, witness, False, None, ())
    rows = {s: phi(partial, s) for s in submaximal}
    ordered = sorted(submaximal, key=lambda s: _framing_order_key(s, rows[s]))
    reduced: list[tuple[int, list[JetExpr]]] = []
    chosen: list[MultiIndex] = []
    assumptions: list[JetExpr] = []
    for s in ordered:
        if len(chosen) == n:
            break
        trial_assumptions: list[JetExpr] = []
        pivot, row = _reduce_row(rows[s], reduced, trial_assumptions)
        if pivot is not None:
            reduced.append((pivot, row))
            chosen.append(s)
            assumptions.extend(trial_assumptions)
    framed = len(chosen) == n

    return ClassAnalysis(
        spec, all_vectors, maximal, submaximal, interior,
        witness is not None, witness,
        framed, tuple(chosen) if framed else None,
        tuple(assumptions) if framed else (),
    )


def class_operator(spec: ClassSpec) -> "DiffOperator":
    """The generic operator of the class: maximal coefficients as given,
    one coefficient symbol a_v for every non-maximal lattice vector."""
    from .opalg import DiffOperator
    n = spec.dimension
    maximal = {v for v, _ in spec.maximal_terms}
    terms = {v: spec.coefficient(v) for v in maximal}
    for v in mi.down_set(maximal) - maximal:
        terms[v] = JetExpr.symbol(coeff_symbol(v), dim=n)
    return DiffOperator(n, terms)
