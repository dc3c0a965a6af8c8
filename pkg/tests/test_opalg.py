"""Tests for noncommutative operator algebra, gauging, and templates."""
from __future__ import annotations

import pytest

from gaugeinv.classify import class_operator
from gaugeinv.grammar import parse_expr, print_expr
from gaugeinv.jetalg import JetExpr, ONE, ZERO, gauge_symbol, param_symbol
from gaugeinv.multiindex import DimensionMismatchError
from gaugeinv.opalg import (
    DiffOperator,
    Factor,
    FactorTemplate,
    GaugeSymbolPresentError,
    expand_sum,
    expand_template,
    gauge,
    op_mul,
)

import _fixtures as fx


def par(name, dim=2):
    return JetExpr.symbol(param_symbol(name), dim=dim)


def P(text, dim=2):
    return parse_expr(text, dim)


def test_leibniz_first_order():
    # d_x o f = f d_x + f_x
    f = P("a[0,0]")
    L = DiffOperator(2, {(1, 0): ONE})
    R = DiffOperator(2, {(0, 0): f})
    prod = op_mul(L, R)
    assert prod.coefficient((1, 0)) == f
    assert prod.coefficient((0, 0)) == f.derive(1, 2)


def test_leibniz_multinomial():
    # d_xx o f = f d_xx + 2 f_x d_x + f_xx
    f = P("a[0,0]")
    prod = op_mul(DiffOperator(2, {(2, 0): ONE}), DiffOperator(2, {(0, 0): f}))
    assert prod.coefficient((1, 0)) == f.derive(1, 2).scale(2)
    assert prod.coefficient((0, 0)) == f.derive(1, 2).derive(1, 2)


def test_op_mul_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        op_mul(DiffOperator(2, {(1, 0): ONE}), DiffOperator(3, {(1, 0, 0): ONE}))


def test_expansion_of_example_template():
    # (d_x+p)(d_y+q)(d_x+d_y+r) expands as displayed in the paper's Eq form
    p, q, r = par("p"), par("q"), par("r")
    t = FactorTemplate(
        2,
        (
            Factor.single((1, 0), p),
            Factor.single((0, 1), q),
            Factor(((1, 0), (0, 1)), r),
        ),
    )
    L = expand_template(t)
    dx = lambda e: e.derive(1, 2)
    dy = lambda e: e.derive(2, 2)
    assert L.coefficient((2, 1)) == ONE
    assert L.coefficient((1, 2)) == ONE
    assert L.coefficient((2, 0)) == q
    assert L.coefficient((1, 1)) == p + q + r
    assert L.coefficient((0, 2)) == p
    assert L.coefficient((1, 0)) == dx(q) + dy(r) + q * (p + r)
    assert L.coefficient((0, 1)) == dx(q) + dx(r) + p * (q + r)
    assert L.coefficient((0, 0)) == (p * q + dx(q)) * r + q * dx(r) + p * dy(r) + dx(dy(r))


def test_expansion_of_cubed_squared_template():
    # (d_x+q)^3 (d_y+r)^2: submaximal coefficients 3q and 2r
    q, r = par("q"), par("r")
    t = FactorTemplate(2, (Factor.single((1, 0), q),) * 3 + (Factor.single((0, 1), r),) * 2)
    L = expand_template(t)
    assert L.coefficient((3, 2)) == ONE
    assert L.coefficient((2, 2)) == q.scale(3)
    assert L.coefficient((3, 1)) == r.scale(2)


def test_empty_template_expands_to_zero():
    assert expand_template(FactorTemplate(2, ())) == DiffOperator.zero(2)


def test_expand_sum():
    q = par("q")
    t1 = FactorTemplate(2, (Factor.single((1, 0), q),))
    t2 = FactorTemplate(2, (Factor.single((0, 1), ZERO),))
    s = expand_sum([t1, t2])
    assert s.coefficient((1, 0)) == ONE
    assert s.coefficient((0, 1)) == ONE
    assert s.coefficient((0, 0)) == q


def test_gauge_classical_operator():
    # d_xy + a d_x + b d_y + c: a' = a + g_y, b' = b + g_x
    L = class_operator(fx.spec_xy())
    Lg = gauge(L)
    gx, gy = P("g;[1,0]"), P("g;[0,1]")
    assert Lg.coefficient((1, 1)) == ONE
    assert Lg.coefficient((1, 0)) == P("a[1,0]") + gy
    assert Lg.coefficient((0, 1)) == P("a[0,1]") + gx
    assert Lg.coefficient((0, 0)) == P("a[0,0]") + P("a[1,0]") * gx + P("a[0,1]") * gy + gx * gy + P("g;[1,1]")


def test_gauge_preserves_maximal_coefficients():
    for make in fx.ALL_CONSTRUCTIVE.values():
        spec = make()
        L = class_operator(spec)
        Lg = gauge(L)
        for m in spec.maximal_vectors():
            assert Lg.coefficient(m) == spec.coefficient(m)


def test_gauge_xxxyy_submaximal():
    # a'_31 = a_31 + 2 g_y  and  a'_22 = a_22 + 3 g_x
    L = class_operator(fx.spec_xxxyy())
    Lg = gauge(L)
    assert Lg.coefficient((3, 1)) == P("a[3,1]") + P("2*g;[0,1]")
    assert Lg.coefficient((2, 2)) == P("a[2,2]") + P("3*g;[1,0]")


def test_gauge_rejects_gauge_symbol():
    L = DiffOperator(2, {(1, 0): JetExpr.symbol(gauge_symbol(), dim=2)})
    with pytest.raises(GaugeSymbolPresentError):
        gauge(L)


def test_operator_arithmetic_and_equality():
    A = DiffOperator(2, {(1, 0): ONE, (0, 0): P("a[0,0]")})
    B = DiffOperator(2, {(1, 0): ONE})
    assert (A - B).support() == {(0, 0)}
    assert A + (-A) == DiffOperator.zero(2)
    assert A != B


def test_json_round_trip():
    L = class_operator(fx.spec_xxy())
    data = L.to_json()
    back = DiffOperator.from_json(data)
    assert back == L
    assert back.to_json() == data


def test_from_json_rejects_duplicates():
    with pytest.raises(ValueError):
        DiffOperator.from_json(
            [
                {"vector": [1, 0], "coeff": "1"},
                {"vector": [1, 0], "coeff": "2"},
            ]
        )
