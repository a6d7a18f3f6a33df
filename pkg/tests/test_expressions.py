import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import invode as iv
from invode.errors import EvalDomainError, ExprSyntaxError, UnknownSymbol
from invode.expressions import BinOp, Call, Const, Neg, Num, Var, Expression


class TestParseAndEval:
    @pytest.mark.parametrize("text,x,expected", [
        ("30*exp(-x)", 0.0, 30.0),
        ("x^2 + 4/sqrt(x)", 1.0, 5.0),
        ("2*x^2", 3.0, 18.0),
        ("-x^2", 2.0, -4.0),          # unary minus binds below ^
        ("(3 - 25*x^2 + 5*x^3)*exp(-x)", 0.0, 3.0),
        ("2^3^2", 0.0, 512.0),        # right-associative power
        ("2^-1", 0.0, 0.5),
        ("pi - pi", 1.0, 0.0),
        ("cos(0)", 5.0, 1.0),
        ("abs(-3)", 0.0, 3.0),
        ("1 - 2 - 3", 0.0, -4.0),
        ("8 / 2 / 2", 0.0, 2.0),
    ])
    def test_values(self, text, x, expected):
        assert iv.parse(text)(x) == pytest.approx(expected, abs=1e-14)

    def test_whitespace_insensitive(self):
        a = iv.parse("1+2 * x")
        b = iv.parse("  1 +2*x ")
        assert a(3.0) == b(3.0) == 7.0

    def test_constants(self):
        assert iv.parse("e")(0.0) == pytest.approx(math.e)
        assert iv.parse("pi")(0.0) == pytest.approx(math.pi)

    def test_syntax_error_carries_offset(self):
        with pytest.raises(ExprSyntaxError) as exc:
            iv.parse("1 + * 2")
        assert exc.value.offset == 4

    def test_unknown_identifier(self):
        with pytest.raises(UnknownSymbol):
            iv.parse("2*y")
        with pytest.raises(UnknownSymbol):
            iv.parse("sinh(x)")

    def test_empty_rejected(self):
        with pytest.raises(ExprSyntaxError):
            iv.parse("   ")

    def test_unbalanced_paren(self):
        with pytest.raises(ExprSyntaxError):
            iv.parse("(1 + 2")


class TestDomainErrors:
    def test_division_by_zero(self):
        with pytest.raises(EvalDomainError):
            iv.parse("1/x")(0.0)

    def test_sqrt_negative(self):
        with pytest.raises(EvalDomainError):
            iv.parse("sqrt(x)")(-1.0)

    def test_log_nonpositive(self):
        with pytest.raises(EvalDomainError):
            iv.parse("log(x)")(0.0)

    def test_negative_base_fractional_power(self):
        with pytest.raises(EvalDomainError):
            iv.parse("x^0.5")(-2.0)
        # integer exponents on negative bases stay fine
        assert iv.parse("x^3")(-2.0) == -8.0

    def test_overflow_is_domain_error(self):
        with pytest.raises(EvalDomainError):
            iv.parse("exp(x)")(1e9)


class TestEvalVector:
    def test_identity_on_grid(self):
        grid = iv.NodeGrid(np.array([1.0, 2.0, 3.0]))
        np.testing.assert_array_equal(iv.eval_vector(iv.parse("x"), grid),
                                      [1.0, 2.0, 3.0])

    def test_domain_error_carries_node_index(self):
        grid = iv.NodeGrid(np.array([-1.0, 0.0, 1.0]))
        with pytest.raises(EvalDomainError) as exc:
            iv.eval_vector(iv.parse("1/x"), grid)
        assert exc.value.node_index == 1


# random AST strategy for the render/parse round trip
def _exprs(depth=3):
    leaf = st.one_of(
        st.floats(0.0, 50.0).map(Num),
        st.just(Var()),
        st.sampled_from(["pi", "e"]).map(Const),
    )
    if depth == 0:
        return leaf
    sub = _exprs(depth - 1)
    return st.one_of(
        leaf,
        sub.map(Neg),
        st.tuples(st.sampled_from("+-*/"), sub, sub).map(
            lambda t: BinOp(t[0], t[1], t[2])),
        st.tuples(st.sampled_from(["sin", "cos", "abs"]), sub).map(
            lambda t: Call(t[0], t[1])),
    )


@given(_exprs(), st.floats(-3.0, 3.0))
@settings(max_examples=150, deadline=None)
def test_render_parse_round_trip(root, x):
    expr = Expression(root, "<generated>")
    text = expr.render()
    reparsed = iv.parse(text)
    try:
        want = expr(x)
    except EvalDomainError:
        with pytest.raises(EvalDomainError):
            reparsed(x)
        return
    got = reparsed(x)
    assert got == pytest.approx(want, rel=1e-12, abs=1e-12)
