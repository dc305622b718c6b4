import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracstab.errors import DomainError, InvalidInputError, ParseError
from fracstab.orders import PseudoPolynomial, format_pseudo_polynomial
from fracstab.parser import parse_pseudo_polynomial, parse_transfer_function, parse_vector_field


@pytest.mark.parametrize(
    "text, terms",
    [
        ("0.8*s^2.2 + 0.5*s^0.9 + 1", ((0.8, F(11, 5)), (0.5, F(9, 10)), (1.0, F(0)))),
        ("s", ((1.0, F(1)),)),
        ("39.69*s^1.25+12.46*s+65.068", ((39.69, F(5, 4)), (12.46, F(1)), (65.068, F(0)))),
        ("s^(1/2) + 1", ((1.0, F(1, 2)), (1.0, F(0)))),
        ("s^1/2 + 1", ((1.0, F(1, 2)), (1.0, F(0)))),
        ("-s^2 - 3s + 2", ((-1.0, F(2)), (-3.0, F(1)), (2.0, F(0)))),
        ("2*s + 3*s", ((5.0, F(1)),)),
        ("1e-3*s^0.5", ((1e-3, F(1, 2)),)),
    ],
)
def test_parse_pseudo_polynomial(text, terms):
    assert parse_pseudo_polynomial(text).terms == terms


@pytest.mark.parametrize("text", ["", "s^", "0.8*s^2.2 +", "s**2", "3 4", "s^(1/0)", "(s+1"])
def test_syntax_errors_carry_offset(text):
    with pytest.raises(ParseError) as info:
        parse_pseudo_polynomial(text)
    assert 0 <= info.value.offset <= len(text)
    assert "offset" in str(info.value)


def test_error_offset_points_at_problem():
    with pytest.raises(ParseError) as info:
        parse_pseudo_polynomial("s + s^x")
    assert info.value.offset == 6


def test_negative_order_is_domain_error():
    with pytest.raises(DomainError):
        parse_pseudo_polynomial("s^-0.5 + 1")


def test_transfer_function_example6():
    tf = parse_transfer_function("(12.46*s+64.47)/(39.69*s^1.25+12.46*s+65.068)")
    assert tf.numerator.terms == ((12.46, F(1)), (64.47, F(0)))
    assert tf.denominator.terms == ((39.69, F(5, 4)), (12.46, F(1)), (65.068, F(0)))


def test_transfer_function_unit_numerator():
    tf = parse_transfer_function("1/(s^0.5+1)")
    assert tf.numerator.terms == ((1.0, F(0)),)
    assert tf.denominator.terms == ((1.0, F(1, 2)), (1.0, F(0)))


def test_transfer_function_shorthand():
    tf = parse_transfer_function("s+1")
    assert tf.numerator.terms == ((1.0, F(0)),)
    assert tf.denominator.terms == ((1.0, F(1)), (1.0, F(0)))


def test_transfer_function_empty_denominator():
    with pytest.raises(DomainError):
        parse_transfer_function("1/(s-s)")


CHEN = ["35*(x2-x1)", "-7*x1-x1*x3+28*x2", "x1*x2-3*x3"]


def test_chen_field():
    f = parse_vector_field("0.8,1.0,0.9", CHEN)
    assert f.n == 3
    assert f.orders == (F(4, 5), F(1), F(9, 10))
    assert not f.is_commensurate
    x = np.array([1.0, 2.0, 3.0])
    assert np.allclose(f(x), [35.0, -7 - 3 + 56, 2 - 9])


def test_scalar_fields():
    f = parse_vector_field("1", ["-x1"])
    assert f(np.array([2.0]))[0] == -2.0
    g = parse_vector_field("0.5", ["x1^2-1"])
    assert g(np.array([3.0]))[0] == 8.0


def test_field_implicit_product_and_powers():
    f = parse_vector_field("0.5,0.5", ["2x1(x2+1)^2", "-(x1 - x2)"])
    assert np.allclose(f(np.array([1.5, 2.0])), [27.0, 0.5])


@pytest.mark.parametrize(
    "orders, comps, err",
    [
        ("0.5", ["x2"], ParseError),
        ("0.5", ["x0"], ParseError),
        ("0.5,0.5", ["x1"], InvalidInputError),
        ("2.0", ["x1"], DomainError),
        ("0", ["x1"], DomainError),
        ("0.5", ["sin(x1)"], ParseError),
        ("0.5", ["x1^0.5"], ParseError),
        ("0.5", ["x1^-1"], ParseError),
    ],
)
def test_field_errors(orders, comps, err):
    with pytest.raises(err):
        parse_vector_field(orders, comps)


def test_chen_jacobian():
    f = parse_vector_field("0.8,1.0,0.9", CHEN)
    r = math.sqrt(63)
    expected = [[-35, 35, 0], [-28, 28, -r], [r, r, -3]]
    assert np.allclose(f.jacobian(np.array([r, r, 21.0])), expected, rtol=0, atol=1e-12)
    assert np.array_equal(f.jacobian(np.zeros(3)), [[-35, 35, 0], [-7, 28, 0], [0, 0, -3]])


# -- properties -------------------------------------------------------------------

order_st = st.builds(lambda k, d: F(k, d), st.integers(0, 40), st.integers(1, 12))
coeff_st = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False).filter(lambda c: c != 0)
poly_st = st.lists(st.tuples(coeff_st, order_st), min_size=1, max_size=6).map(PseudoPolynomial).filter(bool)


@given(poly_st)
def test_print_parse_round_trip(p):
    assert parse_pseudo_polynomial(format_pseudo_polynomial(p)) == p


@given(poly_st, st.randoms())
def test_whitespace_and_star_insensitive(p, rnd):
    text = format_pseudo_polynomial(p)
    # spaces may go after operators and the variable, never inside a number
    noisy = "".join(ch + (" " * rnd.randint(0, 2) if ch in " *^()/s" else "") for ch in text)
    compact = text.replace(" ", "").replace("*", "")
    assert parse_pseudo_polynomial(noisy) == p
    assert parse_pseudo_polynomial(compact) == p


@given(st.integers(2, 9), st.integers(1, 3))
def test_variable_beyond_dimension_rejected(idx, n):
    if idx <= n:
        return
    with pytest.raises(ParseError):
        parse_vector_field(",".join(["0.5"] * n), [f"x{idx}"] * n)
