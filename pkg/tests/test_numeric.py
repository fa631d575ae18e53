import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from strebel.numeric import FieldMismatchError, LogRatio, Scalar, parse_scalar, render_decimal, scalar_cmp

fracs = st.fractions(min_value=-50, max_value=50, max_denominator=40)
pos_fracs = st.fractions(min_value=Fraction(1, 40), max_value=50, max_denominator=40)


def quad(d):
    return st.builds(lambda a, b: Scalar(a, b, d), fracs, fracs)


def test_parse_forms():
    assert parse_scalar("3/4") == Scalar(Fraction(3, 4))
    assert parse_scalar("-1/2+1/2*sqrt(5)") == Scalar(Fraction(-1, 2), Fraction(1, 2), 5)
    assert parse_scalar("sqrt(4)") == Scalar(2)
    with pytest.raises(ValueError):
        parse_scalar("1/2+")
    with pytest.raises(FieldMismatchError):
        parse_scalar("sqrt(2)+sqrt(3)")


def test_golden_identity():
    phi = (1 + parse_scalar("sqrt(5)")) / 2
    assert phi * phi == phi + 1
    assert 1 / phi == phi - 1


def test_mixed_fields_rejected():
    with pytest.raises(FieldMismatchError):
        parse_scalar("sqrt(2)") + parse_scalar("sqrt(3)")


def test_comparison_near_tie():
    # 99/70 agrees with sqrt 2 to four decimals
    r2 = parse_scalar("sqrt(2)")
    assert r2 < Scalar(Fraction(99, 70))
    assert r2 > Scalar(Fraction(140, 99))
    assert scalar_cmp(r2, r2) == 0


@given(quad(2), quad(2))
def test_field_axioms(x, y):
    assert x + y == y + x
    assert x * y == y * x
    assert (x - y) + y == x
    if y != 0:
        assert (x / y) * y == x


@given(quad(5), quad(5))
def test_order_matches_floats(x, y):
    fx, fy = float(x), float(y)
    if abs(fx - fy) > 1e-9:
        assert (x < y) == (fx < fy)


@given(quad(3))
def test_string_round_trip(x):
    assert parse_scalar(str(x)) == x


def test_render_decimal_digits():
    assert render_decimal(parse_scalar("sqrt(2)")) == "1.41421356237"
    assert render_decimal(Scalar(Fraction(1, 3))).startswith("0.333333333333")


def test_logratio_pretty():
    assert LogRatio(Scalar(4)).pretty() == "log 2"
    assert LogRatio(Scalar(2)).pretty() == "1/2 log 2"
    assert LogRatio(Scalar(1)).pretty() == "0"


def test_logratio_exact_arithmetic():
    half_log_2 = LogRatio(Scalar(2))
    assert half_log_2 + half_log_2 == LogRatio(Scalar(4))
    assert LogRatio(Scalar(8)) == LogRatio(Scalar(2), Fraction(3, 2))
    assert LogRatio(Scalar(3)) > LogRatio(Scalar(2))
    assert (LogRatio(Scalar(6)) - LogRatio(Scalar(2))) == LogRatio(Scalar(3))


@given(pos_fracs, pos_fracs)
def test_logratio_order_matches_log(a, b):
    la, lb = LogRatio(Scalar(a)), LogRatio(Scalar(b))
    if abs(math.log(a) - math.log(b)) > 1e-12:
        assert (la < lb) == (math.log(a) < math.log(b))
    assert abs(float(la + lb) - 0.5 * math.log(a * b)) < 1e-9
