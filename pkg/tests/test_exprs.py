from __future__ import annotations

from fractions import Fraction

import pytest
from mpmath import iv, mp

from metasynth.exprs import ExprError, RealExpr, bits_for_epsilon, interval_compare, precision


def test_decimal_literals_are_exact_text():
    e = RealExpr("0.1")
    with precision(300):
        assert e.evaluate(mp) == mp.mpf("0.1")
    assert e.exact() is None


def test_power_notation():
    e = RealExpr("3^-9.53")
    with precision(128):
        assert abs(mp.log(e.evaluate(mp), 3) + mp.mpf("9.53")) < mp.mpf(10) ** -30


def test_exact_rationals():
    assert RealExpr("1/3 + 2^-2").exact() == Fraction(7, 12)
    assert RealExpr(Fraction(3, 7)).exact() == Fraction(3, 7)


def test_trig_expression_interval_contains_point():
    e = RealExpr("-cos(pi/9)/sqrt(2)")
    box = e.interval(200)
    pt = e.mpf(400)
    with precision(200):
        assert box.a <= pt <= box.b


@pytest.mark.parametrize("bad", ["__import__('os')", "x + 1", "foo(2)", "'a'", "[1]", "lambda: 1"])
def test_rejects_unsafe(bad):
    with pytest.raises(ExprError):
        RealExpr(bad)


def test_interval_compare():
    with precision(64):
        a, b = iv.mpf([1, 2]), iv.mpf([3, 4])
        assert interval_compare(b, a) is True
        assert interval_compare(a, b) is False
        assert interval_compare(a, iv.mpf([1.5, 1.6])) is None


def test_bits_for_epsilon():
    assert bits_for_epsilon(2**-10) == 168
