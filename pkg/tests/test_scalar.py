from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from poissonlr.exact.scalar import I, ONE, Poly, as_q

VARS = ("x", "z", "alpha")

rationals = st.builds(mpq, st.integers(-40, 40), st.integers(1, 12))


@st.composite
def polys(draw, max_terms=4):
    out = Poly()
    for _ in range(draw(st.integers(0, max_terms))):
        mono = Poly.const(draw(rationals))
        if draw(st.booleans()):
            mono = mono * I
        for v in VARS:
            mono = mono * Poly.var(v) ** draw(st.integers(0, 3))
        out = out + mono
    return out


def test_i_squared_is_minus_one():
    assert I * I == -ONE
    assert I ** 4 == ONE


@pytest.mark.parametrize("text, expected", [
    ("3/4", Poly.const(mpq(3, 4))),
    ("x^2 - 1", Poly.var("x") ** 2 - 1),
    ("i*z", I * Poly.var("z")),
    ("(x + 1)*(x - 1)", Poly.var("x") ** 2 - 1),
    ("-2*alpha*z", Poly.var("alpha") * Poly.var("z") * -2),
])
def test_parse(text, expected):
    assert Poly.parse(text) == expected


@pytest.mark.parametrize("value", ["1/0", "x", "", "1.5.2"])
def test_as_q_rejects(value):
    with pytest.raises((ValueError, ZeroDivisionError)):
        as_q(value)


def test_as_q_accepts_fraction_types():
    assert as_q(Fraction(3, 6)) == mpq(1, 2)
    assert as_q("7/14") == mpq(1, 2)


def test_division_by_nonconstant_rejected():
    with pytest.raises(ZeroDivisionError):
        Poly.var("x") / Poly.var("z")


@given(polys(), polys(), polys())
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a - a == Poly()


@given(polys())
def test_str_parse_round_trip(a):
    assert Poly.parse(str(a)) == a


@given(polys(), polys())
def test_leibniz_for_diff(a, b):
    assert (a * b).diff("x") == a.diff("x") * b + a * b.diff("x")


@given(polys(), rationals)
def test_shift_is_substitution(a, s):
    x = Poly.var("x")
    assert a.shift(s) == a.subs("x", x + s)


@given(polys())
def test_conj_is_involution(a):
    assert a.conj().conj() == a
    assert (a * I).conj() == a.conj() * -I


@given(polys())
def test_coeffs_round_trip(a):
    assert Poly.from_coeffs(a.coeffs("x"), "x") == a
