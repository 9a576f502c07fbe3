from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from birkhoff.coeffs import GaussQ, format_rational, parse_rational

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=30)
gauss = st.builds(GaussQ, fractions, fractions)


def as_pair(c):
    return Fraction(int(c.re.numerator), int(c.re.denominator)), Fraction(int(c.im.numerator), int(c.im.denominator))


@given(gauss, gauss)
def test_arithmetic_matches_fraction_pairs(a, b):
    ar, ai = as_pair(a)
    br, bi = as_pair(b)
    assert as_pair(a + b) == (ar + br, ai + bi)
    assert as_pair(a - b) == (ar - br, ai - bi)
    assert as_pair(a * b) == (ar * br - ai * bi, ar * bi + ai * br)
    if b:
        q = a / b
        assert q * b == a


@given(gauss)
def test_parse_format_round_trip(c):
    assert GaussQ.parse(c.format()) == c


def test_parse_forms():
    assert GaussQ.parse("3") == GaussQ(3)
    assert GaussQ.parse("-1/3,2") == GaussQ(Fraction(-1, 3), 2)
    assert GaussQ.parse("2/4,0").format() == "1/2,0"
    assert parse_rational("-6/4") == Fraction(-3, 2)
    assert format_rational(parse_rational("10/5")) == "2"


@pytest.mark.parametrize("bad", ["1.5", "1/0", "a", "1,2,3", ""])
def test_parse_rejects(bad):
    with pytest.raises(ValueError):
        GaussQ.parse(bad)


def test_no_implicit_float():
    with pytest.raises(TypeError):
        GaussQ.coerce(0.5)
    with pytest.raises(TypeError):
        GaussQ.coerce(1j)


def test_equality_and_hash_with_ints():
    assert GaussQ(2) == 2
    assert hash(GaussQ(2)) == hash(GaussQ(Fraction(4, 2)))
    assert GaussQ(0, 1) * GaussQ(0, 1) == -1
    assert not GaussQ(0)
    assert complex(GaussQ(Fraction(1, 2), -1)) == 0.5 - 1j
    assert GaussQ(3, 4).norm2() == 25
    assert GaussQ(1, 2).conjugate() == GaussQ(1, -2)
