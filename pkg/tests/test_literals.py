from fractions import Fraction

import pytest

from ktop.errors import ParseError
from ktop.literals import parse_machine, parse_point


def test_cantor_literals():
    x = parse_point("bits:001(01)*", "cantor")
    assert x.prefix(9) == "001010101"
    assert parse_point("bits:1", "cantor").prefix(4) == "1000"


def test_real_literals():
    assert parse_point("-5/8", "reals").exact == Fraction(-5, 8)
    third = parse_point("1/3", "reals")
    assert third.exact is None
    assert all(abs(third.approx(k) - Fraction(1, 3)) <= Fraction(1, 1 << k) for k in range(20))
    assert parse_point("1/4 + 1/8", "reals").exact == Fraction(3, 8)
    assert parse_point("7", "reals").exact == 7


@pytest.mark.parametrize("text,space", [
    ("1/0", "reals"), ("x + 1", "reals"), ("bits:012", "cantor"), ("{1,a}", "scott"),
    ("{3,1,...}", "scott"), ("{1,2,4,...}", "scott"), ("0", "hilbert"),
])
def test_bad_literals(text, space):
    with pytest.raises(ParseError):
        parse_point(text, space)


def test_scott_literals():
    assert parse_point("{}", "scott").observed(10) == frozenset()
    assert parse_point("{4, 2}", "scott").observed(10) == {2, 4}
    assert {1, 4, 7, 10} <= parse_point("{1,4,...}", "scott").observed(20)
    assert {2, 3, 5, 7} <= parse_point("primes", "scott").observed(40)


@pytest.mark.parametrize("text,observed,fuel,want", [
    ("ACCEPT ALWAYS", set(), 0, True),
    ("accept never", {1, 2, 3}, 99, False),
    ("ACCEPT WHEN HAS {2,5}", {2, 5}, 0, True),
    ("ACCEPT WHEN HAS {2,5}", {2}, 9, False),
    ("ACCEPT WHEN HAS {1} AFTER FUEL 100", {1}, 99, False),
    ("ACCEPT WHEN HAS {1} AFTER FUEL 100", {1}, 100, True),
    ("ACCEPT WHEN HAS {1} OR HAS {2} AND HAS {3}", {2}, 0, False),
    ("ACCEPT WHEN (HAS {1} OR HAS {2}) AND HAS {3}", {2, 3}, 0, True),
])
def test_machine_language(text, observed, fuel, want):
    m = parse_machine(text)
    assert m.step(observed, fuel) is want
    assert m.source == text


@pytest.mark.parametrize("text,col", [
    ("ACCEPT WHEN HAS 2", 17), ("ACCEPT", 7), ("ACCEPT WHEN HAS {2} XOR HAS {3}", 21),
    ("ACCEPT WHEN HAS {2;3}", 19),
])
def test_machine_parse_errors(text, col):
    with pytest.raises(ParseError) as e:
        parse_machine(text)
    assert e.value.column == col
