import math

import pytest

from essence_robust.parser import parse_domain
from essence_robust.sizes import InfiniteDomain, UnboundName, bell, domain_size, surjections


@pytest.mark.parametrize(
    "text, expected",
    [
        ("relation of (int(1..3) * int(4..6) * int(7..9))", 134_217_728),
        ("function (total) (int(1..3), int(7..9)) --> int(4..6)", 19_683),
        ("int(1..1)", 1),
        ("set (size 2) of int(0..9)", 45),
        ("bool", 2),
        ("set of int(1..4)", 16),
        ("function int(1..2) --> int(1..3)", 16),  # partial: 4^2
        ("function (total, injective) int(1..3) --> int(1..4)", 24),
        ("function (total, surjective) int(1..4) --> int(1..2)", 14),
        ("mset (maxOccur 2) of int(1..3)", 27),
        ("mset (size 2) of int(1..3)", 6),
        ("partition from int(1..3)", 15),  # parts need not cover the set
        ("partition (complete) from int(1..4)", 15),
        ("sequence (size 2) of int(1..3)", 9),
        ("sequence (maxSize 2) of int(1..2)", 7),
        ("relation (total_functional (1)) of (int(1..3) * int(1..2))", 8),
    ],
)
def test_domain_sizes(text, expected):
    assert domain_size(parse_domain(text)) == expected


def test_unbounded_inner_mset_is_infinite():
    with pytest.raises(InfiniteDomain):
        domain_size(parse_domain("set of mset of int(0..9)"))


def test_bounded_inner_mset_is_finite():
    inner = 4**10  # counts 0..3 for each of ten values
    assert domain_size(parse_domain("set (size 2) of mset (maxOccur 3) of int(0..9)")) == math.comb(inner, 2)


def test_parameters_and_lettings():
    d = parse_domain("function (total) Index --> Index", scoped=False)
    env = {"n": 3, "Index": parse_domain("int(1..n)")}
    assert domain_size(d, env) == 27
    with pytest.raises(UnboundName):
        domain_size(parse_domain("int(1..n)"))


def test_closed_forms():
    assert [bell(n) for n in range(6)] == [1, 1, 2, 5, 15, 52]
    assert surjections(4, 2) == 14 and surjections(3, 3) == 6 and surjections(2, 3) == 0
