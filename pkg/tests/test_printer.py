from essence_robust.parser import parse_expr, parse_spec
from essence_robust.printer import pretty_print, show


def test_nested_mset_print():
    s = parse_spec("find S: set (size 2) of mset (maxOccur 3) of int(0..9)")
    assert "set (size 2) of mset (maxOccur 3) of int(0..9)" in pretty_print(s)


def test_no_constraints_no_such_that():
    assert "such that" not in pretty_print(parse_spec("find x : int(1..2)"))


def test_constraints_block():
    text = pretty_print(parse_spec("find x : set of int(1..3)\nsuch that |x| = 2, 1 in x"))
    assert text == "find x : set of int(1..3)\nsuch that\n  |x| = 2,\n  1 in x\n"


def test_bijective_prints_as_one_flag():
    s = parse_spec("find f : function (injective, surjective, bijective, total) int(1..2) --> int(1..2)")
    assert "function (total, bijective)" in pretty_print(s)


def test_parenthesisation_round_trips():
    for text in ["(a + b) * c", "a - (b - c)", "!(a /\\ b) \\/ c", "(a -> b) -> c", "-(a + 1) < 2"]:
        e = parse_expr(text)
        assert parse_expr(show(e)) == e, text
