import pytest

from essence_robust.ast import IntLit, Meta, Name
from essence_robust.matcher import (
    ANY,
    CONSTANT,
    FRESH,
    Pattern,
    RuleDefinitionError,
    instantiate,
    match,
    match_all,
    normalize,
)
from essence_robust.parser import parse_domain, parse_expr, parse_spec
from essence_robust.printer import show

SPEC = parse_spec("find S : set of int(1..3)\nfind T : set of int(1..3)")
SIZE = Pattern.of(parse_expr("|&x| = &n"), constants={"n"})


def test_size_pattern_binds():
    b = match(SIZE, parse_expr("|S| = 2"), SPEC)
    assert b.as_dict() == {"x": Name("S"), "n": IntLit(2)}


def test_restriction_violation_is_no_match():
    assert match(SIZE, parse_expr("|S| = |T|"), SPEC) is None


def test_commutative_orientation():
    assert match(SIZE, parse_expr("2 = |S|"), SPEC) is not None


def test_closed_pattern_against_alpha_renamed_copy():
    p = parse_expr("forall i : int(1..3) . i < 3")
    b = match(p, parse_expr("forall j : int(1..3) . j < 3"))
    assert b is not None and len(b) == 0


def test_repeated_metavariable_needs_equal_subterms():
    p = Pattern.of(parse_expr("&a + &a"))
    assert match(p, parse_expr("x + x")) is not None
    assert match(p, parse_expr("x + y")) is None


def test_restriction_classes_are_inferred():
    p = Pattern.of(parse_expr("forall &i : &T . freq(&x, &i) <= &n"), constants={"n"})
    assert p.restriction("i") == FRESH
    assert p.restriction("n") == CONSTANT
    assert p.restriction("x") == ANY
    with pytest.raises(RuleDefinitionError):
        Pattern(Meta("x"), (("x", ANY), ("x", CONSTANT)))


def test_normalize():
    assert normalize(parse_expr("5 > |x|")) == parse_expr("|x| < 5")
    e = parse_expr("|x| < 5")
    assert normalize(e) == e
    assert normalize(parse_expr("b /\\ a")) == normalize(parse_expr("a /\\ b"))
    assert normalize(parse_expr("x <= 1 + 2")) == parse_expr("x <= 3")


def test_forall_chain_matches_up_to_permutation():
    p = parse_expr("forall &i : &A . forall &k : &B . |&x(&i, _, &k)| = 1")
    t = parse_expr("forall k : int(7..9) . forall i : int(1..3) . |r(i, _, k)| = 1")
    b = match(p, t)
    assert b is not None and show(b["A"]) == "int(1..3)"


def test_domain_attribute_subset():
    p = parse_domain("function (total) &A --> &B")
    assert match(p, parse_domain("function (total, injective) int(1..2) --> bool")) is not None
    assert match(p, parse_domain("function int(1..2) --> bool")) is None


def test_instantiate_nested_domain():
    out = instantiate(
        parse_domain("set (size &n) of &T"),
        {"n": IntLit(2), "T": parse_domain("mset (maxOccur 3) of int(0..9)")},
    )
    assert show(out) == "set (size 2) of mset (maxOccur 3) of int(0..9)"


def test_instantiate_closed_template_and_fresh_binders():
    closed = parse_expr("1 < 2")
    assert instantiate(closed, {}) == closed
    out = instantiate(parse_expr("forall &i : int(1..2) . &i < &n"), {"n": Name("i")})
    assert out.var != "i"
    with pytest.raises(RuleDefinitionError):
        instantiate(parse_expr("&y + 1"), {})


def test_match_all_is_exhaustive_and_duplicate_free():
    p = Pattern.of(parse_expr("&a /\\ &b"))
    found = list(match_all(p, parse_expr("x /\\ y")))
    assert len(found) == 2
