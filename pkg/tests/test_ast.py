import pytest

from essence_robust.ast import (
    Attr,
    AttributeConflict,
    BinOp,
    Card,
    Freq,
    FunctionDomain,
    IntDomain,
    IntLit,
    MSetDomain,
    Name,
    Quant,
    RuleTrace,
    SetDomain,
    ToMSet,
    TraceStep,
    alpha_equal,
    conjoin,
    conjuncts,
    domain_at,
    domain_positions,
    free_names,
    fresh_name,
    replace_at,
    substitute,
)
from essence_robust.parser import parse_domain, parse_expr

D = IntDomain(IntLit(1), IntLit(3))


def test_attributes_are_stored_in_canonical_order():
    d = parse_domain("function (surjective, total) int(1..3) --> int(1..3)")
    assert [a.name for a in d.attrs] == ["total", "surjective"]


def test_bijective_expands_to_the_pair():
    d = FunctionDomain(D, D, (Attr("bijective"),))
    assert d.has("injective") and d.has("surjective") and d.has("bijective")


@pytest.mark.parametrize(
    "attrs",
    [
        (Attr("maxOccur", IntLit(2)),),  # illegal on set
        (Attr("size", IntLit(3)), Attr("maxSize", IntLit(2))),
        (Attr("minSize", IntLit(3)), Attr("size", IntLit(2))),
        (Attr("minSize", IntLit(3)), Attr("maxSize", IntLit(2))),
    ],
)
def test_bad_attributes_are_rejected(attrs):
    with pytest.raises(AttributeConflict):
        SetDomain(D, attrs)


def test_substitute_replaces_free_occurrences():
    e = parse_expr("freq(x,2) = 0")
    assert substitute(e, "x", ToMSet(Name("y"))) == BinOp(
        "=", Freq(ToMSet(Name("y")), IntLit(2)), IntLit(0)
    )


def test_substitute_respects_binders():
    e = Quant("forall", "x", D, BinOp("<", Name("x"), IntLit(3)))
    assert substitute(e, "x", Name("y")) == e


def test_substitute_avoids_capture():
    e = Quant("forall", "i", D, BinOp("<", Name("i"), Name("x")))
    out = substitute(e, "x", Name("i"))
    assert out.var != "i"
    assert free_names(out) == {"i"}


def test_alpha_equal_binder_renaming():
    a = Quant("forall", "i", D, BinOp("<", Name("i"), IntLit(3)))
    b = Quant("forall", "j", D, BinOp("<", Name("j"), IntLit(3)))
    c = Quant("forall", "i", D, BinOp("<", Name("i"), IntLit(4)))
    assert alpha_equal(a, b)
    assert not alpha_equal(a, c)


def test_alpha_equal_distinguishes_free_from_bound():
    a = Quant("forall", "i", D, BinOp("<", Name("i"), Name("j")))
    b = Quant("forall", "j", D, BinOp("<", Name("j"), Name("j")))
    assert not alpha_equal(a, b)


def test_conjuncts_and_conjoin():
    e = parse_expr("a /\\ (b /\\ c)")
    parts = conjuncts(e)
    assert parts == [Name("a"), Name("b"), Name("c")]
    assert conjuncts(conjoin(parts)) == parts
    assert conjoin([]) is None


def test_fresh_name_avoids_taken():
    assert fresh_name("i", {"i", "i1"}) not in {"i", "i1"}


def test_domain_paths():
    d = parse_domain("set of mset of int(0..9)")
    paths = [p for p, _ in domain_positions(d)]
    assert () in paths and ("inner",) in paths
    assert isinstance(domain_at(d, ("inner",)), MSetDomain)
    new = replace_at(d, ("inner",), parse_domain("mset (maxOccur 3) of int(0..9)"))
    assert domain_at(new, ("inner",)).has("maxOccur")


def test_trace_append_is_persistent():
    t = RuleTrace()
    step = TraceStep("set-size", "S", None, None, Card(Name("S")), False)
    t2 = t.append(step)
    assert len(t) == 0 and len(t2) == 1 and list(t2) == [step]
