import pytest

from essence_robust.ast import Conversion, RuleTrace
from essence_robust.attr_rules import StrengtheningRule, apply_rule
from essence_robust.engine import strengthen
from essence_robust.matcher import Pattern
from essence_robust.oracle import (
    BudgetExceeded,
    FunctionValue,
    MSetValue,
    PartitionValue,
    RelationValue,
    check_equivalent,
    enumerate_values,
    evaluate,
    format_value,
    satisfies,
    solve,
    unconvert,
)
from essence_robust.parser import parse_domain, parse_expr, parse_spec


def test_two_subsets():
    values = enumerate_values(parse_domain("set (size 2) of int(1..3)"))
    assert values == [frozenset({1, 2}), frozenset({1, 3}), frozenset({2, 3})]


def test_bijections():
    assert len(enumerate_values(parse_domain("function (total, bijective) int(1..3) --> int(1..3)"))) == 6


def test_freq_of_injected_set():
    assert evaluate(parse_expr("freq(toMSet(s), 2)"), {"s": frozenset({1, 2})}) == 1
    assert evaluate(parse_expr("freq(toMSet(s), 3)"), {"s": frozenset({1, 2})}) == 0


def test_function_application_matches_projection():
    f = FunctionValue.of({(i, k): 4 + (i + k) % 3 for i in range(1, 4) for k in range(7, 10)})
    for i in range(1, 4):
        for k in range(7, 10):
            scope = {"x": f, "i": i, "k": k}
            direct = evaluate(parse_expr("x(i,k)"), scope)
            projected = evaluate(parse_expr("toRelation(x)(i,k,_)"), scope)
            assert projected == frozenset({direct})


def test_number_of_parts():
    p = PartitionValue(frozenset({frozenset({1}), frozenset({2, 3})}))
    assert evaluate(parse_expr("|parts(p)|"), {"p": p}) == 2


def test_partial_application_is_false_not_an_error():
    f = FunctionValue.of({1: 2})
    assert evaluate(parse_expr("f(2) = 1"), {"f": f}) is False
    assert evaluate(parse_expr("f(2) != 1"), {"f": f}) is False
    assert evaluate(parse_expr("!(f(2) = 1)"), {"f": f}) is True


def test_relation_application_is_membership():
    r = RelationValue(frozenset({(1, 2)}))
    assert evaluate(parse_expr("r(1, 2)"), {"r": r}) is True
    assert evaluate(parse_expr("r(2, 1)"), {"r": r}) is False


def test_attribute_satisfaction():
    assert satisfies(MSetValue.of([1, 1, 2]), parse_domain("mset (maxOccur 2) of int(1..2)"))
    assert not satisfies(MSetValue.of([1, 1, 1]), parse_domain("mset (maxOccur 2) of int(1..2)"))
    assert not satisfies(MSetValue.of([1]), parse_domain("mset (minOccur 1) of int(1..2)"))
    assert satisfies(
        RelationValue(frozenset({(1, 5), (2, 5)})),
        parse_domain("relation (total_functional (1)) of (int(1..2) * int(5..6))"),
    )


def test_arrangement_solutions():
    text = """given n : int(1..)
letting Index be domain int(1..n)
find arrangement : function (surjective) Index --> Index
"""
    assert len(solve(parse_spec(text), {"n": 3})) == 6


def test_unconstrained_subsets():
    assert len(solve(parse_spec("find x : set of int(1..2)"))) == 4


def test_narrowed_nested_mset_differential():
    before = parse_spec("""find S : set of mset (maxSize 4) of int(0..1)
such that
  |S| = 2,
  forall m in S . forall i : int(0..1) . freq(m,i) <= 3""")
    after = parse_spec("find S : set (size 2) of mset (maxSize 4, maxOccur 3) of int(0..1)")
    assert len(solve(before)) == len(solve(after)) == 78


def test_solution_text_is_canonical():
    s = parse_spec("find a : bool\nfind b : set of int(1..2)\nsuch that a, |b| = 1")
    assert solve(s).to_text() == "a = true; b = {1}\na = true; b = {2}\n"
    assert format_value(MSetValue.of([2, 1, 1])) == "mset(1, 1, 2)"


def test_worker_count_does_not_change_output():
    s = parse_spec("find x : set of int(1..4)\nfind y : int(1..3)\nsuch that |x| = y")
    assert solve(s, jobs=2) == solve(s, jobs=1)


def test_budget():
    with pytest.raises(BudgetExceeded):
        solve(parse_spec("find x : set of int(1..30)"))
    with pytest.raises(BudgetExceeded):
        solve(parse_spec("find x : set of int(1..5)\nfind y : set of int(1..5)"), limit=100)


def test_unconvert():
    assert unconvert(frozenset({1, 2}), Conversion("toMSet", ())) == MSetValue.of([1, 2])
    f = FunctionValue.of({(1, 7): 5})
    back = unconvert(f, Conversion("toRelation", (), (0, 2, 1), 2))
    assert back == RelationValue(frozenset({(1, 5, 7)}))


def test_small_functional_relation_equivalence():
    s = parse_spec("""find x : relation of (int(1..2) * int(4..5) * int(7..8))
such that forall i : int(1..2) . forall k : int(7..8) . x(i,_,k) = {5}""")
    out, trace = strengthen(s)
    assert check_equivalent(s, out, trace).equal


def test_reflexivity():
    s = parse_spec("find x : set of int(1..3)\nsuch that |x| >= 2")
    assert check_equivalent(s, s, RuleTrace()).equal


def unsound_maxoccur() -> StrengtheningRule:
    """maxOccur read off a quantifier that ranges over only part of the elements."""
    return StrengtheningRule(
        "mset-maxOccur-subset-range",
        Pattern.of(parse_domain("mset of &T")),
        Pattern.of(parse_expr("forall &i : &S . freq(&x, &i) <= &n"), {"n"}),
        Pattern.of(parse_domain("mset (maxOccur &n) of &T"), {"n"}),
    )


def test_mutation_is_caught():
    s = parse_spec("find x : mset (maxSize 2) of int(1..2)\nsuch that forall i : int(1..1) . freq(x,i) <= 1")
    f = apply_rule(unsound_maxoccur(), s, "x")
    v = check_equivalent(s, f.spec, RuleTrace((f.step,)))
    assert v.status == "missing-solutions"
    assert v.missing == ((MSetValue.of([2, 2]),),)


def test_extra_solutions_detected():
    s = parse_spec("find x : set of int(1..2)\nsuch that |x| = 1")
    loose = parse_spec("find x : set of int(1..2)")
    assert check_equivalent(s, loose, RuleTrace()).status == "extra-solutions"
