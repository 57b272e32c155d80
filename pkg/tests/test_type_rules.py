from essence_robust.ast import RuleTrace, ToRelation, walk
from essence_robust.oracle import check_equivalent
from essence_robust.parser import parse_expr, parse_spec
from essence_robust.printer import show
from essence_robust.type_rules import mset_to_set, relation_to_function, simplify_expr, simplify_wrappers


def test_mset_to_set_carries_size():
    s = parse_spec("find x : mset (maxOccur 1, size 2) of int(1..3)\nsuch that freq(x, 2) = 0")
    f = mset_to_set(s, "x")
    assert show(f.spec.domain_of("x")) == "set (size 2) of int(1..3)"
    assert show(f.spec.constraints[0]) == "freq(toMSet(x), 2) = 0"
    assert f.step.conversion.kind == "toMSet"


def test_mset_to_set_preserves_solutions():
    s = parse_spec("find x : mset (maxOccur 1, size 2) of int(1..3)")
    f = mset_to_set(s, "x")
    v = check_equivalent(s, f.spec, RuleTrace((f.step,)))
    assert v.equal and v.before_count == v.after_count == 3


def test_mset_to_set_needs_maxoccur_one():
    assert mset_to_set(parse_spec("find x : mset (maxOccur 2) of int(1..3)"), "x") is None
    assert mset_to_set(parse_spec("find x : mset (maxOccur 1, minOccur 1) of int(1..3)"), "x") is None


def test_nested_mset_to_set():
    s = parse_spec("find S : set (size 2) of mset (maxOccur 1) of int(1..3)\nsuch that forall m in S . 1 in m")
    f = mset_to_set(s, "S")
    assert show(f.spec.domain_of("S")) == "set (size 2) of set of int(1..3)"
    assert show(f.spec.constraints[0]) == "forall m in S . 1 in toMSet(m)"
    assert check_equivalent(s, f.spec, RuleTrace((f.step,))).equal


def test_relation_to_total_function():
    s = parse_spec("""find x : relation (total_functional (1,3)) of (int(1..3) * int(4..6) * int(7..9))
such that forall i : int(1..3) . forall k : int(7..9) . x(i,_,k) = {5}""")
    f = relation_to_function(s, "x")
    assert show(f.spec.domain_of("x")) == "function (total) (int(1..3), int(7..9)) --> int(4..6)"
    assert show(f.spec.constraints[0]) == (
        "forall i : int(1..3) . forall k : int(7..9) . toRelation(x)(i,k,_) = {5}"
    )
    assert f.step.conversion.permutation == (0, 2, 1)


def test_relation_to_partial_function():
    s = parse_spec("find x : relation (functional (1,2)) of (int(1..2) * int(1..2) * bool)")
    f = relation_to_function(s, "x")
    assert show(f.spec.domain_of("x")) == "function (int(1..2), int(1..2)) --> bool"
    assert check_equivalent(s, f.spec, RuleTrace((f.step,))).equal


def test_relation_without_functionality():
    assert relation_to_function(parse_spec("find x : relation of (int(1..2) * bool)"), "x") is None


def test_simplify_freq_and_cardinality():
    s = parse_spec("find x : set of int(1..3)")
    assert show(simplify_expr(s, parse_expr("freq(toMSet(x), 2) = 0"))) == "!(2 in x)"
    assert show(simplify_expr(s, parse_expr("freq(toMSet(x), 2) >= 1"))) == "2 in x"
    assert show(simplify_expr(s, parse_expr("|toMSet(x)| = 2"))) == "|x| = 2"


def test_simplify_projection():
    s = parse_spec("""find x : function (total) (int(1..3), int(7..9)) --> int(4..6)
such that forall i : int(1..3) . forall k : int(7..9) . toRelation(x)(i,k,_) = {5}""")
    out = simplify_wrappers(s)
    assert show(out.constraints[0]) == "forall i : int(1..3) . forall k : int(7..9) . x(i,k) = 5"
    assert not any(isinstance(n, ToRelation) for c in out.constraints for n in walk(c))


def test_partial_projection_is_left_alone():
    s = parse_spec("""find x : function (int(1..2), int(1..2)) --> int(4..5)
such that toRelation(x)(1,2,_) = {5}""")
    assert simplify_wrappers(s) == s


def test_wrapper_free_is_fixpoint():
    s = parse_spec("find x : set of int(1..3)\nsuch that |x| = 2")
    assert simplify_wrappers(s) == s
