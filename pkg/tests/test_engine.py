import pytest

from essence_robust.attr_rules import StrengtheningConflict
from essence_robust.engine import prepare, replay, strengthen, termination_measure
from essence_robust.parser import parse_spec
from essence_robust.printer import pretty_print, show

ARRANGEMENT = """given n : int(1..)
letting Index be domain int(1..n)
find arrangement : function (surjective) Index --> Index
"""
FUNCTIONAL_RELATION = """find x : relation of (int(1..3) * int(4..6) * int(7..9))
such that forall i : int(1..3) . forall k : int(7..9) . x(i,_,k) = {5}"""
NEGATIVE = """given n : int(1..)
letting D be domain int(1..n)
find f, g : function D --> D
such that forall i, j : D . f(i) = j <-> g(j) = i"""


def test_surjective_arrangement():
    out, trace = strengthen(parse_spec(ARRANGEMENT))
    assert show(out.domain_of("arrangement")) == "function (total, bijective) Index --> Index"
    assert all(step.constraint is None for step in trace)


def test_functional_relation_three_steps():
    out, trace = strengthen(parse_spec(FUNCTIONAL_RELATION))
    assert [s.rule for s in trace] == [
        "relation-total-functional-singleton-3(1,3)",
        "relation-to-function",
        "simplify-wrappers",
    ]
    assert show(out.domain_of("x")) == "function (total) (int(1..3), int(7..9)) --> int(4..6)"
    assert "toRelation" not in pretty_print(out)


def test_negative_example_untouched():
    s = parse_spec(NEGATIVE)
    out, trace = strengthen(s)
    assert len(trace) == 0 and pretty_print(out) == pretty_print(prepare(s))


def test_measure_decreases_along_trace():
    spec = parse_spec(FUNCTIONAL_RELATION)
    _, trace = strengthen(spec)
    current = prepare(spec)
    measures = [termination_measure(current)]
    for step in trace:
        current = replay(spec, type(trace)(trace.steps[: trace.steps.index(step) + 1]))
        measures.append(termination_measure(current))
    assert all(a > b for a, b in zip(measures, measures[1:]))
    assert all(x >= 0 for m in measures for x in m)


def test_idempotent_and_deterministic():
    s = parse_spec(FUNCTIONAL_RELATION)
    out, _ = strengthen(s)
    again, trace = strengthen(parse_spec(pretty_print(out)))
    assert len(trace) == 0 and pretty_print(again) == pretty_print(out)
    assert pretty_print(strengthen(parse_spec(FUNCTIONAL_RELATION))[0]) == pretty_print(out)


def test_replay_reproduces_output():
    s = parse_spec(FUNCTIONAL_RELATION)
    out, trace = strengthen(s)
    assert replay(s, trace) == out


def test_replay_rejects_foreign_trace():
    _, trace = strengthen(parse_spec(FUNCTIONAL_RELATION))
    with pytest.raises(ValueError):
        replay(parse_spec(ARRANGEMENT), trace, {"n": 3})


def test_conflict_carries_trace_prefix():
    s = parse_spec("find x : set of int(1..4)\nsuch that |x| = 3, |x| <= 2")
    with pytest.raises(StrengtheningConflict) as err:
        strengthen(s)
    assert [step.rule for step in err.value.trace] == ["set-size"]


def test_top_level_conjunctions_are_split():
    out, trace = strengthen(parse_spec("find x : set of int(1..4)\nsuch that |x| = 2 /\\ 1 in x"))
    assert show(out.domain_of("x")) == "set (size 2) of int(1..4)"
    assert [show(c) for c in out.constraints] == ["1 in x"]


def test_only_finds_are_strengthened():
    s = parse_spec("given s : int(1..4)\nfind x : set of int(1..4)\nsuch that |x| = s")
    out, _ = strengthen(s)
    assert show(out.domain_of("x")) == "set (size s) of int(1..4)"
