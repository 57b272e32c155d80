import pytest

from essence_robust.ast import FunctionDomain, Project, Wildcard
from essence_robust.parser import (
    DuplicateBindingError,
    ParseError,
    ScopeError,
    format_params,
    parse_expr,
    parse_params,
    parse_spec,
)

ARRANGEMENT = """given n : int(1..)
letting Index be domain int(1..n)
find arrangement : function (surjective) Index --> Index
"""


def test_arrangement_structure():
    s = parse_spec(ARRANGEMENT)
    assert [d.kind for d in s.declarations] == ["given", "letting-domain", "find"]
    d = s.domain_of("arrangement")
    assert isinstance(d, FunctionDomain)
    assert {a.name for a in d.attrs} == {"surjective"}


def test_minimal_spec():
    s = parse_spec("find x : int(1..2)")
    assert s.finds == ("x",) and s.constraints == ()


def test_truncated_domain_reports_position():
    with pytest.raises(ParseError) as err:
        parse_spec("find x : set of")
    assert err.value.line == 1 and err.value.column == 16


def test_undeclared_name():
    with pytest.raises(ScopeError):
        parse_spec("find x : int(1..2)\nsuch that x = y")


def test_duplicate_declaration():
    with pytest.raises(ScopeError):
        parse_spec("find x : int(1..2)\nfind x : bool")


def test_duplicate_parameter_binding():
    with pytest.raises(DuplicateBindingError):
        parse_params("letting n be 1\nletting n be 2")


def test_epsilon_is_not_syntax():
    with pytest.raises(ParseError):
        parse_spec("find x : int(1..2)\nsuch that x = ε")


def test_wildcard_only_in_projections():
    with pytest.raises(ParseError):
        parse_spec("find x : int(1..2)\nsuch that x = _")
    e = parse_expr("x(i,_,k) = {5}")
    assert isinstance(e.left, Project) and isinstance(e.left.args[1], Wildcard)


def test_comments_and_multi_name_finds():
    s = parse_spec("$ header\nfind f, g : int(1..2) $ trailing\nsuch that f != g")
    assert s.finds == ("f", "g") and len(s.constraints) == 1


def test_params():
    assert parse_params("letting n be 3") == {"n": 3}
    assert parse_params("") == {}
    assert parse_params("$ only a comment\n") == {}
    assert parse_params(format_params({"a": 1, "b": -2})) == {"a": 1, "b": -2}
    with pytest.raises(ParseError):
        parse_params("letting n be")
