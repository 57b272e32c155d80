"""Type strengthening: constructor changes justified by attributes.

``mset (maxOccur 1) of T`` becomes ``set of T`` and a relation with a
functionality attribute becomes a function.  Every occurrence of the
variable is wrapped in the back-conversion (``toMSet`` / ``toRelation``)
so constraints keep their meaning; :func:`simplify_wrappers` then removes
the wrappers where a plain equivalent exists.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Mapping

from .ast import (
    Apply,
    Attr,
    BinOp,
    Card,
    Conversion,
    Domain,
    DomainRef,
    Expr,
    Freq,
    FunctionDomain,
    IntLit,
    MSetDomain,
    Name,
    Node,
    Not,
    Project,
    Quant,
    QuantIn,
    RelationDomain,
    SetDomain,
    SetLit,
    Specification,
    ToMSet,
    ToRelation,
    TraceStep,
    TupleDomain,
    Wildcard,
    alpha_equal,
    domain_at,
    map_children,
    replace_at,
    resolve,
    substitute,
    transform,
)
from .attr_rules import Firing, rule_env
from .sizes import try_int

SIZE_ATTRIBUTES = ("size", "minSize", "maxSize")


@dataclass(frozen=True)
class TypeStrengthening:
    name: str
    from_constructor: str
    requires: tuple[str, ...]
    to_constructor: str
    wrapper: str


MSET_TO_SET = TypeStrengthening("mset-to-set", "mset", ("maxOccur 1",), "set", "toMSet")
RELATION_TO_FUNCTION = TypeStrengthening(
    "relation-to-function", "relation", ("functional | total_functional",), "function", "toRelation"
)
TYPE_RULES = (MSET_TO_SET, RELATION_TO_FUNCTION)


class _Abort(Exception):
    """A use of the variable the wrapper rewrite cannot express."""


def _unref(d: Domain, lettings: Mapping) -> Domain:
    while isinstance(d, DomainRef) and d.name in lettings:
        d = lettings[d.name]
    return d


def _shadows(e: Node, name: str) -> bool:
    return isinstance(e, (Quant, QuantIn)) and e.var == name


# ---------------------------------------------------------------------------
# mset -> set
# ---------------------------------------------------------------------------


def _set_attrs(d: MSetDomain, env: Mapping) -> tuple[Attr, ...] | None:
    occ = d.attr("maxOccur")
    if occ is None or try_int(occ.value, env) != 1:
        return None
    low = d.attr("minOccur")
    if low is not None and try_int(low.value, env) != 0:
        return None  # a positive minOccur would force every element in
    return tuple(a for a in d.attrs if a.name in SIZE_ATTRIBUTES)


def _wrap_members(e: Expr, ref: Name, depth: int) -> Expr:
    """Wrap members ``depth`` levels below ``ref`` in ``toMSet``.

    Members are reachable only through ``forall m in ref`` chains; the only
    other permitted use of a collection on the way down is ``|ref|``.
    """
    if e == ref:
        raise _Abort
    match e:
        case Card(operand) if operand == ref:
            return e
        case QuantIn(kind, var, coll, body) if coll == ref:
            if var == ref.ident:
                raise _Abort
            if depth == 1:
                inner = substitute(body, var, ToMSet(Name(var)))
            else:
                inner = _wrap_members(body, Name(var), depth - 1)
            return QuantIn(kind, var, coll, _wrap_members(inner, ref, depth))
    if _shadows(e, ref.ident):
        return e
    return map_children(e, lambda c: _wrap_members(c, ref, depth) if isinstance(c, Expr) else c)


def mset_to_set(
    spec: Specification, target: str, params: Mapping | None = None
) -> Firing | None:
    """Turn an ``mset (maxOccur 1)`` (possibly nested in sets/msets) into a set."""
    env = rule_env(spec, params)
    lettings = spec.domain_lettings()
    before = spec.domain_of(target)
    root = _unref(before, lettings)
    path: tuple = ()
    while True:
        d = _unref(domain_at(root, path), lettings)
        if isinstance(d, MSetDomain):
            attrs = _set_attrs(d, env)
            if attrs is not None:
                break
        if not isinstance(d, (SetDomain, MSetDomain)):
            return None
        path += ("inner",)
    new_dom = SetDomain(d.inner, attrs)
    try:
        if not path:
            constraints = [substitute(c, target, ToMSet(Name(target))) for c in spec.constraints]
        else:
            constraints = [_wrap_members(c, Name(target), len(path)) for c in spec.constraints]
    except _Abort:
        return None
    after = replace_at(root, path, new_dom)
    new = spec.with_domain(target, after).with_constraints(constraints)
    conv = Conversion("toMSet", path)
    return Firing(new, TraceStep(MSET_TO_SET.name, target, before, after, None, True, conv))


# ---------------------------------------------------------------------------
# relation -> function
# ---------------------------------------------------------------------------


def _functionality(d: RelationDomain) -> Attr | None:
    found = [a for a in d.attrs if a.cols is not None]
    if not found:
        return None
    chosen = next((a for a in found if a.name == "total_functional"), found[0])
    if any(a.cols != chosen.cols for a in found):
        return None  # two different functional dependencies: no single function
    return chosen


def _permute(args: tuple, perm: tuple[int, ...]) -> tuple:
    return tuple(args[i] for i in perm)


def _wrap_relation(e: Expr, name: str, perm: tuple[int, ...]) -> Expr:
    identity = perm == tuple(range(len(perm)))
    ref = Name(name)
    match e:
        case Name(ident) if ident == name:
            if identity:
                return ToRelation(ref)
            raise _Abort
        case Apply(callee, args) | Project(callee, args) if callee == ref:
            if len(args) != len(perm):
                raise _Abort
            new_args = tuple(_wrap_relation(a, name, perm) for a in _permute(args, perm))
            return dataclasses.replace(e, callee=ToRelation(ref), args=new_args)
        case Card(operand) if operand == ref:
            return Card(ToRelation(ref))
    if _shadows(e, name):
        return e
    return map_children(e, lambda c: _wrap_relation(c, name, perm) if isinstance(c, Expr) else c)


def relation_to_function(
    spec: Specification, target: str, params: Mapping | None = None
) -> Firing | None:
    """Turn a relation with a functionality attribute into a function."""
    lettings = spec.domain_lettings()
    before = spec.domain_of(target)
    d = _unref(before, lettings)
    if not isinstance(d, RelationDomain) or not isinstance(d.columns, tuple):
        return None
    fn = _functionality(d)
    if fn is None:
        return None
    columns = d.columns
    if any(isinstance(resolve(c, lettings), TupleDomain) for c in columns):
        return None  # tuple-valued columns would make the graph ambiguous
    keys = [c - 1 for c in fn.cols]
    rest = [i for i in range(len(columns)) if i not in keys]
    perm = tuple(keys + rest)

    def side(idx):
        doms = tuple(columns[i] for i in idx)
        return doms[0] if len(doms) == 1 else TupleDomain(doms)

    attrs = [a for a in d.attrs if a.name in SIZE_ATTRIBUTES]
    if fn.name == "total_functional":
        attrs.append(Attr("total"))
    after = FunctionDomain(side(keys), side(rest), tuple(attrs))
    try:
        constraints = [_wrap_relation(c, target, perm) for c in spec.constraints]
    except _Abort:
        return None
    new = spec.with_domain(target, after).with_constraints(constraints)
    conv = Conversion("toRelation", (), perm, len(keys))
    return Firing(new, TraceStep(RELATION_TO_FUNCTION.name, target, before, after, None, True, conv))


def apply_type_rule(
    rule: TypeStrengthening, spec: Specification, target: str, params: Mapping | None = None
) -> Firing | None:
    if rule is MSET_TO_SET:
        return mset_to_set(spec, target, params)
    if rule is RELATION_TO_FUNCTION:
        return relation_to_function(spec, target, params)
    raise KeyError(rule.name)


# ---------------------------------------------------------------------------
# Wrapper simplification
# ---------------------------------------------------------------------------


def _member(v: Expr, coll: Expr, positive: bool) -> Expr:
    test = BinOp("in", v, coll)
    return test if positive else Not(test)


# ``freq(toMSet(x), v) op c`` with its value as a membership test (True)
# or a non-membership test (False); a set has multiplicities 0 and 1 only.
_FREQ_FORMS = {
    ("=", 0): False,
    ("!=", 0): True,
    ("=", 1): True,
    ("!=", 1): False,
    ("<=", 0): False,
    ("<", 1): False,
    (">=", 1): True,
    (">", 0): True,
}
# the same with the constant on the left: ``c op freq(toMSet(x), v)``
_FREQ_FORMS_FLIPPED = {
    ("=", 0): False,
    ("!=", 0): True,
    ("=", 1): True,
    ("!=", 1): False,
    ("<", 0): True,
    ("<=", 1): True,
    (">=", 0): False,
    (">", 1): False,
}


def _total_function(spec: Specification, e: Expr) -> FunctionDomain | None:
    if not isinstance(e, Name):
        return None
    decl = spec.declaration(e.ident)
    if decl is None or decl.kind != "find":
        return None
    d = _unref(decl.payload, spec.domain_lettings())
    if isinstance(d, FunctionDomain) and d.has("total"):
        return d
    return None


def _arity(d: Domain, lettings: Mapping) -> int:
    d = _unref(d, lettings)
    return len(d.elems) if isinstance(d, TupleDomain) else 1


def _simplify_node(spec: Specification, n: Node) -> Node:
    lettings = spec.domain_lettings()
    match n:
        case Card(ToMSet(x)) | Card(ToRelation(x)):
            return Card(x)
        case BinOp("in", v, ToMSet(x)):
            return BinOp("in", v, x)
        case QuantIn(kind, var, ToMSet(x), body):
            return QuantIn(kind, var, x, body)
        case BinOp(op, Freq(ToMSet(x), v), IntLit(c)) if (op, c) in _FREQ_FORMS:
            return _member(v, x, _FREQ_FORMS[(op, c)])
        case BinOp(op, IntLit(c), Freq(ToMSet(x), v)) if (op, c) in _FREQ_FORMS_FLIPPED:
            return _member(v, x, _FREQ_FORMS_FLIPPED[(op, c)])
        case BinOp("=", Project(ToRelation(f), args), SetLit((e,))) | BinOp(
            "=", SetLit((e,)), Project(ToRelation(f), args)
        ):
            d = _total_function(spec, f)
            if d is not None and _arity(d.target, lettings) == 1:
                k = _arity(d.source, lettings)
                keys, results = args[:k], args[k:]
                if len(results) == 1 and isinstance(results[0], Wildcard) and not any(
                    isinstance(a, Wildcard) for a in keys
                ):
                    return BinOp("=", Apply(f, keys), e)
        case Apply(ToRelation(f), args):
            d = _total_function(spec, f)
            if d is not None and _arity(d.target, lettings) == 1:
                k = _arity(d.source, lettings)
                if len(args) == k + 1:
                    return BinOp("=", Apply(f, args[:k]), args[k])
    return n


def simplify_expr(spec: Specification, e: Expr) -> Expr:
    """Rewrite wrapper forms in ``e`` until nothing changes."""
    while True:
        new = transform(e, lambda n: _simplify_node(spec, n))
        if alpha_equal(new, e) and new == e:
            return e
        e = new


def simplify_wrappers(spec: Specification) -> Specification:
    return spec.with_constraints(simplify_expr(spec, c) for c in spec.constraints)
