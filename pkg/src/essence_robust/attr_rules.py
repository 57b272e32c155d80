"""Attribute-recovery rules and their application.

A rule pairs a domain pattern with an optional constraint pattern.  When
both match (the constraint being a top-level one, or a member constraint
under ``forall m in S``), the attributes of the rule's output template are
merged into the variable's domain and the constraint is removed unless the
rule says to keep it.  Rules never change a domain's constructor.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterator, Mapping

from .ast import (
    Attr,
    AttributeConflict,
    BoolDomain,
    Domain,
    DomainRef,
    Expr,
    IntDomain,
    Name,
    QuantIn,
    RelationDomain,
    SetDomain,
    MSetDomain,
    Specification,
    TraceStep,
    TupleDomain,
    alpha_equal,
    conjoin,
    conjuncts,
    fold_constants,
    metavariables,
    domain_at,
    domain_positions,
    replace_at,
    resolve,
    with_attrs,
)
from .matcher import Binding, Context, Pattern, instantiate, match_all
from .parser import parse_domain, parse_expr
from .printer import print_attrs
from .sizes import InfiniteDomain, UnboundName, domain_size, try_int

MAX_ATTRIBUTES = frozenset({"maxSize", "maxOccur", "maxNumParts", "maxPartSize"})
MIN_ATTRIBUTES = frozenset({"minSize", "minOccur", "minNumParts", "minPartSize"})
EXACT_ATTRIBUTES = frozenset({"size", "numParts", "partSize"})

Guard = Callable[[Binding, Mapping, Context], bool]


class StrengtheningConflict(ValueError):
    """Two sources demand contradictory attribute values."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class StrengtheningRule:
    name: str
    domain_pattern: Pattern
    constraint_pattern: Pattern | None
    output_domain: Pattern
    keep_constraint: bool = False
    guard: Guard | None = field(default=None, compare=False)
    example: str = ""
    description: str = ""

    def __post_init__(self):
        if self.constraint_pattern is None and not self.keep_constraint:
            object.__setattr__(self, "keep_constraint", True)

    @property
    def domain_only(self) -> bool:
        return self.constraint_pattern is None


@dataclass(frozen=True)
class Firing:
    spec: Specification
    step: TraceStep


# ---------------------------------------------------------------------------
# Rule construction helpers
# ---------------------------------------------------------------------------


def _rule(
    name: str,
    domain: str,
    constraint: str | None,
    output: str,
    keep: bool = False,
    guard: Guard | None = None,
    example: str = "",
    description: str = "",
) -> StrengtheningRule:
    out = parse_domain(output)
    constants = set()
    for a in out.attrs:
        if a.value is not None:
            constants |= metavariables(a.value)
    return StrengtheningRule(
        name,
        Pattern.of(parse_domain(domain), constants),
        Pattern.of(parse_expr(constraint), constants) if constraint else None,
        Pattern.of(out, constants),
        keep,
        guard,
        example,
        description,
    )


_CONSTRUCTORS = {
    "set": "set {a}of &T",
    "mset": "mset {a}of &T",
    "function": "function {a}&T_1 --> &T_2",
    "relation": "relation {a}of &C",
    "partition": "partition {a}from &T",
    "sequence": "sequence {a}of &T",
}

# Small example domains for each constructor, used by the per-rule oracle suite.
_EXAMPLE_DOMAINS = {
    "set": "set of int(1..3)",
    "mset": "mset (maxOccur 2) of int(1..2)",
    "function": "function int(1..2) --> int(1..3)",
    "relation": "relation of (int(1..2) * int(1..3))",
    "partition": "partition from int(1..3)",
    "sequence": "sequence (maxSize 3) of int(1..2)",
}


def _shape(ctor: str, attrs: str = "") -> str:
    return _CONSTRUCTORS[ctor].format(a=f"({attrs}) " if attrs else "")


def _example(domain: str, *constraints: str) -> str:
    text = f"find x : {domain}\n"
    if constraints:
        text += "such that\n  " + ",\n  ".join(constraints) + "\n"
    return text


def _size_rules() -> list[StrengtheningRule]:
    out = []
    for ctor in _CONSTRUCTORS:
        d = _shape(ctor)
        ex = _EXAMPLE_DOMAINS[ctor]
        forms = [
            ("size", "|&x| = &n", "size &n", "|x| = 2"),
            ("maxSize", "|&x| <= &n", "maxSize &n", "|x| <= 2"),
            ("maxSize-strict", "|&x| < &n", "maxSize &n - 1", "|x| < 2"),
            ("minSize", "&n <= |&x|", "minSize &n", "|x| >= 2"),
            ("minSize-strict", "&n < |&x|", "minSize &n + 1", "|x| > 1"),
        ]
        for suffix, pattern, attr, example in forms:
            out.append(
                _rule(
                    f"{ctor}-{suffix}",
                    d,
                    pattern,
                    _shape(ctor, attr),
                    example=_example(ex, example),
                    description=f"cardinality constraint on a {ctor} becomes {attr.split()[0]}",
                )
            )
    return out


def _mset_rules() -> list[StrengtheningRule]:
    d = _shape("mset")
    ex = "mset (maxSize 3) of int(1..2)"
    return [
        _rule(
            "mset-maxOccur",
            d,
            "forall &i : &T . freq(&x, &i) <= &n",
            _shape("mset", "maxOccur &n"),
            example=_example(ex, "forall i : int(1..2) . freq(x, i) <= 1"),
            description="occurrence bound over the whole element domain",
        ),
        _rule(
            "mset-maxOccur-strict",
            d,
            "forall &i : &T . freq(&x, &i) < &n",
            _shape("mset", "maxOccur &n - 1"),
            example=_example(ex, "forall i : int(1..2) . freq(x, i) < 2"),
        ),
        _rule(
            "mset-minOccur",
            d,
            "forall &i : &T . &n <= freq(&x, &i)",
            _shape("mset", "minOccur &n"),
            example=_example(ex, "forall i : int(1..2) . freq(x, i) >= 1"),
        ),
        _rule(
            "mset-minOccur-strict",
            d,
            "forall &i : &T . &n < freq(&x, &i)",
            _shape("mset", "minOccur &n + 1"),
            example=_example(ex, "forall i : int(1..2) . freq(x, i) > 0"),
        ),
    ]


def _partition_rules() -> list[StrengtheningRule]:
    d = _shape("partition")
    ex = "partition from int(1..3)"
    parts = [
        ("partSize", "forall &p in parts(&x) . |&p| = &n", "partSize &n",
         "forall p in parts(x) . |p| = 1"),
        ("maxPartSize", "forall &p in parts(&x) . |&p| <= &n", "maxPartSize &n",
         "forall p in parts(x) . |p| <= 2"),
        ("minPartSize", "forall &p in parts(&x) . &n <= |&p|", "minPartSize &n",
         "forall p in parts(x) . |p| >= 2"),
        ("numParts", "|parts(&x)| = &n", "numParts &n", "|parts(x)| = 2"),
        ("minNumParts", "&n <= |parts(&x)|", "minNumParts &n", "|parts(x)| >= 2"),
        ("maxNumParts", "|parts(&x)| <= &n", "maxNumParts &n", "|parts(x)| <= 1"),
    ]
    out = [
        _rule(f"partition-{name}", d, pattern, _shape("partition", attr), example=_example(ex, example))
        for name, pattern, attr, example in parts
    ]
    out.append(
        _rule(
            "partition-regular",
            d,
            "forall &i, &j in parts(&x) . |&i| = |&j|",
            _shape("partition", "regular"),
            example=_example(ex, "forall i, j in parts(x) . |i| = |j|"),
            description="all parts share one cardinality",
        )
    )
    return out


def _finite_shape(d: Domain, lettings: Mapping) -> bool:
    d = resolve(d, dict(lettings))
    match d:
        case IntDomain(lo, hi):
            return lo is not None and hi is not None
        case BoolDomain():
            return True
        case TupleDomain(elems):
            return all(_finite_shape(e, lettings) for e in elems)
    return False


def _size_of(d: Domain, env: Mapping) -> int | None:
    try:
        return domain_size(d, env)
    except (InfiniteDomain, UnboundName, TypeError):
        return None


def _equal_sides(b: Binding, env: Mapping, ctx: Context) -> bool:
    t1, t2 = b["T_1"], b["T_2"]
    if alpha_equal(ctx.resolve(t1), ctx.resolve(t2)):
        return _finite_shape(t1, ctx.lettings)
    n1, n2 = _size_of(t1, env), _size_of(t2, env)
    return n1 is not None and n1 == n2


def _nonempty_elements(b: Binding, env: Mapping, ctx: Context) -> bool:
    n = _size_of(b["T"], env)
    return n is not None and n > 0


def _covering_parts(b: Binding, env: Mapping, ctx: Context) -> bool:
    k, s = try_int(b["k"], env), try_int(b["s"], env)
    n = _size_of(b["T"], env)
    return None not in (k, s, n) and k * s == n


def _function_rules() -> list[StrengtheningRule]:
    d = _shape("function")
    total = _shape("function", "total")
    return [
        _rule(
            "function-total",
            d,
            "forall &i : &T_1 . &x(&i) = &exp",
            _shape("function", "total"),
            keep=True,
            example=_example("function int(1..2) --> int(1..3)", "forall i : int(1..2) . x(i) = i + 1"),
            description="every point of the source is assigned",
        ),
        _rule(
            "function-total-pair",
            "function (&A, &B) --> &T_2",
            "forall &i : &A . forall &k : &B . &x(&i, &k) = &exp",
            "function (total) (&A, &B) --> &T_2",
            keep=True,
            example=_example(
                "function (int(1..2), int(1..2)) --> int(1..2)",
                "forall i : int(1..2) . forall k : int(1..2) . x(i, k) = i",
            ),
            description="every pair in a product source is assigned",
        ),
        _rule(
            "function-surjective",
            d,
            "forall &j : &T_2 . exists &i : &T_1 . &x(&i) = &j",
            _shape("function", "surjective"),
            example=_example(
                "function int(1..3) --> int(1..2)",
                "forall j : int(1..2) . exists i : int(1..3) . x(i) = j",
            ),
        ),
        _rule(
            "function-injective",
            total,
            "forall &i, &j : &T_1 . &i != &j -> &x(&i) != &x(&j)",
            _shape("function", "injective"),
            example=_example(
                "function (total) int(1..2) --> int(1..3)",
                "forall i, j : int(1..2) . i != j -> x(i) != x(j)",
            ),
            description="distinct points have distinct images (total functions only)",
        ),
        _rule(
            "function-injective-contrapositive",
            total,
            "forall &i, &j : &T_1 . &x(&i) = &x(&j) -> &i = &j",
            _shape("function", "injective"),
            example=_example(
                "function (total) int(1..2) --> int(1..3)",
                "forall i, j : int(1..2) . x(i) = x(j) -> i = j",
            ),
        ),
        _rule(
            "function-injective-ordered",
            total,
            "forall &i, &j : &T_1 . &i < &j -> &x(&i) != &x(&j)",
            _shape("function", "injective"),
            example=_example(
                "function (total) int(1..3) --> int(1..3)",
                "forall i, j : int(1..3) . i < j -> x(i) != x(j)",
            ),
        ),
        _rule(
            "function-surjective-equal-sizes",
            _shape("function", "surjective"),
            None,
            _shape("function", "total, injective"),
            guard=_equal_sides,
            example=_example("function (surjective) int(1..3) --> int(1..3)"),
            description="a surjection between equal finite sides is a total bijection",
        ),
        _rule(
            "function-bijective",
            _shape("function", "injective, surjective"),
            None,
            _shape("function", "bijective"),
            example=_example("function (injective, surjective) int(1..3) --> int(1..3)"),
        ),
    ]


def _sequence_rules() -> list[StrengtheningRule]:
    d = "sequence (size &n) of &T"
    ex = "sequence (size 2) of int(1..3)"
    return [
        _rule(
            "sequence-injective",
            d,
            "forall &i, &j : int(1..&n) . &i != &j -> &x(&i) != &x(&j)",
            "sequence (injective) of &T",
            example=_example(ex, "forall i, j : int(1..2) . i != j -> x(i) != x(j)"),
        ),
        _rule(
            "sequence-surjective",
            d,
            "forall &j : &T . exists &i : int(1..&n) . &x(&i) = &j",
            "sequence (surjective) of &T",
            example=_example(
                "sequence (size 3) of int(1..2)",
                "forall j : int(1..2) . exists i : int(1..3) . x(i) = j",
            ),
        ),
        _rule(
            "sequence-bijective",
            "sequence (injective, surjective) of &T",
            None,
            "sequence (bijective) of &T",
            example=_example("sequence (size 2, injective, surjective) of int(1..2)"),
        ),
    ]


def _domain_only_rules() -> list[StrengtheningRule]:
    return [
        _rule(
            "mset-maxOccur-from-maxSize",
            "mset (maxSize &n) of &T",
            None,
            "mset (maxOccur &n) of &T",
            example=_example("mset (maxSize 2) of int(1..2)"),
        ),
        _rule(
            "mset-maxOccur-from-size",
            "mset (size &n) of &T",
            None,
            "mset (maxOccur &n) of &T",
            example=_example("mset (size 2) of int(1..3)"),
        ),
        _rule(
            "mset-minSize-from-minOccur",
            "mset (minOccur &n) of &T",
            None,
            "mset (minSize &n) of &T",
            guard=_nonempty_elements,
            example=_example("mset (minOccur 1, maxOccur 2) of int(1..2)"),
        ),
        _rule(
            "partition-complete-regular",
            "partition (numParts &k, partSize &s) from &T",
            None,
            "partition (complete, regular) from &T",
            guard=_covering_parts,
            example=_example("partition (numParts 2, partSize 1) from int(1..2)"),
        ),
    ]


def _relation_rules(max_arity: int) -> list[StrengtheningRule]:
    out = []
    for arity in range(2, max_arity + 1):
        cols = " * ".join(f"&T_{c}" for c in range(1, arity + 1))
        domain = f"relation of ({cols})"
        ground = " * ".join("int(1..2)" for _ in range(arity))
        if arity == 2:
            ground = "int(1..2) * int(1..3)"
        for k in range(1, arity):
            for keys in itertools.combinations(range(1, arity + 1), k):
                key_text = ",".join(str(c) for c in keys)
                chain = "".join(f"forall &a{c} : &T_{c} . " for c in keys)
                args = ", ".join(f"&a{c}" if c in keys else "_" for c in range(1, arity + 1))
                ex_chain = "".join(
                    f"forall a{c} : {_ground_column(ground, c)} . " for c in keys
                )
                ex_args = ", ".join(f"a{c}" if c in keys else "_" for c in range(1, arity + 1))
                variants = [
                    ("functional", "functional", f"|&x({args})| <= 1", f"|x({ex_args})| <= 1", False),
                    ("total-functional", "total_functional", f"|&x({args})| = 1", f"|x({ex_args})| = 1", False),
                ]
                if arity - k == 1:
                    variants.append(
                        ("total-functional-singleton", "total_functional",
                         f"&x({args}) = {{&c}}", f"x({ex_args}) = {{1}}", True)
                    )
                for label, attr, pattern, example, keep in variants:
                    out.append(
                        _rule(
                            f"relation-{label}-{arity}({key_text})",
                            domain,
                            chain + pattern,
                            f"relation ({attr} ({key_text})) of ({cols})",
                            keep=keep,
                            example=_example(f"relation of ({ground})", ex_chain + example),
                        )
                    )
    return out


def _ground_column(ground: str, c: int) -> str:
    return ground.split(" * ")[c - 1]


@lru_cache(maxsize=None)
def rule_catalogue(max_arity: int = 3) -> tuple[StrengtheningRule, ...]:
    """Every attribute-recovery rule, in application order."""
    return tuple(
        _size_rules()
        + _mset_rules()
        + _partition_rules()
        + _function_rules()
        + _sequence_rules()
        + _relation_rules(max_arity)
        + _domain_only_rules()
    )


def rule_named(name: str, max_arity: int = 3) -> StrengtheningRule:
    for r in rule_catalogue(max_arity):
        if r.name == name:
            return r
    raise KeyError(name)


# ---------------------------------------------------------------------------
# Attribute merging
# ---------------------------------------------------------------------------


class _NoFire(Exception):
    pass


def _describe(a: Attr) -> str:
    return print_attrs((a,)).strip()[1:-1]


def merge_attrs(base: Domain, new_attrs, env: Mapping, rule: str, target: str) -> Domain:
    """Install ``new_attrs`` on ``base``, keeping the tighter of clashing values."""
    by_name = {a.name: a for a in base.attrs}
    for a in new_attrs:
        a = Attr(a.name, fold_constants(a.value), a.cols) if a.value is not None else a
        old = by_name.get(a.name)
        if old is None:
            by_name[a.name] = a
            continue
        if a.value is None:
            if a.cols != old.cols:
                raise _NoFire
            continue
        if alpha_equal(old.value, a.value):
            continue
        ov, nv = try_int(old.value, env), try_int(a.value, env)
        if ov is None or nv is None:
            raise _NoFire
        if a.name in EXACT_ATTRIBUTES:
            if ov != nv:
                raise StrengtheningConflict(
                    f"{rule} recovers {_describe(a)} for {target}, "
                    f"but the domain already has {_describe(old)}"
                )
            continue
        keep_old = nv >= ov if a.name in MAX_ATTRIBUTES else nv <= ov
        if not keep_old:
            by_name[a.name] = a
    try:
        merged = with_attrs(base, by_name.values())
    except AttributeConflict as exc:
        raise StrengtheningConflict(f"{rule} on {target}: {exc}") from None
    _check_ground(merged, env, rule, target)
    return merged


_BOUNDS = (
    ("size", "minSize", "maxSize"),
    ("partSize", "minPartSize", "maxPartSize"),
    ("numParts", "minNumParts", "maxNumParts"),
    (None, "minOccur", "maxOccur"),
)


def _check_ground(d: Domain, env: Mapping, rule: str, target: str) -> None:
    def val(name):
        a = d.attr(name) if name else None
        return (a, try_int(a.value, env)) if a is not None else (None, None)

    for exact, lo, hi in _BOUNDS:
        (ea, ev), (la, lv), (ha, hv) = val(exact), val(lo), val(hi)
        pairs = [(la, lv, ea, ev), (ea, ev, ha, hv), (la, lv, ha, hv)]
        for a1, v1, a2, v2 in pairs:
            if v1 is not None and v2 is not None and v1 > v2:
                raise StrengtheningConflict(
                    f"{rule} on {target}: {_describe(a1)} contradicts {_describe(a2)}"
                )


# ---------------------------------------------------------------------------
# Rule application
# ---------------------------------------------------------------------------


def rule_env(spec: Specification, params: Mapping | None = None) -> dict:
    """Parameters plus lettings, in the form the size calculator expects."""
    env: dict = {}
    for d in spec.declarations:
        if d.kind in ("letting-domain", "letting-constant"):
            env[d.name] = d.payload
    env.update(params or {})
    return env


def _unref(d: Domain, ctx: Context) -> Domain:
    while isinstance(d, DomainRef) and d.name in ctx.lettings:
        d = ctx.lettings[d.name]
    return d


def _functionality_ok(rule: StrengtheningRule, d: Domain) -> bool:
    if not isinstance(d, RelationDomain):
        return True
    wanted = [a for a in rule.output_domain.template.attrs if a.cols is not None]
    existing = [a for a in d.attrs if a.cols is not None]
    return all(a.cols == w.cols for a in existing for w in wanted)


def _install(rule, base, binding, env, target):
    """Merged domain, or None when the rule must not fire here."""
    if not _functionality_ok(rule, base):
        return None
    out = instantiate(rule.output_domain, binding)
    try:
        return merge_attrs(base, out.attrs, env, rule.name, target)
    except _NoFire:
        return None


def _fires(rule, base, merged) -> bool:
    if merged is None:
        return False
    if rule.domain_only:
        return {a.name for a in merged.attrs} - {a.name for a in base.attrs} != set()
    if rule.keep_constraint:
        return merged != base
    return True


def _domain_matches(rule, d, ctx, x) -> Iterator[Binding]:
    yield from match_all(rule.domain_pattern, d, ctx, initial={"x": Name(x)})


def _guard_ok(rule, b, env, ctx) -> bool:
    return rule.guard is None or rule.guard(b, env, ctx)


def apply_rule(
    rule: StrengtheningRule,
    spec: Specification,
    target: str,
    params: Mapping | None = None,
) -> Firing | None:
    """Fire ``rule`` once on ``target``; direct matches win over nested ones."""
    decl = spec.declaration(target)
    if decl is None or decl.kind != "find":
        raise KeyError(f"{target} is not a find")
    env = rule_env(spec, params)
    ctx = Context.of(spec)
    before = spec.domain_of(target)
    if rule.domain_only:
        return _apply_domain_only(rule, spec, target, env, ctx, before)
    base = _unref(before, ctx)
    for b0 in _domain_matches(rule, base, ctx, target):
        for idx, c in enumerate(spec.constraints):
            for b in match_all(rule.constraint_pattern, c, ctx, initial=b0.as_dict()):
                if not _guard_ok(rule, b, env, ctx):
                    continue
                merged = _install(rule, base, b, env, target)
                if not _fires(rule, base, merged):
                    continue
                constraints = list(spec.constraints)
                if not rule.keep_constraint:
                    del constraints[idx]
                new = spec.with_domain(target, merged).with_constraints(constraints)
                step = TraceStep(rule.name, target, before, merged, c, rule.keep_constraint)
                return Firing(new, step)
    return lift_nested(rule, spec, target, params)


def _apply_domain_only(rule, spec, target, env, ctx, before) -> Firing | None:
    root = _unref(before, ctx)
    for path, sub in domain_positions(root):
        base = _unref(sub, ctx)
        for b in _domain_matches(rule, base, ctx, target):
            if not _guard_ok(rule, b, env, ctx):
                continue
            merged = _install(rule, base, b, env, target)
            if not _fires(rule, base, merged):
                continue
            after = replace_at(root, path, merged)
            return Firing(
                spec.with_domain(target, after),
                TraceStep(rule.name, target, before, after, None, True),
            )
    return None


def lift_nested(
    rule: StrengtheningRule,
    spec: Specification,
    target: str,
    params: Mapping | None = None,
) -> Firing | None:
    """Apply ``rule`` to member domains through ``forall m in target`` constraints."""
    if rule.domain_only:
        return None
    env = rule_env(spec, params)
    ctx = Context.of(spec)
    before = spec.domain_of(target)
    root = _unref(before, ctx)
    for idx, c in enumerate(spec.constraints):
        result = _lift(rule, root, (), Name(target), c, env, ctx, frozenset(), target)
        if result is None:
            continue
        new_root, residue = result
        constraints = list(spec.constraints)
        if residue is None:
            del constraints[idx]
        else:
            constraints[idx] = residue
        new = spec.with_domain(target, new_root).with_constraints(constraints)
        kept = rule.keep_constraint
        return Firing(new, TraceStep(rule.name, target, before, new_root, c, kept))
    return None


def _lift(rule, root, path, coll, c, env, ctx, bound, target):
    """Try ``rule`` on members of ``coll`` (at ``path`` in ``root``) inside ``c``.

    Returns ``(new_root, residue)`` where ``residue`` is what remains of ``c``
    (None when fully consumed), or None when nothing fired.
    """
    if not (isinstance(c, QuantIn) and c.kind == "forall" and alpha_equal(c.collection, coll)):
        return None
    outer = _unref(domain_at(root, path), ctx)
    if not isinstance(outer, (SetDomain, MSetDomain)):
        return None
    inner_path = path + ("inner",)
    inner = _unref(outer.inner, ctx)
    member = Name(c.var)
    inner_bound = bound | {c.var}
    parts = conjuncts(c.body)
    # direct: one conjunct of the body is the rule's constraint on the member
    for b0 in match_all(rule.domain_pattern, inner, ctx, initial={"x": member}, bound=inner_bound):
        for i, part in enumerate(parts):
            for b in match_all(rule.constraint_pattern, part, ctx, initial=b0.as_dict(), bound=inner_bound):
                if not _guard_ok(rule, b, env, ctx):
                    continue
                merged = _install(rule, inner, b, env, target)
                if not _fires(rule, inner, merged):
                    continue
                rest = parts if rule.keep_constraint else parts[:i] + parts[i + 1:]
                new_root = replace_at(root, inner_path, merged)
                return new_root, _rebuild(c, rest)
    # deeper: a conjunct quantifies over the members of the member
    for i, part in enumerate(parts):
        result = _lift(rule, root, inner_path, member, part, env, ctx, inner_bound, target)
        if result is None:
            continue
        new_root, residue = result
        rest = parts[:i] + ([residue] if residue is not None else []) + parts[i + 1:]
        return new_root, _rebuild(c, rest)
    return None


def _rebuild(q: QuantIn, parts: list[Expr]) -> Expr | None:
    body = conjoin(parts)
    if body is None:
        return None
    return QuantIn(q.kind, q.var, q.collection, body)
