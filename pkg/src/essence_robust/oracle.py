"""Brute-force ground truth: value enumeration, evaluation and solving.

This is a correctness oracle, not a solver.  Every find domain is enumerated
in full and every assignment in the Cartesian product is checked, so the
configured budget (default 10**6 candidates) is the only thing keeping runs
at desk scale.

Undefinedness follows the relational reading: a partial function applied
outside its defined points makes the nearest enclosing comparison or
membership test false.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping

from .ast import (
    Apply,
    BinOp,
    BoolDomain,
    BoolLit,
    Card,
    Conversion,
    Domain,
    Expr,
    Freq,
    FunctionDomain,
    IntDomain,
    IntLit,
    MSetDomain,
    Name,
    Neg,
    Not,
    PartitionDomain,
    Parts,
    Project,
    Quant,
    QuantIn,
    RelationDomain,
    RuleTrace,
    SequenceDomain,
    SetDomain,
    SetLit,
    Specification,
    ToMSet,
    ToRelation,
    TupleDomain,
    Wildcard,
    free_names,
)
from .sizes import (
    InfiniteDomain,
    UnboundName,
    bell,
    domain_size,
    eval_int,
    int_bounds,
    lookup_domain,
    size_bounds,
)

DEFAULT_LIMIT = 10**6


class BudgetExceeded(RuntimeError):
    pass


class Undefined(Exception):
    """Raised by partial operations at points where they have no value."""


class EvaluationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Values
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MSetValue:
    counts: tuple[tuple[object, int], ...]

    @classmethod
    def of(cls, items: Iterable) -> "MSetValue":
        return cls.from_counts(Counter(items).items())

    @classmethod
    def from_counts(cls, pairs) -> "MSetValue":
        merged: Counter = Counter()
        for v, c in pairs:
            merged[v] += c
        return cls(tuple(sorted(((v, c) for v, c in merged.items() if c > 0), key=lambda p: value_key(p[0]))))

    def count(self, v) -> int:
        return self.table.get(v, 0)

    @cached_property
    def table(self) -> dict:
        return dict(self.counts)

    def __len__(self) -> int:
        return sum(c for _, c in self.counts)


@dataclass(frozen=True)
class FunctionValue:
    graph: tuple[tuple[object, object], ...]

    @classmethod
    def of(cls, mapping: Mapping) -> "FunctionValue":
        return cls(tuple(sorted(mapping.items(), key=lambda p: value_key(p[0]))))

    @cached_property
    def table(self) -> dict:
        return dict(self.graph)

    def __call__(self, key):
        try:
            return self.table[key]
        except KeyError:
            raise Undefined(key) from None

    def __len__(self) -> int:
        return len(self.graph)


@dataclass(frozen=True)
class RelationValue:
    tuples: frozenset

    def __len__(self) -> int:
        return len(self.tuples)


@dataclass(frozen=True)
class PartitionValue:
    parts: frozenset

    def __len__(self) -> int:
        return sum(len(p) for p in self.parts)


@dataclass(frozen=True)
class SequenceValue:
    items: tuple

    def __len__(self) -> int:
        return len(self.items)


def value_key(v) -> tuple:
    """Total order over values: constructor first, then components."""
    if isinstance(v, bool):
        return (0, int(v))
    if isinstance(v, int):
        return (1, v)
    if isinstance(v, tuple):
        return (2, tuple(value_key(x) for x in v))
    if isinstance(v, frozenset):
        return (3, len(v), tuple(sorted(value_key(x) for x in v)))
    if isinstance(v, MSetValue):
        return (4, tuple((value_key(x), c) for x, c in v.counts))
    if isinstance(v, FunctionValue):
        return (5, tuple((value_key(k), value_key(r)) for k, r in v.graph))
    if isinstance(v, RelationValue):
        return (6, len(v.tuples), tuple(sorted(value_key(t) for t in v.tuples)))
    if isinstance(v, PartitionValue):
        return (7, tuple(sorted(value_key(p) for p in v.parts)))
    if isinstance(v, SequenceValue):
        return (8, tuple(value_key(x) for x in v.items))
    raise TypeError(f"not a value: {v!r}")


def _sorted(values) -> list:
    return sorted(values, key=value_key)


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, tuple):
        return "(" + ", ".join(format_value(x) for x in v) + ")"
    if isinstance(v, frozenset):
        return "{" + ", ".join(format_value(x) for x in _sorted(v)) + "}"
    if isinstance(v, MSetValue):
        items = [format_value(x) for x, c in v.counts for _ in range(c)]
        return "mset(" + ", ".join(items) + ")"
    if isinstance(v, FunctionValue):
        return "function(" + ", ".join(f"{format_value(k)} --> {format_value(r)}" for k, r in v.graph) + ")"
    if isinstance(v, RelationValue):
        return "relation(" + ", ".join(format_value(t) for t in _sorted(v.tuples)) + ")"
    if isinstance(v, PartitionValue):
        return "partition(" + ", ".join(format_value(p) for p in _sorted(v.parts)) + ")"
    if isinstance(v, SequenceValue):
        return "sequence(" + ", ".join(format_value(x) for x in v.items) + ")"
    raise TypeError(f"not a value: {v!r}")


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def spend(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.limit:
            raise BudgetExceeded(f"enumeration budget of {self.limit} candidates exceeded")


def enumerate_values(d: Domain, env: Mapping | None = None, limit: int = DEFAULT_LIMIT) -> list:
    """All values of ``d`` that satisfy its attributes, in canonical order."""
    env = env or {}
    values = _values(d, env, _Budget(limit))
    return values if _generated_in_order(d, env) else _sorted(values)


def _generated_in_order(d: Domain, env: Mapping) -> bool:
    """True when the generators already yield ``d``'s values in canonical order.

    Ranges and products of ordered lists are ordered, and so are
    size-by-size combinations of an ordered list; skipping the sort matters
    for the larger relation domains.
    """
    d = lookup_domain(d, env)
    match d:
        case BoolDomain() | IntDomain():
            return True
        case TupleDomain(elems):
            return all(_generated_in_order(e, env) for e in elems)
        case SetDomain(inner):
            return _generated_in_order(inner, env)
        case RelationDomain(columns) if not any(a.cols is not None for a in d.attrs):
            return all(_generated_in_order(c, env) for c in columns)
    return False


def _values(d: Domain, env: Mapping, budget: _Budget) -> list:
    d = lookup_domain(d, env)
    match d:
        case BoolDomain():
            return [False, True]
        case IntDomain():
            lo, hi = int_bounds(d, env)
            budget.spend(max(0, hi - lo + 1))
            return list(range(lo, hi + 1))
        case TupleDomain(elems):
            lists = [_values(e, env, budget) for e in elems]
            budget.spend(math.prod(len(x) for x in lists))
            return [tuple(t) for t in itertools.product(*lists)]
        case SetDomain(inner):
            return _set_values(d, _values(inner, env, budget), env, budget)
        case MSetDomain(inner):
            return _mset_values(d, _values(inner, env, budget), env, budget)
        case FunctionDomain(source, target):
            return _function_values(d, _values(source, env, budget), _values(target, env, budget), env, budget)
        case SequenceDomain(inner):
            return _sequence_values(d, _values(inner, env, budget), env, budget)
        case RelationDomain(columns):
            return _relation_values(d, [_values(c, env, budget) for c in columns], env, budget)
        case PartitionDomain(inner):
            return _partition_values(d, _values(inner, env, budget), env, budget)
    raise TypeError(f"cannot enumerate {d!r}")


def _guard_size(count: int, budget: _Budget) -> None:
    if count > budget.limit - budget.used:
        raise BudgetExceeded(f"{count} candidates exceed the enumeration budget of {budget.limit}")


def _set_values(d, inner, env, budget):
    lo, hi = size_bounds(d, env, len(inner))
    _guard_size(sum(math.comb(len(inner), k) for k in range(lo, hi + 1)), budget)
    out = []
    for k in range(lo, hi + 1):
        for combo in itertools.combinations(inner, k):
            budget.spend()
            out.append(frozenset(combo))
    return out


def _mset_values(d, inner, env, budget):
    occ_lo = _attr(d, "minOccur", env) or 0
    occ_hi = _attr(d, "maxOccur", env)
    lo, hi = size_bounds(d, env, None)
    if occ_hi is None:
        if hi is None and inner:
            raise InfiniteDomain("infinite domain: mset without maxOccur or maxSize")
        occ_hi = hi if hi is not None else 0
    if hi is None:
        hi = occ_hi * len(inner)
    _guard_size(domain_size(d, env), budget)
    out = []

    def rec(i: int, acc: list, total: int):
        if total > hi:
            return
        if i == len(inner):
            if lo <= total:
                budget.spend()
                out.append(MSetValue.from_counts(zip(inner, acc)))
            return
        for c in range(occ_lo, occ_hi + 1):
            acc.append(c)
            rec(i + 1, acc, total + c)
            acc.pop()

    rec(0, [], 0)
    return out


def _function_values(d, source, target, env, budget):
    lo, hi = size_bounds(d, env, len(source))
    ks = [len(source)] if d.has("total") else range(lo, hi + 1)
    inj, surj = d.has("injective"), d.has("surjective")
    out = []
    for k in ks:
        if not lo <= k <= hi:
            continue
        for points in itertools.combinations(source, k):
            images = itertools.permutations(target, k) if inj else itertools.product(target, repeat=k)
            for img in images:
                budget.spend()
                if surj and len(set(img)) != len(target):
                    continue
                out.append(FunctionValue.of(dict(zip(points, img))))
    return out


def _sequence_values(d, inner, env, budget):
    inj, surj = d.has("injective"), d.has("surjective")
    lo, hi = size_bounds(d, env, len(inner) if inj else None)
    if hi is None:
        raise InfiniteDomain("infinite domain: sequence without size or maxSize")
    out = []
    for k in range(lo, hi + 1):
        items = itertools.permutations(inner, k) if inj else itertools.product(inner, repeat=k)
        for seq in items:
            budget.spend()
            if surj and len(set(seq)) != len(inner):
                continue
            out.append(SequenceValue(tuple(seq)))
    return out


def _relation_values(d, columns, env, budget):
    lo, hi = size_bounds(d, env, math.prod(len(c) for c in columns))
    functional = [a for a in d.attrs if a.cols is not None]
    out = []
    if functional:
        # build one optional row per key tuple, then check every attribute
        key_cols = [c - 1 for c in functional[0].cols]
        rest_cols = [i for i in range(len(columns)) if i not in key_cols]
        total = functional[0].name == "total_functional"
        keys = list(itertools.product(*(columns[i] for i in key_cols)))
        rests = list(itertools.product(*(columns[i] for i in rest_cols)))
        choices = rests if total else [None] + rests
        _guard_size(len(choices) ** len(keys), budget)
        for pick in itertools.product(choices, repeat=len(keys)):
            budget.spend()
            rows = []
            for key, rest in zip(keys, pick):
                if rest is None:
                    continue
                row = [None] * len(columns)
                for i, v in zip(key_cols, key):
                    row[i] = v
                for i, v in zip(rest_cols, rest):
                    row[i] = v
                rows.append(tuple(row))
            value = RelationValue(frozenset(rows))
            if lo <= len(rows) <= hi and satisfies(value, d, env):
                out.append(value)
        return out
    tuples = list(itertools.product(*columns))
    _guard_size(sum(math.comb(len(tuples), k) for k in range(lo, hi + 1)), budget)
    for k in range(lo, hi + 1):
        for combo in itertools.combinations(tuples, k):
            budget.spend()
            out.append(RelationValue(frozenset(combo)))
    return out


def set_partitions(items: list) -> Iterator[list[list]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for sub in set_partitions(rest):
        yield [[first]] + sub
        for i in range(len(sub)):
            yield sub[:i] + [[first] + sub[i]] + sub[i + 1:]


def _partition_values(d, inner, env, budget):
    n = len(inner)
    complete = d.has("complete")
    _guard_size(bell(n) if complete else bell(n + 1), budget)
    subsets = [inner] if complete else (
        list(c) for k in range(n + 1) for c in itertools.combinations(inner, k)
    )
    out = []
    for subset in subsets:
        for parts in set_partitions(list(subset)):
            budget.spend()
            value = PartitionValue(frozenset(frozenset(p) for p in parts))
            if satisfies(value, d, env):
                out.append(value)
    return out


def _attr(d: Domain, name: str, env: Mapping) -> int | None:
    a = d.attr(name)
    return None if a is None else eval_int(a.value, env)


# ---------------------------------------------------------------------------
# Attribute satisfaction
# ---------------------------------------------------------------------------


def satisfies(v, d: Domain, env: Mapping | None = None) -> bool:
    """Does value ``v`` inhabit domain ``d`` (attributes included)?"""
    env = env or {}
    d = lookup_domain(d, env)
    match d:
        case BoolDomain():
            return isinstance(v, bool)
        case IntDomain(lo, hi):
            if not isinstance(v, int) or isinstance(v, bool):
                return False
            return (lo is None or eval_int(lo, env) <= v) and (hi is None or v <= eval_int(hi, env))
        case TupleDomain(elems):
            return (
                isinstance(v, tuple)
                and len(v) == len(elems)
                and all(satisfies(x, e, env) for x, e in zip(v, elems))
            )
    if not _sizes_ok(d, len(v) if hasattr(v, "__len__") else -1, env):
        return False
    match d:
        case SetDomain(inner):
            return isinstance(v, frozenset) and all(satisfies(x, inner, env) for x in v)
        case MSetDomain(inner):
            if not isinstance(v, MSetValue):
                return False
            lo, hi = _attr(d, "minOccur", env), _attr(d, "maxOccur", env)
            if hi is not None and any(c > hi for _, c in v.counts):
                return False
            if lo is not None and lo > 0:
                if any(v.count(x) < lo for x in enumerate_values(inner, env)):
                    return False
            return all(satisfies(x, inner, env) for x, _ in v.counts)
        case FunctionDomain(source, target):
            if not isinstance(v, FunctionValue):
                return False
            if not all(satisfies(k, source, env) and satisfies(r, target, env) for k, r in v.graph):
                return False
            images = [r for _, r in v.graph]
            if d.has("total") and len(v.graph) != domain_size(source, env):
                return False
            if d.has("injective") and len(set(images)) != len(images):
                return False
            if d.has("surjective") and len(set(images)) != domain_size(target, env):
                return False
            return True
        case SequenceDomain(inner):
            if not isinstance(v, SequenceValue):
                return False
            if not all(satisfies(x, inner, env) for x in v.items):
                return False
            if d.has("injective") and len(set(v.items)) != len(v.items):
                return False
            if d.has("surjective") and len(set(v.items)) != domain_size(inner, env):
                return False
            return True
        case RelationDomain(columns):
            if not isinstance(v, RelationValue):
                return False
            if not all(
                isinstance(t, tuple) and len(t) == len(columns)
                and all(satisfies(x, c, env) for x, c in zip(t, columns))
                for t in v.tuples
            ):
                return False
            for a in d.attrs:
                if a.cols is None:
                    continue
                key_cols = [c - 1 for c in a.cols]
                seen = Counter(tuple(t[i] for i in key_cols) for t in v.tuples)
                if any(c > 1 for c in seen.values()):
                    return False
                if a.name == "total_functional":
                    if len(seen) != math.prod(domain_size(columns[i], env) for i in key_cols):
                        return False
            return True
        case PartitionDomain(inner):
            if not isinstance(v, PartitionValue):
                return False
            parts = list(v.parts)
            covered = [x for p in parts for x in p]
            if any(not p for p in parts) or len(covered) != len(set(covered)):
                return False
            if not all(satisfies(x, inner, env) for x in covered):
                return False
            if d.has("complete") and len(covered) != domain_size(inner, env):
                return False
            sizes = [len(p) for p in parts]
            if d.has("regular") and len(set(sizes)) > 1:
                return False
            checks = {
                "numParts": lambda k: len(parts) == k,
                "minNumParts": lambda k: len(parts) >= k,
                "maxNumParts": lambda k: len(parts) <= k,
                "partSize": lambda k: all(s == k for s in sizes),
                "minPartSize": lambda k: all(s >= k for s in sizes),
                "maxPartSize": lambda k: all(s <= k for s in sizes),
            }
            for name, ok in checks.items():
                k = _attr(d, name, env)
                if k is not None and not ok(k):
                    return False
            return True
    raise TypeError(f"cannot check membership in {d!r}")


def _sizes_ok(d: Domain, n: int, env: Mapping) -> bool:
    lo, hi = size_bounds(d, env, None)
    return lo <= n and (hi is None or n <= hi)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _flatten(x) -> tuple:
    return x if isinstance(x, tuple) else (x,)


def function_graph(f: FunctionValue) -> RelationValue:
    """The graph of ``f`` as a relation: key columns first, then results."""
    return RelationValue(frozenset(_flatten(k) + _flatten(r) for k, r in f.graph))


class Evaluator:
    """Evaluates expressions against one environment of parameters and lettings.

    Quantifier domains that do not mention bound variables are enumerated
    once and cached for the lifetime of the evaluator.
    """

    def __init__(self, env: Mapping | None = None, limit: int = DEFAULT_LIMIT):
        self.env = dict(env or {})
        self.limit = limit
        self._domain_cache: dict = {}
        self._free_cache: dict = {}

    def __call__(self, e: Expr, assignment: Mapping | None = None):
        scope = dict(self.env)
        scope.update(assignment or {})
        return self._eval(e, scope)

    def holds(self, e: Expr, scope: dict) -> bool:
        try:
            return bool(self._eval(e, scope))
        except Undefined:
            return False

    def _domain_values(self, d: Domain, scope: dict) -> list:
        free = self._free_cache.get(d)
        if free is None:
            free = self._free_cache[d] = free_names(d)
        if all(n in self.env for n in free):
            cached = self._domain_cache.get(d)
            if cached is None:
                cached = self._domain_cache[d] = enumerate_values(d, self.env, self.limit)
            return cached
        return enumerate_values(d, scope, self.limit)

    def _bind(self, scope: dict, var: str, values, body: Expr, kind: str) -> bool:
        missing = object()
        saved = scope.get(var, missing)
        try:
            for v in values:
                scope[var] = v
                result = self._eval(body, scope)
                if kind == "forall" and not result:
                    return False
                if kind == "exists" and result:
                    return True
            return kind == "forall"
        finally:
            if saved is missing:
                scope.pop(var, None)
            else:
                scope[var] = saved

    def _members(self, c) -> list:
        if isinstance(c, frozenset):
            return _sorted(c)
        if isinstance(c, MSetValue):
            return [v for v, _ in c.counts]
        if isinstance(c, RelationValue):
            return _sorted(c.tuples)
        if isinstance(c, SequenceValue):
            return list(c.items)
        raise EvaluationError(f"cannot iterate over {format_value(c)}")

    def _atom(self, e: Expr, scope: dict) -> bool:
        try:
            return self._compare(e, scope)
        except Undefined:
            return False

    def _compare(self, e: BinOp, scope: dict) -> bool:
        a = self._eval(e.left, scope)
        b = self._eval(e.right, scope)
        match e.op:
            case "=":
                return a == b
            case "!=":
                return a != b
            case "<":
                return a < b
            case "<=":
                return a <= b
            case ">":
                return a > b
            case ">=":
                return a >= b
            case "in":
                if isinstance(b, MSetValue):
                    return b.count(a) > 0
                if isinstance(b, RelationValue):
                    return a in b.tuples
                return a in self._members(b)
        raise EvaluationError(e.op)

    def _eval(self, e: Expr, scope: dict):
        match e:
            case IntLit(v) | BoolLit(v):
                return v
            case Name(ident):
                try:
                    v = scope[ident]
                except KeyError:
                    raise UnboundName(ident) from None
                if isinstance(v, Expr):
                    v = scope[ident] = self._eval(v, scope)
                return v
            case Quant(kind, var, domain, body):
                return self._bind(scope, var, self._domain_values(domain, scope), body, kind)
            case QuantIn(kind, var, coll, body):
                return self._bind(scope, var, self._members(self._eval(coll, scope)), body, kind)
            case BinOp(op, left, right):
                if op in ("=", "!=", "<", "<=", ">", ">=", "in"):
                    return self._atom(e, scope)
                if op == "/\\":
                    return self._eval(left, scope) and self._eval(right, scope)
                if op == "\\/":
                    return self._eval(left, scope) or self._eval(right, scope)
                if op == "->":
                    return (not self._eval(left, scope)) or self._eval(right, scope)
                if op == "<->":
                    return bool(self._eval(left, scope)) == bool(self._eval(right, scope))
                a, b = self._eval(left, scope), self._eval(right, scope)
                return {"+": a + b, "-": a - b, "*": a * b}[op]
            case Neg(operand):
                return -self._eval(operand, scope)
            case Not(operand):
                return not self._eval(operand, scope)
            case Card(operand):
                v = self._eval(operand, scope)
                if isinstance(v, (int, bool)):
                    raise EvaluationError("cardinality of a scalar")
                return len(v)
            case Freq(coll, value):
                c, v = self._eval(coll, scope), self._eval(value, scope)
                if isinstance(c, MSetValue):
                    return c.count(v)
                if isinstance(c, frozenset):
                    return int(v in c)
                if isinstance(c, SequenceValue):
                    return c.items.count(v)
                raise EvaluationError("freq needs a multiset")
            case Apply(callee, args):
                f = self._eval(callee, scope)
                vals = tuple(self._eval(a, scope) for a in args)
                if isinstance(f, FunctionValue):
                    return f(vals[0] if len(vals) == 1 else vals)
                if isinstance(f, RelationValue):
                    return vals in f.tuples
                if isinstance(f, SequenceValue):
                    (i,) = vals
                    if not 1 <= i <= len(f.items):
                        raise Undefined(i)
                    return f.items[i - 1]
                raise EvaluationError(f"cannot apply {format_value(f)}")
            case Project(callee, args):
                r = self._eval(callee, scope)
                if not isinstance(r, RelationValue):
                    raise EvaluationError("projection needs a relation")
                fixed = [(i, self._eval(a, scope)) for i, a in enumerate(args) if not isinstance(a, Wildcard)]
                holes = [i for i, a in enumerate(args) if isinstance(a, Wildcard)]
                out = set()
                for t in r.tuples:
                    if len(t) == len(args) and all(t[i] == v for i, v in fixed):
                        out.add(t[holes[0]] if len(holes) == 1 else tuple(t[i] for i in holes))
                return frozenset(out)
            case SetLit(elems):
                return frozenset(self._eval(x, scope) for x in elems)
            case Parts(operand):
                p = self._eval(operand, scope)
                if not isinstance(p, PartitionValue):
                    raise EvaluationError("parts needs a partition")
                return p.parts
            case ToMSet(operand):
                v = self._eval(operand, scope)
                if isinstance(v, MSetValue):
                    return v
                if isinstance(v, frozenset):
                    return MSetValue.from_counts((x, 1) for x in v)
                raise EvaluationError("toMSet needs a set")
            case ToRelation(operand):
                v = self._eval(operand, scope)
                if isinstance(v, RelationValue):
                    return v
                if isinstance(v, FunctionValue):
                    return function_graph(v)
                raise EvaluationError("toRelation needs a function")
        raise EvaluationError(f"cannot evaluate {e!r}")


def evaluate(e: Expr, assignment: Mapping | None = None, env: Mapping | None = None):
    """Evaluate ``e``; undefinedness surfaces as :class:`Undefined`."""
    return Evaluator(env)(e, assignment)


# ---------------------------------------------------------------------------
# Solving
# ---------------------------------------------------------------------------


def spec_env(spec: Specification, params: Mapping[str, int] | None = None) -> dict:
    """Parameters, letting constants and letting domains in one mapping."""
    params = dict(params or {})
    env: dict = {}
    ev = Evaluator()
    for d in spec.declarations:
        if d.kind == "given":
            if d.name not in params:
                raise UnboundName(d.name)
            value = params[d.name]
            if not satisfies(value, d.payload, env):
                raise EvaluationError(f"parameter {d.name} = {value} is outside its domain")
            env[d.name] = value
        elif d.kind == "letting-domain":
            env[d.name] = d.payload
        elif d.kind == "letting-constant":
            ev.env = env
            env[d.name] = ev(d.payload)
    return env


@dataclass(frozen=True)
class SolutionSet:
    names: tuple[str, ...]
    solutions: tuple[tuple, ...]

    def __len__(self) -> int:
        return len(self.solutions)

    def __iter__(self):
        return iter(self.solutions)

    def assignments(self) -> list[dict]:
        return [dict(zip(self.names, s)) for s in self.solutions]

    def to_text(self) -> str:
        return "".join(
            "; ".join(f"{n} = {format_value(v)}" for n, v in zip(self.names, s)) + "\n"
            for s in self.solutions
        )


def _canonical(names, rows) -> SolutionSet:
    unique = {tuple(r) for r in rows}
    return SolutionSet(tuple(names), tuple(sorted(unique, key=lambda r: tuple(value_key(v) for v in r))))


def _check_rows(spec: Specification, env: dict, names, lists, first_slice, limit) -> list:
    ev = Evaluator(env, limit)
    lists = [lists[0][first_slice]] + list(lists[1:]) if lists else lists
    rows = []
    for combo in itertools.product(*lists):
        scope = dict(env)
        scope.update(zip(names, combo))
        if all(ev.holds(c, scope) for c in spec.constraints):
            rows.append(combo)
    return rows


def solve(
    spec: Specification,
    params: Mapping[str, int] | None = None,
    limit: int = DEFAULT_LIMIT,
    jobs: int = 1,
) -> SolutionSet:
    env = spec_env(spec, params)
    names = spec.finds
    lists = [enumerate_values(spec.domain_of(n), env, limit) for n in names]
    total = math.prod(len(x) for x in lists)
    if total > limit:
        raise BudgetExceeded(f"{total} candidate assignments exceed the budget of {limit}")
    if jobs <= 1 or not lists or len(lists[0]) < 2:
        rows = _check_rows(spec, env, names, lists, slice(None), limit)
    else:
        step = max(1, -(-len(lists[0]) // jobs))
        slices = [slice(i, i + step) for i in range(0, len(lists[0]), step)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = pool.map(
                _check_rows,
                *zip(*[(spec, env, names, lists, s, limit) for s in slices]),
            )
            rows = [r for part in parts for r in part]
    return _canonical(names, rows)


# ---------------------------------------------------------------------------
# Equivalence checking
# ---------------------------------------------------------------------------


def _at_path(value, path: tuple, f):
    if not path:
        return f(value)
    rest = path[1:]
    if isinstance(value, frozenset):
        return frozenset(_at_path(m, rest, f) for m in value)
    if isinstance(value, MSetValue):
        return MSetValue.from_counts((_at_path(m, rest, f), c) for m, c in value.counts)
    raise EvaluationError(f"cannot descend into {format_value(value)}")


def unconvert(value, conv: Conversion):
    """Map a value of the strengthened domain back to the original domain."""

    def back(v):
        if conv.kind == "toMSet":
            return MSetValue.from_counts((x, 1) for x in v)
        if conv.kind == "toRelation":
            perm = conv.permutation
            rows = []
            for k, r in v.graph:
                ordered = (k if conv.key_arity > 1 else (k,)) + (
                    r if len(perm) - conv.key_arity > 1 else (r,)
                )
                row = [None] * len(perm)
                for j, col in enumerate(perm):
                    row[col] = ordered[j]
                rows.append(tuple(row))
            return RelationValue(frozenset(rows))
        raise ValueError(conv.kind)

    return _at_path(value, conv.path, back)


@dataclass(frozen=True)
class Verdict:
    status: str
    missing: tuple = ()
    extra: tuple = ()
    before_count: int = 0
    after_count: int = 0
    names: tuple[str, ...] = ()

    @property
    def equal(self) -> bool:
        return self.status == "equal"

    def describe(self) -> str:
        lines = [f"{self.status}: {self.before_count} solutions before, {self.after_count} after"]
        for label, rows in (("missing", self.missing), ("extra", self.extra)):
            for r in rows[:5]:
                lines.append(f"  {label}: " + "; ".join(
                    f"{n} = {format_value(v)}" for n, v in zip(self.names, r)))
        return "\n".join(lines)


def map_back(solutions: SolutionSet, trace: RuleTrace) -> SolutionSet:
    rows = []
    for row in solutions:
        values = dict(zip(solutions.names, row))
        for step in reversed(trace.steps):
            if step.conversion is not None and step.target in values:
                values[step.target] = unconvert(values[step.target], step.conversion)
        rows.append(tuple(values[n] for n in solutions.names))
    return _canonical(solutions.names, rows)


def check_equivalent(
    before: Specification,
    after: Specification,
    trace: RuleTrace,
    params: Mapping[str, int] | None = None,
    limit: int = DEFAULT_LIMIT,
    jobs: int = 1,
) -> Verdict:
    """Compare solution sets, mapping ``after`` back through the trace's conversions."""
    sb = solve(before, params, limit, jobs)
    sa = solve(after, params, limit, jobs)
    if sa.names != sb.names:
        raise ValueError("specifications declare different decision variables")
    mapped = map_back(sa, trace)
    rows_b, rows_a = set(sb.solutions), set(mapped.solutions)
    key = lambda r: tuple(value_key(v) for v in r)
    missing = tuple(sorted(rows_b - rows_a, key=key))
    extra = tuple(sorted(rows_a - rows_b, key=key))
    if len(mapped) != len(sa):
        # the conversion merged distinct solutions: not injective
        extra = extra or tuple(sa.solutions[:1])
    if missing and extra:
        status = "missing-and-extra-solutions"
    elif missing:
        status = "missing-solutions"
    elif extra:
        status = "extra-solutions"
    else:
        status = "equal"
    return Verdict(status, missing, extra, len(sb), len(sa), sb.names)
