"""Pattern matching with metavariables, normalization and template instantiation.

Metavariables carry one of three restriction classes:

* ``constant-or-parameter``: the matched term may only mention parameters and
  letting constants (never a find or a bound variable);
* ``fresh-binder``: a quantifier binder, bound to the target's binder name;
* ``any``: any expression or domain at all.

Matching is a backtracking generator so that commutative operators and
permutable ``forall`` chains can be tried in every orientation.
"""

from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .ast import (
    Attr,
    BinOp,
    Domain,
    DomainRef,
    Expr,
    Meta,
    Name,
    Node,
    Quant,
    QuantIn,
    RelationDomain,
    Specification,
    TupleDomain,
    all_names,
    alpha_equal,
    conjoin,
    conjuncts,
    fold_constants,
    free_names,
    fresh_name,
    map_children,
    metavariables,
    resolve,
    transform,
    walk,
)
from .printer import show

CONSTANT = "constant-or-parameter"
ANY = "any"
FRESH = "fresh-binder"
RESTRICTIONS = (CONSTANT, ANY, FRESH)

COMMUTATIVE = frozenset({"=", "!=", "/\\", "\\/", "<->"})


class RuleDefinitionError(ValueError):
    """A rule template is malformed (for example an unbound metavariable)."""


# ---------------------------------------------------------------------------
# Patterns and bindings
# ---------------------------------------------------------------------------


def _binder_metas(template: Node) -> set[str]:
    return {
        n.var[1:]
        for n in walk(template)
        if isinstance(n, (Quant, QuantIn)) and n.var.startswith("&")
    }


@dataclass(frozen=True)
class Pattern:
    template: Node
    restrictions: tuple[tuple[str, str], ...] = ()

    @classmethod
    def of(cls, template: Node, constants: Iterable[str] = ()) -> "Pattern":
        """Infer restrictions: binders are fresh, ``constants`` are constant-or-parameter."""
        constants = set(constants)
        binders = _binder_metas(template)
        classes = {}
        for name in sorted(metavariables(template)):
            if name in binders:
                classes[name] = FRESH
            elif name in constants:
                classes[name] = CONSTANT
            else:
                classes[name] = ANY
        return cls(template, tuple(classes.items()))

    def restriction(self, name: str) -> str:
        for n, r in self.restrictions:
            if n == name:
                return r
        return ANY

    def __post_init__(self):
        names = [n for n, _ in self.restrictions]
        if len(names) != len(set(names)):
            raise RuleDefinitionError("metavariable with more than one restriction class")
        for _, r in self.restrictions:
            if r not in RESTRICTIONS:
                raise RuleDefinitionError(f"unknown restriction class {r}")


@dataclass(frozen=True)
class Binding:
    pairs: tuple[tuple[str, Node], ...] = ()

    @classmethod
    def of(cls, mapping: Mapping[str, Node]) -> "Binding":
        return cls(tuple(sorted(mapping.items())))

    def as_dict(self) -> dict[str, Node]:
        return dict(self.pairs)

    def __getitem__(self, name: str) -> Node:
        for n, v in self.pairs:
            if n == name:
                return v
        raise KeyError(name)

    def get(self, name: str, default=None):
        for n, v in self.pairs:
            if n == name:
                return v
        return default

    def __contains__(self, name: str) -> bool:
        return any(n == name for n, _ in self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def alpha_equal(self, other: "Binding") -> bool:
        a, b = self.as_dict(), other.as_dict()
        return a.keys() == b.keys() and all(alpha_equal(a[k], b[k]) for k in a)


@dataclass(frozen=True)
class Context:
    """What the matcher needs to know about the surrounding specification."""

    finds: frozenset[str] = frozenset()
    constants: frozenset[str] = frozenset()
    lettings: Mapping[str, Domain] = field(default_factory=dict)
    typed: bool = False

    @classmethod
    def of(cls, spec: Specification | None) -> "Context":
        if spec is None:
            return cls()
        return cls(
            frozenset(spec.finds),
            frozenset(d.name for d in spec.declarations if d.kind in ("given", "letting-constant")),
            spec.domain_lettings(),
            True,
        )

    def resolve(self, d: Node) -> Node:
        return resolve(d, dict(self.lettings)) if isinstance(d, Domain) and self.lettings else d

    def is_constant(self, t: Node, bound: frozenset[str]) -> bool:
        if not isinstance(t, Expr) or metavariables(t):
            return False
        names = free_names(t)
        if names & bound:
            return False
        if self.typed:
            return names <= self.constants
        return not names & self.finds


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------


def _sort_key(e: Expr) -> str:
    return show(e)


def normalize(e: Expr) -> Expr:
    """Canonical comparison direction and conjunction order.

    ``a > b`` becomes ``b < a`` and ``a >= b`` becomes ``b <= a``; constant
    arithmetic is folded; conjunction chains are flattened and sorted by
    printed form.  Idempotent and semantics-preserving.
    """

    def step(n: Node) -> Node:
        match n:
            case BinOp(">", a, b):
                return BinOp("<", b, a)
            case BinOp(">=", a, b):
                return BinOp("<=", b, a)
            case BinOp("/\\"):
                parts = sorted(conjuncts(n), key=_sort_key)
                return conjoin(parts)
        return n

    return transform(fold_constants(e), step)


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------


class _Matcher:
    def __init__(self, pattern: Pattern, ctx: Context):
        self.pattern = pattern
        self.ctx = ctx

    # Each method yields extended binding dictionaries.  ``env`` pairs pattern
    # binder names with target binder names for non-metavariable binders;
    # ``bound`` holds the target's binder names in scope.

    def match(self, p, t, b: dict, env: tuple, bound: frozenset) -> Iterator[dict]:
        if isinstance(p, tuple):
            yield from self._seq(p, t, b, env, bound)
            return
        if not isinstance(p, Node):
            if p == t:
                yield b
            return
        match p:
            case Meta(name):
                yield from self._meta(name, t, b, bound)
                return
            case Name(ident):
                if not isinstance(t, Name):
                    return
                mapped = dict(env).get(ident)
                target_bound = t.ident in dict((y, x) for x, y in env)
                if mapped is not None:
                    if mapped == t.ident:
                        yield b
                elif not target_bound and ident == t.ident:
                    yield b
                return
            case Quant("forall"):
                yield from self._forall_chain(p, t, b, env, bound)
                return
            case Quant() | QuantIn():
                if type(t) is not type(p) or t.kind != p.kind:
                    return
                src = "domain" if isinstance(p, Quant) else "collection"
                for b1 in self.match(getattr(p, src), getattr(t, src), b, env, bound):
                    yield from self._binder(p.var, t.var, p.body, t.body, b1, env, bound)
                return
            case BinOp(op, left, right) if op in COMMUTATIVE:
                if not isinstance(t, BinOp) or t.op != op:
                    return
                seen = []
                for tl, tr in ((t.left, t.right), (t.right, t.left)):
                    for b1 in self.match(left, tl, b, env, bound):
                        for b2 in self.match(right, tr, b1, env, bound):
                            if b2 not in seen:
                                seen.append(b2)
                                yield b2
                return
            case Attr():
                if isinstance(t, Attr) and t.name == p.name and p.cols == t.cols:
                    if p.value is None:
                        yield b
                    elif t.value is not None:
                        yield from self.match(p.value, t.value, b, env, bound)
                return
        if isinstance(p, Domain):
            yield from self._domain(p, t, b, env, bound)
            return
        if type(p) is not type(t):
            return
        yield from self._fields(p, t, dataclasses.fields(p), b, env, bound)

    def _fields(self, p, t, fields, b, env, bound):
        if not fields:
            yield b
            return
        f, rest = fields[0], fields[1:]
        for b1 in self.match(getattr(p, f.name), getattr(t, f.name), b, env, bound):
            yield from self._fields(p, t, rest, b1, env, bound)

    def _seq(self, ps, ts, b, env, bound):
        if not isinstance(ts, tuple) or len(ps) != len(ts):
            return
        if not ps:
            yield b
            return
        for b1 in self.match(ps[0], ts[0], b, env, bound):
            yield from self._seq(ps[1:], ts[1:], b1, env, bound)

    def _meta(self, name: str, t, b: dict, bound: frozenset):
        if name in b:
            old = b[name]
            if alpha_equal(old, t) or alpha_equal(self.ctx.resolve(old), self.ctx.resolve(t)):
                yield b
            return
        cls = self.pattern.restriction(name)
        if cls == FRESH:
            return  # binder metavariables are bound only at their binder
        if cls == CONSTANT and not self.ctx.is_constant(t, bound):
            return
        yield {**b, name: t}

    def _binder(self, pvar, tvar, pbody, tbody, b, env, bound):
        inner_bound = bound | {tvar}
        if pvar.startswith("&"):
            name = pvar[1:]
            if name in b:
                if b[name] != Name(tvar):
                    return
                yield from self.match(pbody, tbody, b, env, inner_bound)
                return
            # distinct binder metavariables must bind distinct binders
            if any(v == Name(tvar) and self.pattern.restriction(k) == FRESH for k, v in b.items()):
                return
            yield from self.match(pbody, tbody, {**b, name: Name(tvar)}, env, inner_bound)
            return
        env2 = tuple((x, y) for x, y in env if x != pvar and y != tvar) + ((pvar, tvar),)
        yield from self.match(pbody, tbody, b, env2, inner_bound)

    def _forall_chain(self, p: Quant, t, b, env, bound):
        pchain, pbody = _chain(p)
        tchain, tbody = _chain(t) if isinstance(t, Quant) else ([], t)
        if len(tchain) < len(pchain):
            return
        chain_vars = {v for v, _ in tchain}
        independent = all(not (free_names(d) & chain_vars) for _, d in tchain)
        if independent:
            orders = itertools.permutations(range(len(tchain)), len(pchain))
        else:
            orders = [tuple(range(len(pchain)))]
        seen = []
        for order in orders:
            rest = [q for i, q in enumerate(tchain) if i not in order]
            if not independent and rest != tchain[len(pchain):]:
                continue
            residue = tbody
            for var, dom in reversed(rest):
                residue = Quant("forall", var, dom, residue)
            picked = [tchain[i] for i in order]
            for b1 in self._chain_pairs(pchain, picked, pbody, residue, b, env, bound):
                if b1 not in seen:
                    seen.append(b1)
                    yield b1

    def _chain_pairs(self, pchain, tchain, pbody, tbody, b, env, bound):
        if not pchain:
            yield from self.match(pbody, tbody, b, env, bound)
            return
        (pv, pd), (tv, td) = pchain[0], tchain[0]
        for b1 in self.match(pd, td, b, env, bound):
            for b2 in self._bind_only(pv, tv, b1, env):
                new_b, new_env = b2
                yield from self._chain_pairs(
                    pchain[1:], tchain[1:], pbody, tbody, new_b, new_env, bound | {tv}
                )

    def _bind_only(self, pvar, tvar, b, env):
        if pvar.startswith("&"):
            name = pvar[1:]
            if name in b:
                if b[name] == Name(tvar):
                    yield b, env
                return
            if any(v == Name(tvar) and self.pattern.restriction(k) == FRESH for k, v in b.items()):
                return
            yield {**b, name: Name(tvar)}, env
            return
        env2 = tuple((x, y) for x, y in env if x != pvar and y != tvar) + ((pvar, tvar),)
        yield b, env2

    def _domain(self, p: Domain, t, b, env, bound):
        if not isinstance(t, Domain):
            return
        if isinstance(t, DomainRef) and not isinstance(p, DomainRef):
            target = self.ctx.lettings.get(t.name)
            if target is None:
                return
            t = target
        if isinstance(p, DomainRef):
            if isinstance(t, DomainRef) and t.name == p.name:
                yield b
            elif p.name in self.ctx.lettings and alpha_equal(self.ctx.resolve(p), self.ctx.resolve(t)):
                yield b
            return
        if type(p) is not type(t):
            return
        p_attrs = getattr(p, "attrs", None)
        fields = [f for f in dataclasses.fields(p) if f.name != "attrs"]
        if isinstance(p, RelationDomain) and isinstance(p.columns, Meta):
            if not isinstance(t.columns, tuple):
                return
            fields = []
            b = next(iter(self._meta(p.columns.name, TupleDomain(t.columns), b, bound)), None)
            if b is None:
                return
        for b1 in self._fields(p, t, fields, b, env, bound):
            if p_attrs is None:
                yield b1
            else:
                yield from self._attrs(p_attrs, t.attrs, b1, env, bound)

    def _attrs(self, pattrs, tattrs, b, env, bound):
        # every attribute demanded by the pattern must be present on the target
        if not pattrs:
            yield b
            return
        first, rest = pattrs[0], pattrs[1:]
        for ta in tattrs:
            for b1 in self.match(first, ta, b, env, bound):
                yield from self._attrs(rest, tattrs, b1, env, bound)


def _chain(q: Quant) -> tuple[list[tuple[str, Domain]], Expr]:
    chain = []
    while isinstance(q, Quant) and q.kind == "forall":
        chain.append((q.var, q.domain))
        q = q.body
    return chain, q


def match_all(
    p: Pattern | Node,
    t: Node,
    ctx: Specification | Context | None = None,
    initial: Mapping[str, Node] | None = None,
    bound: Iterable[str] = (),
) -> Iterator[Binding]:
    """Every binding under which ``t`` instantiates ``p`` (normalized, up to alpha)."""
    pattern = p if isinstance(p, Pattern) else Pattern.of(p)
    context = ctx if isinstance(ctx, Context) else Context.of(ctx)
    pt, tt = pattern.template, t
    if isinstance(pt, Expr) and isinstance(tt, Expr):
        pt, tt = normalize(pt), normalize(tt)
    matcher = _Matcher(pattern, context)
    seen = []
    for b in matcher.match(pt, tt, dict(initial or {}), (), frozenset(bound)):
        binding = Binding.of(b)
        if binding not in seen:
            seen.append(binding)
            yield binding


def match(
    p: Pattern | Node,
    t: Node,
    ctx: Specification | Context | None = None,
    initial: Mapping[str, Node] | None = None,
    bound: Iterable[str] = (),
) -> Binding | None:
    return next(match_all(p, t, ctx, initial, bound), None)


# ---------------------------------------------------------------------------
# Instantiation
# ---------------------------------------------------------------------------


def instantiate(p: Pattern | Node, b: Binding | Mapping[str, Node], avoid: Iterable[str] = ()) -> Node:
    """Substitute bindings into a template.

    Binder metavariables without a binding receive fresh names that avoid
    ``avoid`` and every name already in the template or the bindings.
    """
    template = p.template if isinstance(p, Pattern) else p
    values = b.as_dict() if isinstance(b, Binding) else dict(b)
    taken = set(avoid) | all_names(template)
    for v in values.values():
        if isinstance(v, Node):
            taken |= all_names(v)
    renames: dict[str, str] = {}

    def binder(var: str) -> str:
        if not var.startswith("&"):
            return var
        name = var[1:]
        bound_to = values.get(name)
        if isinstance(bound_to, Name):
            return bound_to.ident
        if name not in renames:
            renames[name] = fresh_name(name.lower(), taken)
            taken.add(renames[name])
        return renames[name]

    def go(n):
        if isinstance(n, tuple):
            return tuple(go(x) for x in n)
        if not isinstance(n, Node):
            return n
        match n:
            case Meta(name):
                if name in values:
                    return values[name]
                if name in renames:
                    return Name(renames[name])
                raise RuleDefinitionError(f"unbound metavariable &{name}")
            case Quant() | QuantIn():
                var = binder(n.var)
                src = "domain" if isinstance(n, Quant) else "collection"
                return dataclasses.replace(n, var=var, body=go(n.body), **{src: go(getattr(n, src))})
            case RelationDomain(columns=Meta(name)):
                cols = values.get(name)
                if not isinstance(cols, TupleDomain):
                    raise RuleDefinitionError(f"unbound column metavariable &{name}")
                return dataclasses.replace(n, columns=cols.elems, attrs=go(n.attrs))
        return map_children(n, go)

    return go(template)
