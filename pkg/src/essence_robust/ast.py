"""Syntax trees for the mini-ESSENCE subset.

Every node is an immutable dataclass, so structural equality, hashing and
sharing between workers all come for free.  Metavariables (``&x`` in rule
text) are ordinary nodes and may stand in either an expression or a domain
position; a quantifier binder that is a metavariable is spelled with its
leading ``&`` in :attr:`Quant.var`.
"""

from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass
from typing import Callable, Iterator, Union


class Node:
    """Base class for every syntax tree node."""

    __slots__ = ()


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------


class Expr(Node):
    __slots__ = ()


@dataclass(frozen=True)
class IntLit(Expr):
    value: int


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool


@dataclass(frozen=True)
class Name(Expr):
    ident: str


@dataclass(frozen=True)
class Meta(Expr):
    """A rule metavariable; usable wherever an expression or domain goes."""

    name: str


@dataclass(frozen=True)
class Wildcard(Expr):
    pass


@dataclass(frozen=True)
class Quant(Expr):
    """``forall v : D . body`` / ``exists v : D . body``."""

    kind: str
    var: str
    domain: "Domain"
    body: Expr


@dataclass(frozen=True)
class QuantIn(Expr):
    """``forall v in C . body`` / ``exists v in C . body``."""

    kind: str
    var: str
    collection: Expr
    body: Expr


COMPARISONS = frozenset({"=", "!=", "<", "<=", ">", ">=", "in"})
LOGICAL = frozenset({"/\\", "\\/", "->", "<->"})
ARITHMETIC = frozenset({"+", "-", "*"})


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr


@dataclass(frozen=True)
class Card(Expr):
    operand: Expr


@dataclass(frozen=True)
class Freq(Expr):
    collection: Expr
    value: Expr


@dataclass(frozen=True)
class Apply(Expr):
    """Function application ``f(a, b)``; on a relation, a membership test."""

    callee: Expr
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Project(Expr):
    """Relation projection ``r(a, _, c)``; at least one argument is a wildcard."""

    callee: Expr
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class SetLit(Expr):
    elems: tuple[Expr, ...]


@dataclass(frozen=True)
class Parts(Expr):
    operand: Expr


@dataclass(frozen=True)
class ToMSet(Expr):
    operand: Expr


@dataclass(frozen=True)
class ToRelation(Expr):
    operand: Expr


# ---------------------------------------------------------------------------
# Domains and attributes
# ---------------------------------------------------------------------------

SIZE_FAMILY = ("size", "minSize", "maxSize")
OCCURRENCE_FAMILY = ("minOccur", "maxOccur")
FUNCTION_FAMILY = ("total", "injective", "surjective", "bijective")
RELATION_FAMILY = ("functional", "total_functional")
PARTITION_FAMILY = (
    "regular",
    "complete",
    "numParts",
    "minNumParts",
    "maxNumParts",
    "partSize",
    "minPartSize",
    "maxPartSize",
)
ATTRIBUTE_ORDER = (
    SIZE_FAMILY + OCCURRENCE_FAMILY + FUNCTION_FAMILY + RELATION_FAMILY + PARTITION_FAMILY
)
_RANK = {name: i for i, name in enumerate(ATTRIBUTE_ORDER)}

VALUED_ATTRIBUTES = frozenset(
    SIZE_FAMILY
    + OCCURRENCE_FAMILY
    + ("numParts", "minNumParts", "maxNumParts", "partSize", "minPartSize", "maxPartSize")
)
COLUMN_ATTRIBUTES = frozenset(RELATION_FAMILY)
FLAG_ATTRIBUTES = frozenset(
    ("total", "injective", "surjective", "bijective", "regular", "complete")
)

LEGAL_ATTRIBUTES = {
    "set": frozenset(SIZE_FAMILY),
    "mset": frozenset(SIZE_FAMILY + OCCURRENCE_FAMILY),
    "function": frozenset(SIZE_FAMILY + FUNCTION_FAMILY),
    "sequence": frozenset(SIZE_FAMILY + FUNCTION_FAMILY),
    "relation": frozenset(SIZE_FAMILY + RELATION_FAMILY),
    "partition": frozenset(SIZE_FAMILY + PARTITION_FAMILY),
}


class AttributeConflict(ValueError):
    """An attribute is illegal for its constructor or contradicts a sibling."""


@dataclass(frozen=True)
class Attr(Node):
    name: str
    value: Expr | None = None
    cols: tuple[int, ...] | None = None


def attr_key(a: Attr) -> tuple[int, str]:
    return (_RANK.get(a.name, len(_RANK)), a.name)


def normalize_attrs(attrs) -> tuple[Attr, ...]:
    """Canonical attribute tuple: one entry per name, ``bijective`` expanded."""
    by_name: dict[str, Attr] = {}
    for a in attrs:
        by_name[a.name] = a
        if a.name == "bijective":
            by_name.setdefault("injective", Attr("injective"))
            by_name.setdefault("surjective", Attr("surjective"))
    return tuple(sorted(by_name.values(), key=attr_key))


class Domain(Node):
    __slots__ = ()
    constructor = ""

    def attr(self, name: str) -> Attr | None:
        for a in getattr(self, "attrs", ()):
            if a.name == name:
                return a
        return None

    def has(self, name: str) -> bool:
        return self.attr(name) is not None


def _check_attrs(d: Domain) -> None:
    legal = LEGAL_ATTRIBUTES[d.constructor]
    object.__setattr__(d, "attrs", normalize_attrs(d.attrs))
    for a in d.attrs:
        if a.name not in legal:
            raise AttributeConflict(f"attribute {a.name} is not allowed on {d.constructor}")
    literal = {
        a.name: a.value.value
        for a in d.attrs
        if isinstance(a.value, IntLit)
    }
    size = literal.get("size")
    lo, hi = literal.get("minSize"), literal.get("maxSize")
    if size is not None and hi is not None and hi < size:
        raise AttributeConflict(f"size {size} contradicts maxSize {hi}")
    if size is not None and lo is not None and lo > size:
        raise AttributeConflict(f"size {size} contradicts minSize {lo}")
    if lo is not None and hi is not None and lo > hi:
        raise AttributeConflict(f"minSize {lo} contradicts maxSize {hi}")


@dataclass(frozen=True)
class IntDomain(Domain):
    lo: Expr | None = None
    hi: Expr | None = None
    constructor = "int"


@dataclass(frozen=True)
class BoolDomain(Domain):
    constructor = "bool"


@dataclass(frozen=True)
class DomainRef(Domain):
    """A reference to a ``letting X be domain D`` declaration."""

    name: str
    constructor = "ref"


@dataclass(frozen=True)
class TupleDomain(Domain):
    elems: tuple[Domain, ...]
    constructor = "tuple"


@dataclass(frozen=True)
class SetDomain(Domain):
    inner: Domain
    attrs: tuple[Attr, ...] = ()
    constructor = "set"

    def __post_init__(self):
        _check_attrs(self)


@dataclass(frozen=True)
class MSetDomain(Domain):
    inner: Domain
    attrs: tuple[Attr, ...] = ()
    constructor = "mset"

    def __post_init__(self):
        _check_attrs(self)


@dataclass(frozen=True)
class FunctionDomain(Domain):
    source: Domain
    target: Domain
    attrs: tuple[Attr, ...] = ()
    constructor = "function"

    def __post_init__(self):
        _check_attrs(self)


@dataclass(frozen=True)
class RelationDomain(Domain):
    # A bare Meta in place of the column tuple matches any arity (patterns only).
    columns: Union[tuple[Domain, ...], Meta]
    attrs: tuple[Attr, ...] = ()
    constructor = "relation"

    def __post_init__(self):
        _check_attrs(self)
        if isinstance(self.columns, tuple):
            arity = len(self.columns)
            for a in self.attrs:
                if a.cols is not None:
                    if not a.cols or len(a.cols) >= arity:
                        raise AttributeConflict(
                            f"{a.name} needs a proper nonempty column subset of an arity-{arity} relation"
                        )
                    if any(c < 1 or c > arity for c in a.cols) or len(set(a.cols)) != len(a.cols):
                        raise AttributeConflict(f"bad column list {a.cols} for arity {arity}")


@dataclass(frozen=True)
class PartitionDomain(Domain):
    inner: Domain
    attrs: tuple[Attr, ...] = ()
    constructor = "partition"

    def __post_init__(self):
        _check_attrs(self)


@dataclass(frozen=True)
class SequenceDomain(Domain):
    inner: Domain
    attrs: tuple[Attr, ...] = ()
    constructor = "sequence"

    def __post_init__(self):
        _check_attrs(self)


COLLECTION_DOMAINS = (SetDomain, MSetDomain, PartitionDomain, SequenceDomain)
ATTRIBUTED_DOMAINS = COLLECTION_DOMAINS + (FunctionDomain, RelationDomain)


def with_attrs(d: Domain, attrs) -> Domain:
    return dataclasses.replace(d, attrs=normalize_attrs(attrs))


# ---------------------------------------------------------------------------
# Specifications
# ---------------------------------------------------------------------------

DECLARATION_KINDS = ("given", "letting-domain", "letting-constant", "find")


@dataclass(frozen=True)
class Declaration(Node):
    kind: str
    name: str
    payload: Node  # Domain, or an Expr for letting-constant

    def __post_init__(self):
        if self.kind not in DECLARATION_KINDS:
            raise ValueError(f"unknown declaration kind {self.kind!r}")
        if self.kind != "letting-constant" and not isinstance(self.payload, Domain):
            raise ValueError(f"{self.kind} {self.name} must carry a domain")


@dataclass(frozen=True)
class Specification(Node):
    declarations: tuple[Declaration, ...] = ()
    constraints: tuple[Expr, ...] = ()

    def __post_init__(self):
        seen = set()
        for d in self.declarations:
            if d.name in seen:
                raise ValueError(f"duplicate declaration of {d.name}")
            seen.add(d.name)

    def declaration(self, name: str) -> Declaration | None:
        for d in self.declarations:
            if d.name == name:
                return d
        return None

    @property
    def finds(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.declarations if d.kind == "find")

    @property
    def givens(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.declarations if d.kind == "given")

    def domain_of(self, name: str) -> Domain:
        d = self.declaration(name)
        if d is None or not isinstance(d.payload, Domain):
            raise KeyError(name)
        return d.payload

    def domain_lettings(self) -> dict[str, Domain]:
        return {d.name: d.payload for d in self.declarations if d.kind == "letting-domain"}

    def with_domain(self, name: str, domain: Domain) -> "Specification":
        decls = tuple(
            dataclasses.replace(d, payload=domain) if d.name == name else d
            for d in self.declarations
        )
        return dataclasses.replace(self, declarations=decls)

    def with_constraints(self, constraints) -> "Specification":
        return dataclasses.replace(self, constraints=tuple(constraints))


# ---------------------------------------------------------------------------
# Rule traces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Conversion:
    """How to turn a value of the strengthened domain back into the original.

    ``path`` locates the converted position inside the find's domain
    (``"inner"`` steps through set/mset members).  ``permutation`` lists,
    for each column of the emitted function's graph, the original relation
    column it came from (0-based).
    """

    kind: str  # "toMSet" | "toRelation"
    path: tuple[str, ...] = ()
    permutation: tuple[int, ...] | None = None
    key_arity: int = 1


@dataclass(frozen=True)
class TraceStep:
    rule: str
    target: str | None
    before: Domain | None
    after: Domain | None
    constraint: Expr | None
    kept: bool
    conversion: Conversion | None = None


@dataclass(frozen=True)
class RuleTrace:
    steps: tuple[TraceStep, ...] = ()

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self) -> Iterator[TraceStep]:
        return iter(self.steps)

    def append(self, step: TraceStep) -> "RuleTrace":
        return RuleTrace(self.steps + (step,))


# ---------------------------------------------------------------------------
# Generic traversal
# ---------------------------------------------------------------------------


def _map_value(value, f):
    if isinstance(value, Node):
        return f(value)
    if isinstance(value, tuple):
        return tuple(_map_value(v, f) for v in value)
    return value


def map_children(node: Node, f: Callable[[Node], Node]) -> Node:
    """Apply ``f`` to every direct child node, rebuilding only on change."""
    changes = {}
    for fld in dataclasses.fields(node):
        old = getattr(node, fld.name)
        new = _map_value(old, f)
        if new is not old and new != old:
            changes[fld.name] = new
    return dataclasses.replace(node, **changes) if changes else node


def children(node: Node) -> Iterator[Node]:
    for fld in dataclasses.fields(node):
        yield from _iter_value(getattr(node, fld.name))


def _iter_value(value):
    if isinstance(value, Node):
        yield value
    elif isinstance(value, tuple):
        for v in value:
            yield from _iter_value(v)


def walk(node: Node) -> Iterator[Node]:
    """Preorder iteration over ``node`` and all of its descendants."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(list(children(n))))


def transform(node: Node, f: Callable[[Node], Node]) -> Node:
    """Bottom-up rewrite: children first, then ``f`` on the rebuilt node."""
    return f(map_children(node, lambda c: transform(c, f)))


def binder_of(node: Node) -> str | None:
    if isinstance(node, (Quant, QuantIn)):
        return node.var
    return None


def free_names(node: Node) -> frozenset[str]:
    """Names referenced but not bound inside ``node``."""
    match node:
        case Name(ident):
            return frozenset({ident})
        case DomainRef(name):
            return frozenset({name})
        case Quant(_, var, domain, body):
            return free_names(domain) | (free_names(body) - {var})
        case QuantIn(_, var, coll, body):
            return free_names(coll) | (free_names(body) - {var})
    out: frozenset[str] = frozenset()
    for c in children(node):
        out |= free_names(c)
    return out


def all_names(node: Node) -> frozenset[str]:
    out = set()
    for n in walk(node):
        if isinstance(n, Name):
            out.add(n.ident)
        elif isinstance(n, DomainRef):
            out.add(n.name)
        elif isinstance(n, (Quant, QuantIn)):
            out.add(n.var)
    return frozenset(out)


def metavariables(node: Node) -> frozenset[str]:
    out = set()
    for n in walk(node):
        if isinstance(n, Meta):
            out.add(n.name)
        elif isinstance(n, (Quant, QuantIn)) and n.var.startswith("&"):
            out.add(n.var[1:])
    return frozenset(out)


def fresh_name(base: str, avoid) -> str:
    avoid = set(avoid)
    if base not in avoid:
        return base
    for i in itertools.count(1):
        cand = f"{base}{i}"
        if cand not in avoid:
            return cand
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# Substitution and alpha-equivalence
# ---------------------------------------------------------------------------


def substitute(e: Node, name: str, v: Expr) -> Node:
    """Replace free occurrences of ``name`` in ``e`` by ``v``, avoiding capture."""
    v_free = free_names(v)

    def go(n: Node) -> Node:
        match n:
            case Name(ident) if ident == name:
                return v
            case Quant(_, var, domain, body) | QuantIn(_, var, domain, body):
                source = go(domain)
                if var == name:
                    return dataclasses.replace(n, **{_source_field(n): source})
                if var in v_free and name in free_names(body):
                    new_var = fresh_name(var, v_free | all_names(body) | {name})
                    body = substitute(body, var, Name(new_var))
                    var = new_var
                return dataclasses.replace(
                    n, var=var, body=go(body), **{_source_field(n): source}
                )
        return map_children(n, go)

    return go(e)


def _source_field(n: Node) -> str:
    return "domain" if isinstance(n, Quant) else "collection"


def rename_bound(e: Node, fresh: Callable[[str], str]) -> Node:
    """Rename every binder in ``e`` through ``fresh`` (used by property tests)."""

    def go(n: Node) -> Node:
        if isinstance(n, (Quant, QuantIn)):
            new_var = fresh(n.var)
            body = substitute(n.body, n.var, Name(new_var))
            src = go(getattr(n, _source_field(n)))
            return dataclasses.replace(
                n, var=new_var, body=go(body), **{_source_field(n): src}
            )
        return map_children(n, go)

    return go(e)


def alpha_equal(a: Node, b: Node) -> bool:
    """True iff ``a`` and ``b`` differ only in the spelling of bound variables."""
    return _alpha(a, b, {}, {}, 0)


def _alpha(a, b, env_a: dict, env_b: dict, depth: int) -> bool:
    if isinstance(a, tuple) or isinstance(b, tuple):
        return (
            isinstance(a, tuple)
            and isinstance(b, tuple)
            and len(a) == len(b)
            and all(_alpha(x, y, env_a, env_b, depth) for x, y in zip(a, b))
        )
    if not isinstance(a, Node) or not isinstance(b, Node):
        return a == b
    if type(a) is not type(b):
        return False
    if isinstance(a, Name):
        ia, ib = env_a.get(a.ident), env_b.get(b.ident)
        if ia is None and ib is None:
            return a.ident == b.ident
        return ia == ib
    if isinstance(a, (Quant, QuantIn)):
        if a.kind != b.kind:
            return False
        if not _alpha(getattr(a, _source_field(a)), getattr(b, _source_field(b)), env_a, env_b, depth):
            return False
        na, nb = dict(env_a), dict(env_b)
        na[a.var] = depth
        nb[b.var] = depth
        return _alpha(a.body, b.body, na, nb, depth + 1)
    for fld in dataclasses.fields(a):
        if not _alpha(getattr(a, fld.name), getattr(b, fld.name), env_a, env_b, depth):
            return False
    return True


# ---------------------------------------------------------------------------
# Small helpers shared by the rule modules
# ---------------------------------------------------------------------------


def conjuncts(e: Expr) -> list[Expr]:
    if isinstance(e, BinOp) and e.op == "/\\":
        return conjuncts(e.left) + conjuncts(e.right)
    return [e]


def conjoin(parts) -> Expr | None:
    parts = list(parts)
    if not parts:
        return None
    out = parts[0]
    for p in parts[1:]:
        out = BinOp("/\\", out, p)
    return out


def fold_constants(e: Expr) -> Expr:
    """Evaluate arithmetic on integer literals."""

    def step(n: Node) -> Node:
        match n:
            case BinOp(op, IntLit(a), IntLit(b)) if op in ARITHMETIC:
                return IntLit({"+": a + b, "-": a - b, "*": a * b}[op])
            case Neg(IntLit(a)):
                return IntLit(-a)
        return n

    return transform(e, step)


def resolve(d: Domain, lettings: dict[str, Domain]) -> Domain:
    """Expand letting-domain references throughout ``d``."""

    def step(n: Node) -> Node:
        if isinstance(n, DomainRef) and n.name in lettings:
            return resolve(lettings[n.name], lettings)
        return n

    return transform(d, step)


# Domain positions: a path is a tuple of field names (plus tuple indices).


def domain_positions(d: Domain, path: tuple = ()) -> Iterator[tuple[tuple, Domain]]:
    yield path, d
    match d:
        case SetDomain() | MSetDomain() | PartitionDomain() | SequenceDomain():
            yield from domain_positions(d.inner, path + ("inner",))
        case FunctionDomain():
            yield from domain_positions(d.source, path + ("source",))
            yield from domain_positions(d.target, path + ("target",))
        case RelationDomain(columns=cols) if isinstance(cols, tuple):
            for i, c in enumerate(cols):
                yield from domain_positions(c, path + (("columns", i),))
        case TupleDomain(elems):
            for i, c in enumerate(elems):
                yield from domain_positions(c, path + (("elems", i),))


def domain_at(d: Domain, path: tuple) -> Domain:
    for step in path:
        if isinstance(step, tuple):
            d = getattr(d, step[0])[step[1]]
        else:
            d = getattr(d, step)
    return d


def replace_at(d: Domain, path: tuple, new: Domain) -> Domain:
    if not path:
        return new
    step, rest = path[0], path[1:]
    if isinstance(step, tuple):
        fname, idx = step
        items = list(getattr(d, fname))
        items[idx] = replace_at(items[idx], rest, new)
        return dataclasses.replace(d, **{fname: tuple(items)})
    return dataclasses.replace(d, **{step: replace_at(getattr(d, step), rest, new)})
