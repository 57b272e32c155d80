"""Exact domain cardinalities.

All counts are Python integers, so nested domains never overflow.  The
closed forms follow directly from the value semantics used by the oracle;
partition domains are counted by enumeration because partitions may leave
part of the base set uncovered.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Mapping

from .ast import (
    BinOp,
    BoolDomain,
    Domain,
    DomainRef,
    Expr,
    FunctionDomain,
    IntDomain,
    IntLit,
    Meta,
    MSetDomain,
    Name,
    Neg,
    PartitionDomain,
    RelationDomain,
    SequenceDomain,
    SetDomain,
    TupleDomain,
)


class InfiniteDomain(ValueError):
    pass


class UnboundName(LookupError):
    """A parameter (or letting) needed for evaluation has no binding."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unbound name {name}")


Env = Mapping[str, object]


def eval_int(e: Expr, env: Env) -> int:
    """Evaluate a parameter expression (literals, names, ``+ - *``)."""
    match e:
        case IntLit(v):
            return v
        case Name(ident):
            v = env.get(ident)
            if isinstance(v, Expr):
                return eval_int(v, env)
            if not isinstance(v, int) or isinstance(v, bool):
                raise UnboundName(ident)
            return v
        case Neg(operand):
            return -eval_int(operand, env)
        case BinOp("+", a, b):
            return eval_int(a, env) + eval_int(b, env)
        case BinOp("-", a, b):
            return eval_int(a, env) - eval_int(b, env)
        case BinOp("*", a, b):
            return eval_int(a, env) * eval_int(b, env)
    raise TypeError(f"not a parameter expression: {e!r}")


def try_int(e: Expr | None, env: Env) -> int | None:
    if e is None:
        return None
    try:
        return eval_int(e, env)
    except (UnboundName, TypeError):
        return None


def lookup_domain(d: Domain, env: Env) -> Domain:
    while isinstance(d, DomainRef):
        target = env.get(d.name)
        if not isinstance(target, Domain):
            raise UnboundName(d.name)
        d = target
    return d


def int_bounds(d: IntDomain, env: Env) -> tuple[int, int]:
    if d.lo is None or d.hi is None:
        raise InfiniteDomain("infinite domain: int range without both bounds")
    return eval_int(d.lo, env), eval_int(d.hi, env)


def _attr_int(d: Domain, name: str, env: Env) -> int | None:
    a = d.attr(name)
    return None if a is None else eval_int(a.value, env)


def size_bounds(d: Domain, env: Env, cap: int | None) -> tuple[int, int | None]:
    """``(min, max)`` cardinality allowed by the size-family attributes."""
    size = _attr_int(d, "size", env)
    if size is not None:
        return size, size
    lo = _attr_int(d, "minSize", env) or 0
    hi = _attr_int(d, "maxSize", env)
    if cap is not None:
        hi = cap if hi is None else min(hi, cap)
    return max(lo, 0), hi


def surjections(k: int, n: int) -> int:
    """Maps from a k-set onto an n-set."""
    return sum((-1) ** j * math.comb(n, j) * (n - j) ** k for j in range(n + 1))


def _maps(k: int, n: int, injective: bool, surjective: bool) -> int:
    """Total maps from a k-set to an n-set with the given properties."""
    if injective and surjective:
        return math.factorial(k) if k == n else 0
    if injective:
        return math.perm(n, k)
    if surjective:
        return surjections(k, n)
    return n**k


def _bounded_compositions(n: int, lo: int, hi: int, total_lo: int, total_hi: int) -> int:
    """Ways to give each of n items a count in [lo, hi] with sum in [total_lo, total_hi]."""
    if hi < lo:
        return 0
    # polynomial (x^lo + ... + x^hi)^n, coefficients summed over the window
    poly = [1]
    for _ in range(n):
        nxt = [0] * (len(poly) + hi)
        for i, c in enumerate(poly):
            if c:
                for k in range(lo, hi + 1):
                    nxt[i + k] += c
        poly = nxt
    return sum(c for i, c in enumerate(poly) if total_lo <= i <= total_hi)


def domain_size(d: Domain, env: Env | None = None) -> int:
    """Number of distinct values of ``d`` under parameter bindings ``env``.

    ``env`` maps parameter names to integers and letting-domain names to
    domains.  Raises :class:`InfiniteDomain` or :class:`UnboundName`.
    """
    env = env or {}
    d = lookup_domain(d, env)
    match d:
        case Meta(name):
            raise TypeError(f"cannot size pattern metavariable &{name}")
        case BoolDomain():
            return 2
        case IntDomain():
            lo, hi = int_bounds(d, env)
            return max(0, hi - lo + 1)
        case TupleDomain(elems):
            return math.prod(domain_size(e, env) for e in elems)
        case SetDomain(inner):
            n = domain_size(inner, env)
            lo, hi = size_bounds(d, env, n)
            return sum(math.comb(n, k) for k in range(lo, hi + 1))
        case MSetDomain(inner):
            return _mset_size(d, domain_size(inner, env), env)
        case FunctionDomain(source, target):
            return _function_size(d, domain_size(source, env), domain_size(target, env), env)
        case SequenceDomain(inner):
            return _sequence_size(d, domain_size(inner, env), env)
        case RelationDomain(columns):
            return _relation_size(d, [domain_size(c, env) for c in columns], env)
        case PartitionDomain():
            from .oracle import enumerate_values

            return len(enumerate_values(d, env))
    raise TypeError(f"cannot size {d!r}")


def _mset_size(d: MSetDomain, n: int, env: Env) -> int:
    occ_lo = _attr_int(d, "minOccur", env) or 0
    occ_hi = _attr_int(d, "maxOccur", env)
    lo, hi = size_bounds(d, env, None)
    if n == 0:
        return 1 if lo == 0 else 0
    if occ_hi is None:
        if hi is None:
            raise InfiniteDomain("infinite domain: mset without maxOccur or maxSize")
        occ_hi = hi
    if hi is None:
        hi = n * occ_hi
    return _bounded_compositions(n, max(occ_lo, 0), occ_hi, lo, hi)


def _function_size(d: FunctionDomain, n1: int, n2: int, env: Env) -> int:
    inj, surj = d.has("injective"), d.has("surjective")
    if d.has("total"):
        ks = [n1]
    else:
        lo, hi = size_bounds(d, env, n1)
        ks = range(lo, hi + 1)
    lo, hi = size_bounds(d, env, n1)
    return sum(
        math.comb(n1, k) * _maps(k, n2, inj, surj) for k in ks if lo <= k <= hi
    )


def _sequence_size(d: SequenceDomain, n: int, env: Env) -> int:
    inj, surj = d.has("injective"), d.has("surjective")
    lo, hi = size_bounds(d, env, n if inj else None)
    if hi is None:
        raise InfiniteDomain("infinite domain: sequence without size or maxSize")
    return sum(_maps(k, n, inj, surj) for k in range(lo, hi + 1))


def _relation_size(d: RelationDomain, sizes: list[int], env: Env) -> int:
    product = math.prod(sizes)
    lo, hi = size_bounds(d, env, product)
    functional = [a for a in d.attrs if a.cols is not None]
    if not functional:
        return sum(math.comb(product, k) for k in range(lo, hi + 1))
    strongest = next((a for a in functional if a.name == "total_functional"), functional[0])
    if any(a.cols != strongest.cols for a in functional):
        from .oracle import enumerate_values

        return len(enumerate_values(d, env))
    keys = math.prod(sizes[c - 1] for c in strongest.cols)
    rest = math.prod(s for i, s in enumerate(sizes, 1) if i not in strongest.cols)
    if strongest.name == "total_functional":
        return rest**keys if lo <= keys <= hi else 0
    return sum(math.comb(keys, k) * rest**k for k in range(lo, min(hi, keys) + 1))


@lru_cache(maxsize=None)
def bell(n: int) -> int:
    """Bell numbers, used only as an upper bound for partition enumeration."""
    if n == 0:
        return 1
    return sum(math.comb(n - 1, k) * bell(k) for k in range(n))
