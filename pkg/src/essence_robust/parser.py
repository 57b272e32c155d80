"""Recursive-descent parser for the mini-ESSENCE subset and parameter files.

Operator precedence, loosest first: quantifiers (bodies extend as far right
as possible), ``<->``, ``->`` (right associative), ``\\/``, ``/\\``, the
comparisons and ``in``, ``+``/``-``, ``*``, unary ``!``/``-``, then
application and projection.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import (
    ATTRIBUTE_ORDER,
    COLUMN_ATTRIBUTES,
    FLAG_ATTRIBUTES,
    Apply,
    Attr,
    AttributeConflict,
    BinOp,
    BoolDomain,
    BoolLit,
    Card,
    Declaration,
    Domain,
    DomainRef,
    Expr,
    Freq,
    FunctionDomain,
    IntDomain,
    IntLit,
    Meta,
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
    SequenceDomain,
    SetDomain,
    SetLit,
    Specification,
    ToMSet,
    ToRelation,
    TupleDomain,
    Wildcard,
)


class ParseError(Exception):
    def __init__(self, line: int, column: int, expected: str, found: str):
        self.line = line
        self.column = column
        self.expected = expected
        self.found = found
        super().__init__(f"line {line}, column {column}: expected {expected}, found {found}")


class ScopeError(ParseError):
    """A name is used before (or without) being declared."""

    def __init__(self, line: int, column: int, name: str, message: str | None = None):
        self.name = name
        Exception.__init__(
            self, f"line {line}, column {column}: {message or f'undeclared name {name}'}"
        )
        self.line, self.column, self.expected, self.found = line, column, "declared name", name


class DuplicateBindingError(ParseError):
    def __init__(self, line: int, column: int, name: str):
        self.name = name
        Exception.__init__(self, f"line {line}, column {column}: duplicate binding for {name}")
        self.line, self.column, self.expected, self.found = line, column, "fresh name", name


@dataclass(frozen=True)
class Token:
    kind: str  # ident | meta | int | sym | eof
    text: str
    line: int
    column: int


_SYMBOLS = [
    "-->", "<->", "..", "->", "/\\", "\\/", "<=", ">=", "!=",
    "=", "<", ">", "(", ")", "{", "}", "[", "]", ",", ":", ".", "|", "*", "+", "-", "!",
]
_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>\$[^\n]*)"
    r"|(?P<meta>&[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<int>[0-9]+)"
    r"|(?P<sym>" + "|".join(re.escape(s) for s in _SYMBOLS) + ")"
)


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(line, col, "a token", repr(text[pos]))
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


_ATTRIBUTES = frozenset(ATTRIBUTE_ORDER)
_DOMAIN_KEYWORDS = {"int", "bool", "set", "mset", "function", "relation", "partition", "sequence", "tuple"}
_BUILTINS = {"freq", "parts", "toMSet", "toRelation"}
_COMPARE = {"=", "!=", "<", "<=", ">", ">="}


class Parser:
    def __init__(self, text: str, scoped: bool = True):
        self.tokens = tokenize(text)
        self.i = 0
        self.scoped = scoped
        self.declared: dict[str, str] = {}
        self.bound: list[str] = []

    # -- token plumbing ----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("sym", "ident") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def error(self, expected: str) -> ParseError:
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        return ParseError(t.line, t.column, expected, found)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(repr(text))
        return self.advance()

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            raise self.error("an identifier")
        return self.advance()

    # -- specifications ----------------------------------------------------

    def spec(self) -> Specification:
        decls: list[Declaration] = []
        constraints: list[Expr] = []
        if self.at("language"):
            self.advance()
            self.ident()
            while self.tok.kind == "int" or self.at("."):
                self.advance()
        while self.tok.kind != "eof":
            if self.at("given") or self.at("find"):
                kind = self.advance().text
                names = [self.ident()]
                while self.at(","):
                    self.advance()
                    names.append(self.ident())
                self.expect(":")
                dom = self.domain()
                for t in names:
                    self._declare(t, kind)
                    decls.append(Declaration(kind, t.text, dom))
            elif self.at("letting"):
                self.advance()
                t = self.ident()
                self.expect("be")
                if self.at("domain"):
                    self.advance()
                    payload, kind = self.domain(), "letting-domain"
                else:
                    payload, kind = self.expr(), "letting-constant"
                self._declare(t, kind)
                decls.append(Declaration(kind, t.text, payload))
            elif self.at("such"):
                self.advance()
                self.expect("that")
                constraints.append(self.expr())
                while self.at(","):
                    self.advance()
                    constraints.append(self.expr())
            else:
                raise self.error("a declaration or 'such that'")
        return Specification(tuple(decls), tuple(constraints))

    def _declare(self, t: Token, kind: str) -> None:
        if t.text in self.declared:
            raise ScopeError(t.line, t.column, t.text, f"duplicate declaration of {t.text}")
        self.declared[t.text] = kind

    # -- domains -----------------------------------------------------------

    def domain(self) -> Domain:
        t = self.tok
        if t.kind == "meta":
            self.advance()
            return Meta(t.text[1:])
        if t.kind == "ident" and t.text not in _DOMAIN_KEYWORDS:
            self.advance()
            if self.scoped and self.declared.get(t.text) != "letting-domain":
                raise ScopeError(t.line, t.column, t.text, f"{t.text} is not a declared domain")
            return DomainRef(t.text)
        if self.at("("):
            return self._paren_domain()
        if t.kind != "ident":
            raise self.error("a domain")
        self.advance()
        try:
            return self._constructor(t.text)
        except AttributeConflict as exc:
            raise ParseError(t.line, t.column, "consistent attributes", str(exc)) from None

    def _constructor(self, word: str) -> Domain:
        match word:
            case "bool":
                return BoolDomain()
            case "int":
                if not self.at("("):
                    return IntDomain()
                self.advance()
                lo = None if self.at("..") else self.additive()
                self.expect("..")
                hi = None if self.at(")") else self.additive()
                self.expect(")")
                return IntDomain(lo, hi)
            case "tuple":
                d = self._paren_domain(allow_single=True)
                return d if isinstance(d, TupleDomain) else TupleDomain((d,))
            case "set" | "mset" | "sequence":
                attrs = self._attrs()
                self.expect("of")
                inner = self.domain()
                cls = {"set": SetDomain, "mset": MSetDomain, "sequence": SequenceDomain}[word]
                return cls(inner, attrs)
            case "partition":
                attrs = self._attrs()
                self.expect("from")
                return PartitionDomain(self.domain(), attrs)
            case "function":
                attrs = self._attrs()
                source = self.domain()
                self.expect("-->")
                return FunctionDomain(source, self.domain(), attrs)
            case "relation":
                attrs = self._attrs()
                self.expect("of")
                if self.tok.kind == "meta":
                    return RelationDomain(Meta(self.advance().text[1:]), attrs)
                self.expect("(")
                cols = [self.domain()]
                while self.at("*"):
                    self.advance()
                    cols.append(self.domain())
                self.expect(")")
                return RelationDomain(tuple(cols), attrs)
        raise self.error("a domain")

    def _paren_domain(self, allow_single: bool = False) -> Domain:
        self.expect("(")
        elems = [self.domain()]
        sep = None
        while self.at(",") or self.at("*"):
            s = self.advance().text
            if sep is not None and s != sep:
                raise self.error(repr(sep))
            sep = s
            elems.append(self.domain())
        self.expect(")")
        if len(elems) == 1 and not allow_single:
            return elems[0]
        return TupleDomain(tuple(elems))

    def _attrs(self) -> tuple[Attr, ...]:
        if not (self.at("(") and self.peek().kind == "ident" and self.peek().text in _ATTRIBUTES
                and self.declared.get(self.peek().text) != "letting-domain"):
            return ()
        self.advance()
        attrs = [self._attr()]
        while self.at(","):
            self.advance()
            attrs.append(self._attr())
        self.expect(")")
        return tuple(attrs)

    def _attr(self) -> Attr:
        t = self.ident()
        name = t.text
        if name not in _ATTRIBUTES:
            raise ParseError(t.line, t.column, "an attribute name", repr(name))
        if name in FLAG_ATTRIBUTES:
            return Attr(name)
        if name in COLUMN_ATTRIBUTES:
            self.expect("(")
            cols = [self._int()]
            while self.at(","):
                self.advance()
                cols.append(self._int())
            self.expect(")")
            return Attr(name, cols=tuple(cols))
        return Attr(name, value=self.additive())

    def _int(self) -> int:
        if self.tok.kind != "int":
            raise self.error("an integer")
        return int(self.advance().text)

    # -- expressions -------------------------------------------------------

    def expr(self) -> Expr:
        if self.at("forall") or self.at("exists"):
            return self._quantifier()
        return self._iff()

    def _quantifier(self) -> Expr:
        kind = self.advance().text
        binders = [self._binder()]
        while self.at(","):
            self.advance()
            binders.append(self._binder())
        if self.at(":"):
            self.advance()
            source, cls = self.domain(), Quant
        elif self.at("in"):
            self.advance()
            source, cls = self.additive(), QuantIn
        else:
            raise self.error("':' or 'in'")
        self.expect(".")
        self.bound.extend(binders)
        try:
            body = self.expr()
        finally:
            del self.bound[-len(binders):]
        for var in reversed(binders):
            body = cls(kind, var, source, body)
        return body

    def _binder(self) -> str:
        t = self.tok
        if t.kind == "meta":
            return self.advance().text
        return self.ident().text

    def _binary(self, ops, sub, right_assoc=False, assoc=True):
        left = sub()
        while self.tok.kind == "sym" and self.tok.text in ops:
            op = self.advance().text
            right = self._binary(ops, sub, right_assoc, assoc) if right_assoc else sub()
            left = BinOp(op, left, right)
            if right_assoc or not assoc:
                break
        return left

    def _starts_quantifier(self) -> bool:
        return self.at("forall") or self.at("exists")

    def _iff(self) -> Expr:
        return self._binary({"<->"}, self._implies, assoc=False)

    def _implies(self) -> Expr:
        return self._binary({"->"}, self._or, right_assoc=True)

    def _or(self) -> Expr:
        return self._binary({"\\/"}, self._and)

    def _and(self) -> Expr:
        return self._binary({"/\\"}, self._compare)

    def _compare(self) -> Expr:
        left = self.additive()
        if self.tok.kind == "sym" and self.tok.text in _COMPARE:
            op = self.advance().text
            return BinOp(op, left, self.additive())
        if self.at("in") and self.tok.kind == "ident":
            self.advance()
            return BinOp("in", left, self.additive())
        return left

    def additive(self) -> Expr:
        left = self._multiplicative()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            left = BinOp(op, left, self._multiplicative())
        return left

    def _multiplicative(self) -> Expr:
        left = self._unary()
        while self.at("*"):
            self.advance()
            left = BinOp("*", left, self._unary())
        return left

    def _unary(self) -> Expr:
        if self.at("!"):
            self.advance()
            return Not(self._unary())
        if self.at("-"):
            self.advance()
            if self.tok.kind == "int":
                return self._postfix(IntLit(-int(self.advance().text)))
            return Neg(self._unary())
        return self._postfix(self._primary())

    def _postfix(self, e: Expr) -> Expr:
        while self.at("("):
            self.advance()
            args = [] if self.at(")") else [self._arg()]
            while self.at(","):
                self.advance()
                args.append(self._arg())
            self.expect(")")
            if any(isinstance(a, Wildcard) for a in args):
                e = Project(e, tuple(args))
            else:
                e = Apply(e, tuple(args))
        return e

    def _arg(self) -> Expr:
        if self.tok.kind == "ident" and self.tok.text == "_":
            self.advance()
            return Wildcard()
        return self.expr()

    def _primary(self) -> Expr:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return IntLit(int(t.text))
        if t.kind == "meta":
            self.advance()
            return Meta(t.text[1:])
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if self.at("|"):
            self.advance()
            e = self.expr()
            self.expect("|")
            return Card(e)
        if self.at("{"):
            self.advance()
            elems = []
            if not self.at("}"):
                elems.append(self.expr())
                while self.at(","):
                    self.advance()
                    elems.append(self.expr())
            self.expect("}")
            return SetLit(tuple(elems))
        if self._starts_quantifier():
            return self._quantifier()
        if t.kind == "ident":
            if t.text in ("true", "false"):
                self.advance()
                return BoolLit(t.text == "true")
            if t.text in _BUILTINS and self.peek().text == "(":
                return self._builtin()
            if t.text == "_":
                raise self.error("an expression (wildcards are only allowed in projections)")
            self.advance()
            if self.scoped and t.text not in self.bound:
                kind = self.declared.get(t.text)
                if kind is None or kind == "letting-domain":
                    raise ScopeError(t.line, t.column, t.text)
            return Name(t.text)
        raise self.error("an expression")

    def _builtin(self) -> Expr:
        name = self.advance().text
        self.expect("(")
        first = self.expr()
        if name == "freq":
            self.expect(",")
            second = self.expr()
            self.expect(")")
            return Freq(first, second)
        self.expect(")")
        return {"parts": Parts, "toMSet": ToMSet, "toRelation": ToRelation}[name](first)

    def finish(self) -> None:
        if self.tok.kind != "eof":
            raise self.error("end of input")


def parse_spec(text: str) -> Specification:
    return Parser(text).spec()


def parse_expr(text: str, scoped: bool = False) -> Expr:
    p = Parser(text, scoped=scoped)
    e = p.expr()
    p.finish()
    return e


def parse_domain(text: str, scoped: bool = False) -> Domain:
    p = Parser(text, scoped=scoped)
    d = p.domain()
    p.finish()
    return d


def parse_params(text: str) -> dict[str, int]:
    """Read ``letting n be 3`` lines into a name-to-integer map."""
    p = Parser(text, scoped=False)
    out: dict[str, int] = {}
    while p.tok.kind != "eof":
        if p.at("language"):
            p.advance()
            p.ident()
            while p.tok.kind == "int" or p.at("."):
                p.advance()
            continue
        p.expect("letting")
        t = p.ident()
        p.expect("be")
        sign = 1
        if p.at("-"):
            p.advance()
            sign = -1
        if p.tok.kind != "int":
            raise p.error("an integer")
        value = sign * int(p.advance().text)
        if t.text in out:
            raise DuplicateBindingError(t.line, t.column, t.text)
        out[t.text] = value
    return out


def format_params(params: dict[str, int]) -> str:
    return "".join(f"letting {k} be {v}\n" for k, v in params.items())
