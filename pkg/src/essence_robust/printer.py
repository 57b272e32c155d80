"""Canonical surface syntax for specifications, domains and expressions."""

from __future__ import annotations

from .ast import (
    Apply,
    Attr,
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
    Node,
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

# Binding strength, loosest first.  Quantifiers sit below everything.
PRECEDENCE = {
    "<->": 1,
    "->": 2,
    "\\/": 3,
    "/\\": 4,
    "=": 5,
    "!=": 5,
    "<": 5,
    "<=": 5,
    ">": 5,
    ">=": 5,
    "in": 5,
    "+": 6,
    "-": 6,
    "*": 7,
}
LEFT_ASSOC = {"/\\", "\\/", "+", "-", "*"}
RIGHT_ASSOC = {"->"}
UNARY = 8
ATOM = 9


def pretty_print(s: Specification) -> str:
    lines = [print_declaration(d) for d in s.declarations]
    if s.constraints:
        lines.append("such that")
        body = [f"  {print_expr(c)}" for c in s.constraints]
        lines.append(",\n".join(body))
    return "\n".join(lines) + "\n"


def print_declaration(d: Declaration) -> str:
    match d.kind:
        case "given":
            return f"given {d.name} : {print_domain(d.payload)}"
        case "find":
            return f"find {d.name} : {print_domain(d.payload)}"
        case "letting-domain":
            return f"letting {d.name} be domain {print_domain(d.payload)}"
        case "letting-constant":
            return f"letting {d.name} be {print_expr(d.payload)}"
    raise ValueError(d.kind)


def print_attrs(attrs: tuple[Attr, ...]) -> str:
    names = {a.name for a in attrs}
    parts = []
    for a in attrs:
        if "bijective" in names and a.name in ("injective", "surjective"):
            continue
        if a.cols is not None:
            parts.append(f"{a.name} ({','.join(str(c) for c in a.cols)})")
        elif a.value is not None:
            parts.append(f"{a.name} {print_expr(a.value, PRECEDENCE['+'])}")
        else:
            parts.append(a.name)
    return f"({', '.join(parts)}) " if parts else ""


def print_domain(d: Node) -> str:
    match d:
        case Meta(name):
            return f"&{name}"
        case IntDomain(lo, hi):
            if lo is None and hi is None:
                return "int"
            lo_s = print_expr(lo, PRECEDENCE["+"]) if lo is not None else ""
            hi_s = print_expr(hi, PRECEDENCE["+"]) if hi is not None else ""
            return f"int({lo_s}..{hi_s})"
        case BoolDomain():
            return "bool"
        case DomainRef(name):
            return name
        case TupleDomain(elems):
            if len(elems) == 1:
                return f"tuple ({print_domain(elems[0])})"
            return "(" + ", ".join(print_domain(e) for e in elems) + ")"
        case SetDomain(inner, attrs):
            return f"set {print_attrs(attrs)}of {print_domain(inner)}"
        case MSetDomain(inner, attrs):
            return f"mset {print_attrs(attrs)}of {print_domain(inner)}"
        case SequenceDomain(inner, attrs):
            return f"sequence {print_attrs(attrs)}of {print_domain(inner)}"
        case PartitionDomain(inner, attrs):
            return f"partition {print_attrs(attrs)}from {print_domain(inner)}"
        case FunctionDomain(source, target, attrs):
            return f"function {print_attrs(attrs)}{print_domain(source)} --> {print_domain(target)}"
        case RelationDomain(columns, attrs):
            if isinstance(columns, Meta):
                cols = f"&{columns.name}"
            else:
                cols = "(" + " * ".join(print_domain(c) for c in columns) + ")"
            return f"relation {print_attrs(attrs)}of {cols}"
    raise TypeError(f"not a domain: {d!r}")


def _level(e: Expr) -> int:
    match e:
        case Quant() | QuantIn():
            return 0
        case BinOp(op):
            return PRECEDENCE[op]
        case Neg() | Not():
            return UNARY
        case IntLit(v) if v < 0:
            return UNARY
    return ATOM


def _args(args) -> str:
    return ",".join(print_expr(a) for a in args)


def print_expr(e: Node, min_level: int = 0) -> str:
    """Print ``e``; parenthesize when it binds looser than ``min_level``."""
    text = _print(e)
    level = _level(e)
    if level < min_level or (level == 0 and min_level > 0):
        return f"({text})"
    return text


def _print(e: Node) -> str:
    match e:
        case IntLit(v):
            return str(v)
        case BoolLit(v):
            return "true" if v else "false"
        case Name(ident):
            return ident
        case Meta(name):
            return f"&{name}"
        case Wildcard():
            return "_"
        case Quant(kind, var, domain, body):
            return f"{kind} {var} : {print_domain(domain)} . {print_expr(body)}"
        case QuantIn(kind, var, coll, body):
            return f"{kind} {var} in {print_expr(coll, PRECEDENCE['+'])} . {print_expr(body)}"
        case BinOp(op, left, right):
            p = PRECEDENCE[op]
            lp = p if op in LEFT_ASSOC else p + 1
            rp = p if op in RIGHT_ASSOC else p + 1
            return f"{print_expr(left, lp)} {op} {print_expr(right, rp)}"
        case Neg(operand):
            return f"-{print_expr(operand, ATOM)}"
        case Not(operand):
            return f"!{print_expr(operand, ATOM)}"
        case Card(operand):
            return f"|{print_expr(operand)}|"
        case Freq(coll, value):
            return f"freq({print_expr(coll)}, {print_expr(value)})"
        case Apply(callee, args) | Project(callee, args):
            return f"{print_expr(callee, ATOM)}({_args(args)})"
        case SetLit(elems):
            return "{" + ", ".join(print_expr(x) for x in elems) + "}"
        case Parts(operand):
            return f"parts({print_expr(operand)})"
        case ToMSet(operand):
            return f"toMSet({print_expr(operand)})"
        case ToRelation(operand):
            return f"toRelation({print_expr(operand)})"
    if isinstance(e, Domain):
        return print_domain(e)
    raise TypeError(f"cannot print {e!r}")


def show(n: Node) -> str:
    """Print any node: domain, expression or whole specification."""
    if isinstance(n, Specification):
        return pretty_print(n)
    if isinstance(n, Domain):
        return print_domain(n)
    return print_expr(n)
