"""
Abstract syntax of SHAPES programs.

All nodes are frozen dataclasses; source positions ride along but are
excluded from equality so that structurally equal programs compare equal.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from schemas import InternalArityError

KEYWORDS = frozenset({
    "class", "layout", "rec", "pools", "locals", "def", "new", "null", "this", "none",
})

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def is_identifier(text: str) -> bool:
    return bool(IDENT_RE.match(text)) and text not in KEYWORDS


@dataclass(frozen=True)
class Pos:
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


def _pos() -> Optional[Pos]:
    return field(default=None, compare=False, repr=False)


class _NoneArg:
    """The `none` pool argument. A singleton, never a variable name."""

    _instance: Optional["_NoneArg"] = None

    def __new__(cls) -> "_NoneArg":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "none"

    def __reduce__(self):
        return (_NoneArg, ())


NONE = _NoneArg()

PoolArg = Union[_NoneArg, str]


# ==================== TYPES ====================

@dataclass(frozen=True)
class ClassType:
    class_name: str
    args: Tuple[PoolArg, ...]
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class PoolType:
    layout_name: str
    args: Tuple[PoolArg, ...]
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class PoolBound:
    class_name: str
    args: Tuple[PoolArg, ...]
    pos: Optional[Pos] = _pos()


AnyType = Union[ClassType, PoolType, PoolBound]


def head_name(ty: AnyType) -> str:
    return ty.layout_name if isinstance(ty, PoolType) else ty.class_name


# ==================== EXPRESSIONS ====================

@dataclass(frozen=True)
class Null:
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Var:
    name: str
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class This:
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class New:
    type: ClassType
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Call:
    receiver: str
    method: str
    arg: str
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class FieldRead:
    receiver: str
    field: str
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class FieldWrite:
    receiver: str
    field: str
    source: str
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Assign:
    target: str
    rhs: "Expr"
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Seq:
    first: "Expr"
    second: "Expr"
    pos: Optional[Pos] = _pos()


Expr = Union[Null, Var, This, New, Call, FieldRead, FieldWrite, Assign, Seq]


def seq_of(exprs: Sequence[Expr]) -> Expr:
    """Fold a nonempty statement list into a right-nested Seq chain."""
    if not exprs:
        raise ValueError("empty statement list")
    result = exprs[-1]
    for e in reversed(exprs[:-1]):
        result = Seq(e, result, pos=e.pos)
    return result


def flatten_seq(e: Expr) -> List[Expr]:
    items: List[Expr] = []
    while isinstance(e, Seq):
        items.extend(flatten_seq(e.first) if isinstance(e.first, Seq) else [e.first])
        e = e.second
    items.append(e)
    return items


# ==================== DECLARATIONS ====================

@dataclass(frozen=True)
class PoolParam:
    name: str
    bound: PoolBound
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class FieldDecl:
    name: str
    type: ClassType
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class LocalPool:
    name: str
    type: PoolType
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class LocalVar:
    name: str
    type: ClassType
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class MethodDecl:
    name: str
    param_name: str
    param_type: ClassType
    return_type: ClassType
    pools: Tuple[LocalPool, ...]
    locals: Tuple[LocalVar, ...]
    body: Expr
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class ClassDecl:
    name: str
    pool_params: Tuple[PoolParam, ...]
    fields: Tuple[FieldDecl, ...]
    methods: Tuple[MethodDecl, ...]
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class LayoutDecl:
    name: str
    class_name: str
    clusters: Tuple[Tuple[str, ...], ...]
    pos: Optional[Pos] = _pos()


@dataclass(frozen=True)
class Program:
    classes: Tuple[ClassDecl, ...] = ()
    layouts: Tuple[LayoutDecl, ...] = ()


# ==================== SUBSTITUTION ====================

def subst_pool_args(ty: AnyType, formals: Sequence[str], actuals: Sequence[PoolArg]) -> AnyType:
    """Replace each formal pool name in `ty` by the matching actual.

    `none` and names outside `formals` pass through unchanged; the head name
    and argument count never change.
    """
    if len(formals) != len(actuals):
        raise InternalArityError(
            f"substitution arity mismatch: {len(formals)} formals, {len(actuals)} actuals"
        )
    mapping = dict(zip(formals, actuals))
    return replace(ty, args=tuple(mapping.get(a, a) for a in ty.args))


def free_pool_vars(ty: AnyType) -> set:
    return {a for a in ty.args if a is not NONE}


# ==================== PRETTY PRINTING ====================

def pretty_arg(arg: PoolArg) -> str:
    return "none" if arg is NONE else arg


def pretty_args(args: Iterable[PoolArg]) -> str:
    return "<<" + ", ".join(pretty_arg(a) for a in args) + ">>"


def pretty_type(ty: AnyType) -> str:
    if isinstance(ty, PoolBound):
        return f"[{ty.class_name}{pretty_args(ty.args)}]"
    return f"{head_name(ty)}{pretty_args(ty.args)}"


def pretty_expr(e: Expr) -> str:
    return ";\n".join(_pretty_single(x) for x in flatten_seq(e))


def _pretty_single(e: Expr) -> str:
    if isinstance(e, Null):
        return "null"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, This):
        return "this"
    if isinstance(e, New):
        return f"new {pretty_type(e.type)}"
    if isinstance(e, Call):
        return f"{e.receiver}.{e.method}({e.arg})"
    if isinstance(e, FieldRead):
        return f"{e.receiver}.{e.field}"
    if isinstance(e, FieldWrite):
        return f"{e.receiver}.{e.field} = {e.source}"
    if isinstance(e, Assign):
        targets = []
        while isinstance(e, Assign):
            targets.append(f"{e.target} = ")
            e = e.rhs
        return "".join(targets) + _pretty_single(e)
    if isinstance(e, Seq):
        return pretty_expr(e)
    raise TypeError(f"not an expression: {e!r}")


def _pretty_method(md: MethodDecl, indent: str) -> List[str]:
    inner = indent + "    "
    lines = [
        f"{indent}def {md.name}({md.param_name}: {pretty_type(md.param_type)}): "
        f"{pretty_type(md.return_type)} {{",
        f"{inner}pools",
    ]
    lines += [f"{inner}    {p.name}: {pretty_type(p.type)}" for p in md.pools]
    lines.append(f"{inner}locals")
    lines += [f"{inner}    {v.name}: {pretty_type(v.type)}" for v in md.locals]
    lines.append(f"{inner};")
    body = flatten_seq(md.body)
    for i, stmt in enumerate(body):
        sep = ";" if i < len(body) - 1 else ""
        lines.append(f"{inner}{_pretty_single(stmt)}{sep}")
    lines.append(f"{indent}}}")
    return lines


def pretty_class(cd: ClassDecl) -> str:
    params = ", ".join(f"{p.name}: {pretty_type(p.bound)}" for p in cd.pool_params)
    lines = [f"class {cd.name}<<{params}>> {{"]
    lines += [f"    {f.name}: {pretty_type(f.type)};" for f in cd.fields]
    for md in cd.methods:
        lines += _pretty_method(md, "    ")
    lines.append("}")
    return "\n".join(lines)


def pretty_layout(ld: LayoutDecl) -> str:
    recs = " + ".join("rec {" + ", ".join(c) + "}" for c in ld.clusters)
    return f"layout {ld.name}: [{ld.class_name}] = {recs};"


def pretty_program(prog: Program) -> str:
    parts = [pretty_class(cd) for cd in prog.classes]
    parts += [pretty_layout(ld) for ld in prog.layouts]
    return "\n\n".join(parts) + ("\n" if parts else "")
