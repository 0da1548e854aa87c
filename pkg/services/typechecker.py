"""
Expression typing and the pool-variable judgements.

Null is handled bidirectionally: it has no synthesized type (E201) but
checks against any well-formed expected class type. Type equality is
syntactic after substitution; there is no subtyping.
"""
from __future__ import annotations

import logging
from typing import Dict, Iterable, List, Optional, Tuple, Union

from models import (
    NONE,
    AnyType,
    Assign,
    Call,
    ClassDecl,
    ClassType,
    Expr,
    FieldRead,
    FieldWrite,
    MethodDecl,
    New,
    Null,
    PoolArg,
    PoolBound,
    PoolType,
    Pos,
    Seq,
    This,
    Var,
    pretty_arg,
    pretty_type,
    subst_pool_args,
)
from schemas import Diagnostic, StaticError, diagnostic
from services import static_wf
from services.lookup_tables import ProgramIndex

logger = logging.getLogger(__name__)

TypingContext = Dict[str, AnyType]


def type_of_pool(
    index: ProgramIndex,
    ctx: TypingContext,
    y: PoolArg,
    expected: PoolBound,
    *,
    pos: Optional[Pos] = None,
    _visiting: Optional[set] = None,
) -> Optional[Diagnostic]:
    """Γ ⊢ y : expected, by the None bound, Pool Variable or Pool bound rule."""
    if y is NONE:
        return static_wf.wf_bound(index, ctx, expected, pos=pos, _visiting=_visiting)
    ty = ctx.get(y)
    if ty is None:
        return diagnostic("E100", f"unknown pool variable '{y}'", pos)
    if isinstance(ty, PoolBound):
        if ty == expected:
            return None
        return diagnostic(
            "E200",
            f"pool '{y}' has bound {pretty_type(ty)}, expected {pretty_type(expected)}",
            pos,
        )
    if isinstance(ty, PoolType):
        try:
            stored = index.layout_class(ty.layout_name, pos)
        except StaticError as exc:
            return exc.diagnostic
        if stored == expected.class_name and ty.args == expected.args:
            return None
        return diagnostic(
            "E200",
            f"pool '{y}' of type {pretty_type(ty)} is bounded by "
            f"{pretty_type(PoolBound(stored, ty.args))}, expected {pretty_type(expected)}",
            pos,
        )
    return diagnostic("E200", f"'{y}' is an object variable, not a pool", pos)


def check_pool_scope(args: Iterable[PoolArg], allowed: Iterable[str], pos: Optional[Pos], where: str) -> Optional[Diagnostic]:
    """Pool arguments must be `none` or one of the names in scope."""
    allowed = set(allowed)
    for a in args:
        if a is not NONE and a not in allowed:
            return diagnostic("E230", f"pool argument '{pretty_arg(a)}' in {where} is not a pool in scope", pos)
    return None


class ExpressionChecker:
    """Typing judgement for expressions under one context Γ"""

    def __init__(self, index: ProgramIndex, ctx: TypingContext):
        self.index = index
        self.ctx = ctx

    def _lookup(self, name: str, pos: Optional[Pos]) -> AnyType:
        try:
            return self.ctx[name]
        except KeyError:
            raise StaticError.of("E100", f"unknown variable '{name}'", pos) from None

    def _object_type(self, name: str, pos: Optional[Pos]) -> ClassType:
        ty = self._lookup(name, pos)
        if not isinstance(ty, ClassType):
            raise StaticError.of("E200", f"'{name}' is a pool, not an object variable", pos)
        return ty

    def _instantiate(self, ty: ClassType, receiver: ClassType) -> ClassType:
        formals = self.index.pool_params_of(receiver.class_name)
        if len(formals) != len(receiver.args):
            raise StaticError.of("E210", f"ill-formed receiver type {pretty_type(receiver)}", receiver.pos)
        return subst_pool_args(ty, formals, receiver.args)

    def _expect_equal(self, actual: ClassType, expected: ClassType, what: str, pos: Optional[Pos]) -> None:
        if actual != expected:
            raise StaticError.of(
                "E200",
                f"{what} has type {pretty_type(actual)}, expected {pretty_type(expected)}",
                pos,
            )

    def synth(self, e: Expr) -> ClassType:
        while isinstance(e, Seq):
            self.synth(e.first)
            e = e.second
        if isinstance(e, Null):
            raise StaticError.of("E201", "cannot infer type of null", e.pos)
        if isinstance(e, Var):
            return self._object_type(e.name, e.pos)
        if isinstance(e, This):
            return self._object_type("this", e.pos)
        if isinstance(e, New):
            return self._new(e)
        if isinstance(e, FieldRead):
            recv = self._object_type(e.receiver, e.pos)
            declared = self.index.field_type_of(recv.class_name, e.field, e.pos)
            return self._instantiate(declared, recv)
        if isinstance(e, FieldWrite):
            recv = self._object_type(e.receiver, e.pos)
            declared = self.index.field_type_of(recv.class_name, e.field, e.pos)
            expected = self._instantiate(declared, recv)
            source = self._object_type(e.source, e.pos)
            self._expect_equal(source, expected, f"'{e.source}'", e.pos)
            return expected
        if isinstance(e, Call):
            recv = self._object_type(e.receiver, e.pos)
            md = self.index.method_of(recv.class_name, e.method, e.pos)
            param = self._instantiate(md.param_type, recv)
            arg = self._object_type(e.arg, e.pos)
            self._expect_equal(arg, param, f"argument '{e.arg}'", e.pos)
            return self._instantiate(md.return_type, recv)
        if isinstance(e, Assign):
            return self._assign_chain(e)
        raise TypeError(f"not an expression: {e!r}")

    def _assign_chain(self, e: Assign) -> ClassType:
        """`x = y = ... = e`, checked innermost first without recursing per target."""
        chain: List[Tuple[ClassType, Assign]] = []
        rhs: Expr = e
        while isinstance(rhs, Assign):
            chain.append((self._object_type(rhs.target, rhs.pos), rhs))
            rhs = rhs.rhs
        self.check(rhs, chain[-1][0])
        for (outer, _), (inner, node) in zip(reversed(chain[:-1]), reversed(chain[1:])):
            self._expect_equal(inner, outer, "expression", node.pos)
        return chain[0][0]

    def _new(self, e: New) -> ClassType:
        pools = [n for n, t in self.ctx.items() if not isinstance(t, ClassType)]
        problem = check_pool_scope(e.type.args, pools, e.pos, f"new {pretty_type(e.type)}")
        if problem is None:
            problem = static_wf.wf_class_type(self.index, self.ctx, e.type, pos=e.pos)
        if problem is not None:
            raise StaticError(problem)
        return e.type

    def check(self, e: Expr, expected: ClassType) -> None:
        while isinstance(e, Seq):
            self.synth(e.first)
            e = e.second
        if isinstance(e, Null):
            problem = static_wf.wf_class_type(self.index, self.ctx, expected, pos=e.pos)
            if problem is not None:
                raise StaticError(problem)
            return
        self._expect_equal(self.synth(e), expected, "expression", e.pos)


def type_of_expr(index: ProgramIndex, ctx: TypingContext, e: Expr) -> Union[ClassType, Diagnostic]:
    try:
        return ExpressionChecker(index, ctx).synth(e)
    except StaticError as exc:
        return exc.diagnostic


def build_method_context(index: ProgramIndex, cd: ClassDecl, md: MethodDecl) -> TypingContext:
    """Γ′: class pool bounds, this, the parameter, local pools, locals."""
    params = tuple(p.name for p in cd.pool_params)
    ctx: TypingContext = {p.name: p.bound for p in cd.pool_params}
    ctx["this"] = ClassType(cd.name, params, pos=cd.pos)
    ctx[md.param_name] = md.param_type
    for p in md.pools:
        ctx[p.name] = p.type
    for v in md.locals:
        ctx[v.name] = v.type
    return ctx


def method_header_problem(cd: ClassDecl, md: MethodDecl) -> Optional[Diagnostic]:
    """Name clashes and pool scoping inside one method declaration (E230)."""
    seen = {p.name for p in cd.pool_params} | {"this"}
    names = [(md.param_name, md.pos)]
    names += [(p.name, p.pos) for p in md.pools]
    names += [(v.name, v.pos) for v in md.locals]
    for name, pos in names:
        if name in seen:
            return diagnostic("E230", f"name '{name}' declared twice in method '{md.name}'", pos)
        seen.add(name)

    class_pools = [p.name for p in cd.pool_params]
    for ty, where in ((md.param_type, "parameter type"), (md.return_type, "return type")):
        problem = check_pool_scope(ty.args, class_pools, ty.pos or md.pos, where)
        if problem:
            return problem
    method_pools = class_pools + [p.name for p in md.pools]
    for p in md.pools:
        problem = check_pool_scope(p.type.args, method_pools, p.pos, f"pool '{p.name}'")
        if problem:
            return problem
    for v in md.locals:
        problem = check_pool_scope(v.type.args, method_pools, v.pos, f"local '{v.name}'")
        if problem:
            return problem
    return None


def check_method_body(index: ProgramIndex, class_name: str, method_name: str) -> Optional[Diagnostic]:
    try:
        cd = index.class_of(class_name)
        md = index.method_of(class_name, method_name)
    except StaticError as exc:
        return exc.diagnostic
    return check_method_decl(index, cd, md)


def check_method_decl(index: ProgramIndex, cd: ClassDecl, md: MethodDecl) -> Optional[Diagnostic]:
    """Same as check_method_body, for a declaration already in hand."""
    problem = method_header_problem(cd, md)
    if problem:
        return problem
    ctx = build_method_context(index, cd, md)
    problem = static_wf.wf_context(index, ctx)
    if problem:
        return problem
    try:
        ExpressionChecker(index, ctx).check(md.body, md.return_type)
    except StaticError as exc:
        return exc.diagnostic
    logger.debug(f"checked {cd.name}::{md.name}")
    return None
