"""
Well-formedness of types, bounds, contexts, layouts, classes and programs.

Check order per program: name uniqueness, layouts, class headers, field
types, method bodies. The first failure of each declaration is reported
and checking continues with the next declaration.
"""
from __future__ import annotations

import logging
from collections import Counter
from typing import Dict, List, Optional

from models import (
    NONE,
    AnyType,
    ClassDecl,
    ClassType,
    LayoutDecl,
    PoolBound,
    PoolType,
    Pos,
    Program,
    pretty_arg,
    pretty_type,
    subst_pool_args,
)
from schemas import Diagnostic, StaticError, diagnostic
from services.lookup_tables import ProgramIndex

logger = logging.getLogger(__name__)


def wf_bound(
    index: ProgramIndex,
    ctx: Dict[str, AnyType],
    bound: PoolBound,
    *,
    pos: Optional[Pos] = None,
    _visiting: Optional[set] = None,
) -> Optional[Diagnostic]:
    """Γ ⊢ [C<ȳ′>].

    Checked coinductively: a bound met again while it is still being
    examined is assumed to hold. The None bound rule re-enters this check,
    so [C<none, none>] would otherwise never terminate.
    """
    from services.typechecker import type_of_pool

    pos = pos or bound.pos
    key = (bound.class_name, bound.args)
    visiting = set() if _visiting is None else _visiting
    if key in visiting:
        return None
    try:
        formals = index.pool_params_of(bound.class_name, pos)
    except StaticError as exc:
        return exc.diagnostic
    if len(formals) != len(bound.args):
        return diagnostic(
            "E210",
            f"{pretty_type(bound)} has {len(bound.args)} pool argument(s), "
            f"class '{bound.class_name}' expects {len(formals)}",
            pos,
        )
    visiting.add(key)
    try:
        for i, (formal, actual) in enumerate(zip(formals, bound.args)):
            expected = subst_pool_args(index.bound_of(bound.class_name, formal), formals, bound.args)
            problem = type_of_pool(index, ctx, actual, expected, pos=pos, _visiting=visiting)
            if problem is None:
                continue
            if problem.code in ("E100", "E210"):
                return problem
            return diagnostic(
                "E210",
                f"ill-formed {pretty_type(bound)}: argument {i + 1} "
                f"('{pretty_arg(actual)}') does not satisfy {pretty_type(expected)}: {problem.message}",
                pos,
            )
    finally:
        visiting.discard(key)
    return None


def wf_class_type(index: ProgramIndex, ctx: Dict[str, AnyType], t: ClassType, *, pos: Optional[Pos] = None) -> Optional[Diagnostic]:
    return wf_bound(index, ctx, PoolBound(t.class_name, t.args, pos=t.pos), pos=pos or t.pos)


def wf_pool_type(index: ProgramIndex, ctx: Dict[str, AnyType], pt: PoolType, *, pos: Optional[Pos] = None) -> Optional[Diagnostic]:
    pos = pos or pt.pos
    try:
        cls = index.layout_class(pt.layout_name, pos)
    except StaticError as exc:
        return exc.diagnostic
    return wf_bound(index, ctx, PoolBound(cls, pt.args, pos=pt.pos), pos=pos)


def wf_type(index: ProgramIndex, ctx: Dict[str, AnyType], ty: AnyType, *, pos: Optional[Pos] = None) -> Optional[Diagnostic]:
    if isinstance(ty, PoolType):
        return wf_pool_type(index, ctx, ty, pos=pos)
    if isinstance(ty, PoolBound):
        return wf_bound(index, ctx, ty, pos=pos)
    return wf_class_type(index, ctx, ty, pos=pos)


def wf_context(index: ProgramIndex, ctx: Dict[str, AnyType]) -> Optional[Diagnostic]:
    """⊢ Γ: every entry well-formed, and every pool's first argument is itself."""
    for name, ty in ctx.items():
        problem = wf_type(index, ctx, ty)
        if problem:
            return problem
        if not isinstance(ty, ClassType) and ty.args[0] != name:
            return diagnostic(
                "E210",
                f"pool '{name}' has type {pretty_type(ty)}; its first pool argument must be '{name}'",
                ty.pos,
            )
    return None


def wf_layout_decl(index: ProgramIndex, ld: LayoutDecl) -> Optional[Diagnostic]:
    """The clusters' fields are exactly the class's fields, each once."""
    try:
        fields = index.fields_of(ld.class_name, ld.pos)
    except StaticError as exc:
        return exc.diagnostic
    declared = set(fields)
    counts = Counter(f for cluster in ld.clusters for f in cluster)
    for cluster in ld.clusters:
        for f in cluster:
            if f not in declared:
                return diagnostic("E100", f"layout '{ld.name}': class '{ld.class_name}' has no field '{f}'", ld.pos)
            if counts[f] > 1:
                return diagnostic("E220", f"layout '{ld.name}' repeats field '{f}'", ld.pos)
    for f in fields:
        if f not in counts:
            return diagnostic("E221", f"layout '{ld.name}' is missing field '{f}'", ld.pos)
    return None


def _class_header_problem(index: ProgramIndex, cd: ClassDecl) -> Optional[Diagnostic]:
    from services.typechecker import check_pool_scope

    params = [p.name for p in cd.pool_params]
    seen = set()
    for p in cd.pool_params:
        if p.name in seen:
            return diagnostic("E230", f"class '{cd.name}' declares pool parameter '{p.name}' twice", p.pos)
        seen.add(p.name)
    first = cd.pool_params[0].bound
    if first.class_name != cd.name or first.args != tuple(params):
        expected = PoolBound(cd.name, tuple(params))
        return diagnostic(
            "E230",
            f"first pool parameter of '{cd.name}' must be bounded by {pretty_type(expected)}, "
            f"found {pretty_type(first)}",
            first.pos or cd.pos,
        )
    for p in cd.pool_params:
        if NONE in p.bound.args:
            return diagnostic("E230", f"'none' may not appear in the bound of pool parameter '{p.name}'", p.pos)
        problem = check_pool_scope(p.bound.args, params, p.pos, f"bound of '{p.name}'")
        if problem:
            return problem
    members = set()
    for f in cd.fields:
        if f.name in members:
            return diagnostic("E230", f"class '{cd.name}' declares field '{f.name}' twice", f.pos)
        members.add(f.name)
        problem = check_pool_scope(f.type.args, params, f.pos, f"field '{f.name}'")
        if problem:
            return problem
    methods = set()
    for md in cd.methods:
        if md.name in methods:
            return diagnostic("E230", f"class '{cd.name}' declares method '{md.name}' twice", md.pos)
        methods.add(md.name)
    return None


def wf_class_decl(index: ProgramIndex, cd: ClassDecl) -> List[Diagnostic]:
    """Header, context, field types, then each method; one diagnostic per failing part."""
    from services.typechecker import check_method_decl, method_header_problem

    problem = _class_header_problem(index, cd)
    if problem:
        return [problem]
    ctx: Dict[str, AnyType] = {p.name: p.bound for p in cd.pool_params}
    problem = wf_context(index, ctx)
    if problem:
        return [problem]
    for f in cd.fields:
        problem = wf_class_type(index, ctx, f.type)
        if problem:
            return [problem]
    diags: List[Diagnostic] = []
    for md in cd.methods:
        problem = (
            method_header_problem(cd, md)
            or wf_class_type(index, ctx, md.param_type)
            or wf_class_type(index, ctx, md.return_type)
        )
        if problem is None:
            problem = check_method_decl(index, cd, md)
        if problem:
            diags.append(problem)
    return diags


def wf_program(index: ProgramIndex) -> List[Diagnostic]:
    """All diagnostics for the program, in source order (empty when well-formed)."""
    prog: Program = index.program
    diags: List[Diagnostic] = []
    seen: Dict[str, str] = {}
    for decl in list(prog.classes) + list(prog.layouts):
        kind = "class" if isinstance(decl, ClassDecl) else "layout"
        key = f"{kind}:{decl.name}"
        if key in seen:
            diags.append(diagnostic("E101", f"duplicate {kind} name '{decl.name}'", decl.pos))
        seen[key] = decl.name
    for ld in prog.layouts:
        problem = wf_layout_decl(index, ld)
        if problem:
            diags.append(problem)
    for cd in prog.classes:
        diags.extend(wf_class_decl(index, cd))
    diags.sort(key=Diagnostic.sort_key)
    logger.debug(f"wf_program: {len(diags)} diagnostic(s)")
    return diags
