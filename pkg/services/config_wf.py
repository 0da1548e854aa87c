"""
Run-time well-formedness of configurations.

Strong agreement checks cells (object records, pool clusters, pooled
members); weak agreement checks a single value against a run-time type.
Every check has a reason-returning form (first failing condition, with a
path such as `pool@1[2].next`) and a boolean wrapper.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple, Union

from models import NONE, AnyType, ClassType, PoolBound, PoolType
from schemas import InternalStuck, InvariantViolation
from services.runtime_heap import (
    NONE_POOL,
    NULL,
    Frame,
    Heap,
    Location,
    ObjectAddr,
    PoolAddr,
    PoolRef,
    Value,
    render_value,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RtClass:
    class_name: str
    pools: Tuple[PoolRef, ...]


@dataclass(frozen=True)
class RtPool:
    layout_name: str
    pools: Tuple[PoolRef, ...]


@dataclass(frozen=True)
class RtBound:
    class_name: str
    pools: Tuple[PoolRef, ...]


RuntimeType = Union[RtClass, RtPool, RtBound]


def _show(tau: RuntimeType) -> str:
    args = ", ".join(render_value(p) for p in tau.pools)
    if isinstance(tau, RtBound):
        return f"[{tau.class_name}<{args}>]"
    head = tau.layout_name if isinstance(tau, RtPool) else tau.class_name
    return f"{head}<{args}>"


def runtime_type(ty: AnyType, pools: Mapping[str, PoolRef]) -> RuntimeType:
    """Replace the pool variables of a static type by pool addresses."""
    resolved = tuple(NONE_POOL if a is NONE else pools[a] for a in ty.args)
    if isinstance(ty, PoolType):
        return RtPool(ty.layout_name, resolved)
    if isinstance(ty, PoolBound):
        return RtBound(ty.class_name, resolved)
    return RtClass(ty.class_name, resolved)


def resolve_in_frame(ty: AnyType, frame: Frame) -> RuntimeType:
    return runtime_type(ty, {a: frame.pool(a) for a in ty.args if a is not NONE})


def _class_pools(heap: Heap, class_name: str, ghost: Tuple[PoolRef, ...]) -> Dict[str, PoolRef]:
    return dict(zip(heap.index.pool_params_of(class_name), ghost))


# ==================== WEAK AGREEMENT ====================

def weak_reason(heap: Heap, v: Union[Value, PoolRef], tau: RuntimeType) -> Optional[str]:
    """Why `v` does not weakly agree with `tau`, or None when it does."""
    if isinstance(tau, RtClass):
        if v is NULL:
            return None
        if isinstance(v, ObjectAddr):
            if not heap.has_object(v):
                return f"{render_value(v)} is not allocated"
            cell = heap.object_cell(v)
            if cell.class_name != tau.class_name or cell.ghost != tau.pools:
                return f"{render_value(v)} is {cell.class_name}<{', '.join(map(render_value, cell.ghost))}>, expected {_show(tau)}"
            if tau.pools[0] is not NONE_POOL:
                return f"{render_value(v)} is unpooled but {_show(tau)} names a pool"
            return None
        if isinstance(v, Location):
            if not heap.has_pool(v.pool):
                return f"{render_value(v)} points into an unallocated pool"
            pool = heap.pool_cell(v.pool)
            cls = heap.index.layout_class(pool.layout_name)
            if cls != tau.class_name or pool.ghost != tau.pools:
                return f"{render_value(v)} lives in a {pool.layout_name} pool of {cls}, expected {_show(tau)}"
            if tau.pools[0] != v.pool:
                return f"{render_value(v)} is not in pool {render_value(tau.pools[0])}"
            if v.index >= pool.size:
                return f"{render_value(v)} is past the end of {render_value(v.pool)} (size {pool.size})"
            return None
        return f"{render_value(v)} is not an object value, expected {_show(tau)}"

    if isinstance(tau, RtPool):
        if not isinstance(v, PoolAddr):
            return f"{render_value(v)} is not a pool, expected {_show(tau)}"
        first = tau.pools[0]
        if first != v or not heap.has_pool(v):
            return f"{render_value(v)} is not the first pool of {_show(tau)}"
        pool = heap.pool_cell(v)
        if pool.layout_name != tau.layout_name or pool.ghost != tau.pools:
            return f"{render_value(v)} is {pool.layout_name}{'<' + ', '.join(map(render_value, pool.ghost)) + '>'}, expected {_show(tau)}"
        return None

    if v is NONE_POOL:
        return None
    if not isinstance(v, PoolAddr) or not heap.has_pool(v):
        return f"{render_value(v)} is not a pool, expected {_show(tau)}"
    pool = heap.pool_cell(v)
    cls = heap.index.layout_class(pool.layout_name)
    if cls != tau.class_name or pool.ghost != tau.pools:
        return f"{render_value(v)} stores {cls}<{', '.join(map(render_value, pool.ghost))}>, expected {_show(tau)}"
    if tau.pools[0] != v:
        return f"{render_value(v)} is not the first pool of {_show(tau)}"
    return None


def weak_agree(heap: Heap, v: Union[Value, PoolRef], tau: RuntimeType) -> bool:
    return weak_reason(heap, v, tau) is None


# ==================== STRONG AGREEMENT ====================

def _ghost_reason(heap: Heap, class_name: str, ghost: Tuple[PoolRef, ...], where: str) -> Optional[str]:
    formals = heap.index.pool_params_of(class_name)
    if len(formals) != len(ghost):
        return f"{where}: {len(ghost)} pool parameter(s), {class_name} expects {len(formals)}"
    pools = dict(zip(formals, ghost))
    for formal, actual in zip(formals, ghost):
        bound = runtime_type(heap.index.bound_of(class_name, formal), pools)
        reason = weak_reason(heap, actual, bound)
        if reason:
            return f"{where}<{formal}>: {reason}"
    return None


def _fields_reason(heap: Heap, class_name: str, ghost: Tuple[PoolRef, ...], member: Value, where: str) -> Optional[str]:
    pools = _class_pools(heap, class_name, ghost)
    for f in heap.index.fields_of(class_name):
        expected = runtime_type(heap.index.field_type_of(class_name, f), pools)
        reason = weak_reason(heap, heap.load(member, f), expected)
        if reason:
            return f"{where}.{f}: {reason}"
    return None


def object_reason(heap: Heap, addr: ObjectAddr, tau: RtClass) -> Optional[str]:
    where = render_value(addr)
    if not heap.has_object(addr):
        return f"{where} is not allocated"
    cell = heap.object_cell(addr)
    if cell.class_name != tau.class_name or cell.ghost != tau.pools:
        return f"{where}: cell is {cell.class_name}, expected {_show(tau)}"
    if not cell.ghost or cell.ghost[0] is not NONE_POOL:
        return f"{where}: unpooled object must live in none"
    if len(cell.record) != len(heap.index.fields_of(cell.class_name)):
        return f"{where}: record has {len(cell.record)} slot(s)"
    return _ghost_reason(heap, cell.class_name, cell.ghost, where) or _fields_reason(
        heap, cell.class_name, cell.ghost, addr, where
    )


def member_reason(heap: Heap, loc: Location, tau: RtClass) -> Optional[str]:
    where = f"{render_value(loc.pool)}[{loc.index}]"
    if not heap.has_pool(loc.pool):
        return f"{where}: pool not allocated"
    pool = heap.pool_cell(loc.pool)
    if pool.ghost != tau.pools or pool.ghost[0] != loc.pool:
        return f"{where}: pool parameters do not match {_show(tau)}"
    if heap.index.layout_class(pool.layout_name) != tau.class_name:
        return f"{where}: layout {pool.layout_name} does not store {tau.class_name}"
    if loc.index >= pool.size:
        return f"{where}: index past the end (size {pool.size})"
    return _fields_reason(heap, tau.class_name, tau.pools, loc, where)


def pool_reason(heap: Heap, addr: PoolAddr, tau: RtPool) -> Optional[str]:
    where = render_value(addr)
    if not heap.has_pool(addr):
        return f"{where}: pool not allocated"
    pool = heap.pool_cell(addr)
    if pool.layout_name != tau.layout_name or pool.ghost != tau.pools:
        return f"{where}: cell is {pool.layout_name}, expected {_show(tau)}"
    if not pool.ghost or pool.ghost[0] != addr:
        return f"{where}: first pool parameter must be the pool itself"
    cls = heap.index.layout_class(pool.layout_name)
    reason = _ghost_reason(heap, cls, pool.ghost, where)
    if reason:
        return reason
    widths = heap.index.cluster_widths(pool.layout_name)
    if len(pool.clusters) != len(widths):
        return f"{where}: {len(pool.clusters)} cluster(s), layout has {len(widths)}"
    lengths = {len(c) for c in pool.clusters}
    if len(lengths) > 1:
        return f"{where}: cluster lengths differ {[len(c) for c in pool.clusters]}"
    for i, (cluster, width) in enumerate(zip(pool.clusters, widths)):
        for n, record in enumerate(cluster):
            if len(record) != width:
                return f"{where}[{n}]: record in cluster {i} has {len(record)} slot(s), expected {width}"
    member = RtClass(cls, pool.ghost)
    for n in range(pool.size):
        reason = member_reason(heap, Location(addr, n), member)
        if reason:
            return reason
    return None


def agreement_reason(heap: Heap, address: Union[ObjectAddr, PoolAddr, Location], tau: RuntimeType) -> Optional[str]:
    if isinstance(address, ObjectAddr) and isinstance(tau, RtClass):
        return object_reason(heap, address, tau)
    if isinstance(address, PoolAddr) and isinstance(tau, RtPool):
        return pool_reason(heap, address, tau)
    if isinstance(address, Location) and isinstance(tau, RtClass):
        return member_reason(heap, address, tau)
    return f"{render_value(address)} cannot have type {_show(tau)}"


def agrees(heap: Heap, address: Union[ObjectAddr, PoolAddr, Location], tau: RuntimeType) -> bool:
    return agreement_reason(heap, address, tau) is None


# ==================== HEAP AND FRAME ====================

def explain_heap(heap: Heap) -> List[str]:
    """Every cell that fails strong agreement against its own stored type."""
    problems = []
    for addr, cell in heap.iter_objects():
        reason = object_reason(heap, addr, RtClass(cell.class_name, cell.ghost))
        if reason:
            problems.append(reason)
    for k, maybe in enumerate(heap.pools):
        if maybe is None:
            problems.append(f"pool@{k}: reserved but never allocated")
            continue
        reason = pool_reason(heap, PoolAddr(k), RtPool(maybe.layout_name, maybe.ghost))
        if reason:
            problems.append(reason)
    return problems


def heap_reason(heap: Heap) -> Optional[str]:
    problems = explain_heap(heap)
    return problems[0] if problems else None


def wf_heap(heap: Heap) -> bool:
    return heap_reason(heap) is None


def frame_reason(ctx: Mapping[str, AnyType], heap: Heap, frame: Frame) -> Optional[str]:
    names = set(frame.names())
    if names != set(ctx):
        missing = sorted(set(ctx) - names)
        extra = sorted(names - set(ctx))
        return f"frame domain differs from context (missing {missing}, extra {extra})"
    for x, ty in ctx.items():
        try:
            tau = resolve_in_frame(ty, frame)
        except InternalStuck as exc:
            return f"{x}: cannot resolve {ty!r}: {exc}"
        reason = weak_reason(heap, frame[x], tau)
        if reason:
            return f"{x}: {reason}"
    return None


def wf_frame(ctx: Mapping[str, AnyType], heap: Heap, frame: Frame) -> bool:
    return frame_reason(ctx, heap, frame) is None


def check_configuration(ctx: Mapping[str, AnyType], heap: Heap, frame: Optional[Frame] = None) -> None:
    """Raise InvariantViolation unless the heap (and frame, when given) are well-formed."""
    reason = heap_reason(heap)
    if reason is None and frame is not None:
        reason = frame_reason(ctx, heap, frame)
    if reason is not None:
        logger.error(f"configuration check failed: {reason}")
        raise InvariantViolation(f"invariant violation: {reason}")


def check_result(heap: Heap, v: Value, ty: ClassType, frame: Frame, where: str) -> None:
    reason = weak_reason(heap, v, resolve_in_frame(ty, frame))
    if reason is not None:
        raise InvariantViolation(f"invariant violation: result of {where}: {reason}")


# ==================== ISOMORPHISM ====================

def heap_iso(heap_a: Heap, root_a: Value, heap_b: Heap, root_b: Value) -> bool:
    """Structural equality of the object graphs reachable from two roots.

    Objects are matched by class and by field values in declaration order,
    read through each heap's own storage; pool structure and ghost pool
    parameters are ignored.
    """
    forward: Dict[Value, Value] = {}
    backward: Dict[Value, Value] = {}
    queue = deque([(root_a, root_b)])
    while queue:
        a, b = queue.popleft()
        if a is NULL or b is NULL:
            if a is not b:
                return False
            continue
        if forward.get(a, b) != b or backward.get(b, a) != a:
            return False
        if a in forward:
            continue
        forward[a] = b
        backward[b] = a
        try:
            cls_a = heap_a.class_of_value(a)
            cls_b = heap_b.class_of_value(b)
        except InternalStuck:
            return False
        if cls_a != cls_b:
            return False
        fields_a = heap_a.index.fields_of(cls_a)
        if fields_a != heap_b.index.fields_of(cls_b):
            return False
        for f in fields_a:
            queue.append((heap_a.load(a, f), heap_b.load(b, f)))
    return True
