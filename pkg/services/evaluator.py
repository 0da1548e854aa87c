"""
Big-step interpreter.

One Evaluator owns the heap for a whole run. Frames are mutated in place
by Assign; every method activation gets its own Frame, so the caller's
frame never changes across a call.
"""
from __future__ import annotations

import logging
import sys
import threading
from typing import Callable, Dict, List, Optional, Tuple

from config import DEFAULT_MAX_DEPTH
from models import (
    AnyType,
    Assign,
    Call,
    Expr,
    FieldRead,
    FieldWrite,
    MethodDecl,
    New,
    Null,
    Seq,
    This,
    Var,
)
from schemas import InternalStuck, ShapesRuntimeError
from services import config_wf
from services.lookup_tables import ProgramIndex
from services.runtime_heap import (
    NONE_POOL,
    NULL,
    Frame,
    Heap,
    Location,
    ObjectAddr,
    PoolAddr,
    Value,
    render_value,
)
from services.typechecker import build_method_context

logger = logging.getLogger(__name__)

Tracer = Callable[[str, str], None]

# Python frames consumed per object-language call (eval, invoke, eval_body, nested eval)
_FRAMES_PER_CALL = 8
# C stack reserved per Python frame on the evaluation thread
_STACK_BYTES_PER_FRAME = 4096
_STACK_BASE = 16 * 1024 * 1024


def _recursion_budget(max_depth: int) -> int:
    return max_depth * _FRAMES_PER_CALL + 1000


def _stack_bytes(max_depth: int) -> int:
    wanted = _STACK_BASE + _recursion_budget(max_depth) * _STACK_BYTES_PER_FRAME
    return -(-wanted // 4096) * 4096


def run_on_deep_stack(fn: Callable[[], Value], max_depth: int) -> Value:
    """Run `fn` on a worker thread whose stack holds `max_depth` nested calls.

    The recursion limit then trips (and becomes R002) before the C stack
    runs out. Exceptions raised by `fn` are re-raised in the caller.
    """
    outcome: Dict[str, object] = {}

    def target() -> None:
        try:
            outcome["value"] = fn()
        except BaseException as exc:
            outcome["error"] = exc

    size = _stack_bytes(max_depth)
    try:
        previous = threading.stack_size(size)
    except (ValueError, RuntimeError):
        logger.warning(f"cannot reserve a {size} byte stack, evaluating on the current thread")
        return fn()
    worker = threading.Thread(target=target, name="shapes-eval", daemon=True)
    try:
        worker.start()
    except RuntimeError:
        logger.warning(f"cannot start a worker with a {size} byte stack, evaluating on the current thread")
        return fn()
    finally:
        threading.stack_size(previous)
    worker.join()
    if "error" in outcome:
        raise outcome["error"]  # type: ignore[misc]
    return outcome["value"]  # type: ignore[return-value]


class Evaluator:
    """Evaluates expressions of one program against one heap"""

    def __init__(
        self,
        index: ProgramIndex,
        heap: Optional[Heap] = None,
        *,
        max_depth: int = DEFAULT_MAX_DEPTH,
        tracer: Optional[Tracer] = None,
        check_invariants: bool = False,
    ):
        self.index = index
        self.heap = heap if heap is not None else Heap(index)
        self.max_depth = max_depth
        self.tracer = tracer
        self.check_invariants = check_invariants
        self.depth = 0
        self._contexts: List[Dict[str, AnyType]] = []
        self._frames: List[Frame] = []
        wanted = _recursion_budget(max_depth)
        if sys.getrecursionlimit() < wanted:
            sys.setrecursionlimit(wanted)

    # ---- hooks ----

    def _emit(self, rule: str, v: Value) -> Value:
        if self.tracer is not None:
            self.tracer(rule, render_value(v))
        if self.check_invariants and self._contexts:
            config_wf.check_configuration(self._contexts[-1], self.heap, self._frames[-1])
        return v

    def _receiver(self, frame: Frame, x: str, what: str) -> Value:
        v = frame.value(x)
        if v is NULL:
            raise ShapesRuntimeError.of("R001", f"null dereference: {what} on '{x}'")
        return v

    # ---- rules ----

    def eval(self, frame: Frame, e: Expr) -> Value:
        while isinstance(e, Seq):
            self.eval(frame, e.first)
            e = e.second

        if isinstance(e, Null):
            return self._emit("Value", NULL)

        if isinstance(e, Var):
            return self._emit("Variable", frame.value(e.name))

        if isinstance(e, This):
            return self._emit("Variable", frame.value("this"))

        if isinstance(e, Assign):
            targets: List[str] = []
            rhs: Expr = e
            while isinstance(rhs, Assign):
                targets.append(rhs.target)
                rhs = rhs.rhs
            v = self.eval(frame, rhs)
            for target in reversed(targets):
                frame[target] = v
                self._emit("Assignment", v)
            return v

        if isinstance(e, New):
            pools = tuple(frame.pool(y) for y in e.type.args)
            first = pools[0]
            if first is NONE_POOL:
                return self._emit("NewObject", self.heap.alloc_object(e.type.class_name, pools))
            assert isinstance(first, PoolAddr)
            pool = self.heap.pool_cell(first)
            if self.index.layout_class(pool.layout_name) != e.type.class_name or pool.ghost != pools:
                raise InternalStuck(f"pool@{first.id} cannot hold new {e.type.class_name}")
            n = self.heap.pool_append(first)
            return self._emit("NewPooledObject", Location(first, n))

        if isinstance(e, FieldRead):
            recv = self._receiver(frame, e.receiver, f"read of '{e.field}'")
            v = self.heap.load(recv, e.field)
            return self._emit("ObjectRead" if isinstance(recv, ObjectAddr) else "PooledObjectRead", v)

        if isinstance(e, FieldWrite):
            recv = self._receiver(frame, e.receiver, f"write of '{e.field}'")
            v = frame.value(e.source)
            self.heap.store(recv, e.field, v)
            return self._emit("ObjectWrite" if isinstance(recv, ObjectAddr) else "PooledObjectWrite", v)

        if isinstance(e, Call):
            return self._emit("MethodCall", self.eval_call(frame, e.receiver, e.method, e.arg))

        raise InternalStuck(f"no rule for {e!r}")

    def eval_call(self, frame: Frame, receiver: str, method: str, arg: str) -> Value:
        recv = self._receiver(frame, receiver, f"call of '{method}'")
        return self.invoke(recv, method, frame.value(arg))

    def invoke(self, receiver: Value, method: str, arg: Value) -> Value:
        """Method Call: build the callee frame from getThis and run the body."""
        if receiver is NULL:
            raise ShapesRuntimeError.of("R001", f"null dereference: call of '{method}'")
        if self.depth >= self.max_depth:
            raise ShapesRuntimeError.of("R002", f"call depth exceeded {self.max_depth}")
        class_name, ghost, this = self.heap.this_of(receiver)
        md = self.index.method_of(class_name, method)
        frame = Frame({"this": this, md.param_name: arg})
        for name, addr in zip(self.index.pool_params_of(class_name), ghost):
            frame[name] = addr
        self.depth += 1
        try:
            result = self.eval_body(frame, class_name, md)
        except RecursionError:
            raise ShapesRuntimeError.of("R002", f"call depth exceeded at depth {self.depth}") from None
        finally:
            self.depth -= 1
        if self.check_invariants:
            config_wf.check_result(self.heap, result, md.return_type, frame, f"{class_name}::{method}")
        return result

    def eval_body(self, frame: Frame, class_name: str, md: MethodDecl) -> Value:
        """Variable/Pool Declaration: reserve pools, bind locals, then build pools."""
        reserved = [self.heap.reserve_pool() for _ in md.pools]
        for v in md.locals:
            frame[v.name] = NULL
        for p, addr in zip(md.pools, reserved):
            frame[p.name] = addr
        for p, addr in zip(md.pools, reserved):
            pools = tuple(frame.pool(y) for y in p.type.args)
            self.heap.alloc_pool(p.type.layout_name, pools, addr)
        if not self.check_invariants:
            return self.eval(frame, md.body)
        cd = self.index.class_of(class_name)
        self._contexts.append(build_method_context(self.index, cd, md))
        self._frames.append(frame)
        try:
            return self.eval(frame, md.body)
        finally:
            self._contexts.pop()
            self._frames.pop()

    def run_entry(self, class_name: str, method: str) -> Value:
        """Entry protocol: all pool params none, receiver unpooled, argument null."""
        self.index.method_of(class_name, method)
        ghost = tuple(NONE_POOL for _ in self.index.pool_params_of(class_name))
        receiver = self.heap.alloc_object(class_name, ghost)
        logger.debug(f"entering {class_name}::{method} on {render_value(receiver)}")
        result = run_on_deep_stack(lambda: self.invoke(receiver, method, NULL), self.max_depth)
        if self.check_invariants:
            config_wf.check_configuration({}, self.heap)
        return result


def eval_expr(
    index: ProgramIndex, heap: Heap, frame: Frame, e: Expr, **options
) -> Tuple[Heap, Frame, Value]:
    """Evaluate one expression; the heap and frame are updated in place and returned."""
    v = Evaluator(index, heap, **options).eval(frame, e)
    return heap, frame, v


def run_entry(index: ProgramIndex, class_name: str, method: str, **options) -> Tuple[Heap, Value]:
    evaluator = Evaluator(index, **options)
    result = evaluator.run_entry(class_name, method)
    return evaluator.heap, result
