"""
Traversal microbenchmark: pooled list vs. unpooled list.

The calculus has no loops or integers, so the programs are generated per
element count. `growK` and `stepK` cover 10**K elements by calling the
level below ten times; `build` and `walk` combine levels by the decimal
digits of n. Call depth stays at the number of digits.

Timings are informational. Interpreter overhead dominates any cache
effect the pooled layout might have.
"""
from __future__ import annotations

import logging
import time
from typing import List

from schemas import BenchReport, BenchTiming
from services.evaluator import Evaluator
from services.frontend import compile_source
from services.runtime_heap import NULL, Value, render_value

logger = logging.getLogger(__name__)

FANOUT = 10


def _method(name: str, body: List[str], local_decls: str = "") -> List[str]:
    stmts = ";\n            ".join(body)
    return [
        f"    def {name}(c: Node<<p>>): Node<<p>> {{",
        "        pools",
        f"        locals {local_decls}",
        "        ;",
        f"            {stmts}",
        "    }",
    ]


def _levels(n: int) -> int:
    return max(1, len(str(n)))


def _combine(n: int, prefix: str) -> List[str]:
    body = []
    for k, digit in enumerate(reversed(str(n))):
        body = [f"c = this.{prefix}{k}(c)"] * int(digit) + body
    return body + ["c"]


def node_class(n: int) -> str:
    lines = ["class Node<<p: [Node<<p>>]>> {", "    next: Node<<p>>;"]
    lines += _method("grow0", ["t = new Node<<p>>", "t.next = c", "t"], "t: Node<<p>>")
    lines += _method("step0", ["c.next"])
    for k in range(1, _levels(n)):
        lines += _method(f"grow{k}", [f"c = this.grow{k - 1}(c)"] * FANOUT + ["c"])
        lines += _method(f"step{k}", [f"c = this.step{k - 1}(c)"] * FANOUT + ["c"])
    lines += _method("build", _combine(n, "grow"))
    lines += _method("walk", _combine(n, "step"))
    lines.append("}")
    return "\n".join(lines)


def bench_source(n: int, pooled: bool) -> str:
    """Program whose `Main::main` builds an n-element list and walks it."""
    if n < 1:
        raise ValueError(f"element count must be at least 1, got {n}")
    pool = "p" if pooled else "none"
    pools = "        p: NodeL<<p>>" if pooled else ""
    return "\n".join([
        node_class(n),
        "",
        "layout NodeL: [Node] = rec {next};",
        "",
        "class Main<<m: [Main<<m>>]>> {",
        "    def main(x: Main<<m>>): Main<<m>> {",
        "        pools",
        pools,
        f"        locals head: Node<<{pool}>> list: Node<<{pool}>> end: Node<<{pool}>>",
        "        ;",
        f"        head = new Node<<{pool}>>;",
        "        list = head.build(end);",
        "        end = head.walk(list);",
        "        this",
        "    }",
        "}",
        "",
    ])


class TimingEvaluator(Evaluator):
    """Evaluator that records wall time spent inside `walk` activations"""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.walk_seconds = 0.0

    def invoke(self, receiver: Value, method: str, arg: Value) -> Value:
        if method != "walk":
            return super().invoke(receiver, method, arg)
        start = time.perf_counter()
        try:
            return super().invoke(receiver, method, arg)
        finally:
            self.walk_seconds += time.perf_counter() - start


def time_traversal(n: int, pooled: bool) -> BenchTiming:
    index = compile_source(bench_source(n, pooled), f"<bench {'pooled' if pooled else 'unpooled'} n={n}>")
    evaluator = TimingEvaluator(index)
    result = evaluator.run_entry("Main", "main")
    if result is NULL:
        raise RuntimeError("benchmark program returned null")
    label = "pooled" if pooled else "unpooled"
    logger.debug(f"{label}: n={n} result={render_value(result)} heap cells={len(evaluator.heap)}")
    return BenchTiming(label=label, n=n, seconds=evaluator.walk_seconds)


def bench_traversal(n: int) -> BenchReport:
    """Time a full traversal of an n-element pooled and unpooled list."""
    report = BenchReport(pooled=time_traversal(n, True), unpooled=time_traversal(n, False))
    logger.info(f"bench n={n}: pooled {report.pooled.seconds:.6f}s, unpooled {report.unpooled.seconds:.6f}s")
    return report
