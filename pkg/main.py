"""
Command-line entry point.

    shapes check FILE
    shapes run FILE --entry C::m [--check-invariants] [--dump-heap] [--max-depth N] [--trace]
    shapes bench [--n N]

Results, traces, heap dumps and bench lines go to stdout; diagnostics and
logs go to stderr.
"""
import argparse
import logging
import sys
from typing import Callable, Dict, List, Optional, Tuple, Type

from pydantic import ValidationError

from config import (
    DEFAULT_BENCH_N,
    DEFAULT_MAX_DEPTH,
    EXIT_INTERNAL,
    EXIT_IO,
    EXIT_OK,
    EXIT_RUNTIME,
    EXIT_STATIC,
    EXIT_USAGE,
    RunSettings,
)
from schemas import InternalStuck, InvariantViolation, ShapesRuntimeError, StaticError
from services.bench import bench_traversal
from services.evaluator import Evaluator
from services.frontend import compile_file
from services.runtime_heap import render_value

logger = logging.getLogger("shapes")


class SourceFileFilter(logging.Filter):
    """Add the source file being processed to all log records"""

    source = "startup"

    def filter(self, record):
        if not hasattr(record, 'source'):
            record.source = SourceFileFilter.source
        return True


def configure_logging(level: int = logging.WARNING) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.addFilter(SourceFileFilter())
    handler.setFormatter(logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - [%(source)s] %(message)s'
    ))
    logging.basicConfig(
        level=level,
        handlers=[handler],
        force=True,
    )


# ==================== ERROR HANDLERS ====================

def _static_handler(exc: StaticError) -> None:
    for d in exc.diagnostics:
        print(d.render(), file=sys.stderr)


def _runtime_handler(exc: ShapesRuntimeError) -> None:
    print(exc.diagnostic.render(), file=sys.stderr)


def _io_handler(exc: OSError) -> None:
    print(f"error: cannot read {exc.filename or 'input'}: {exc.strerror or exc}", file=sys.stderr)


def _internal_handler(exc: Exception) -> None:
    logger.error(f"internal error: {exc}")
    print(str(exc) if isinstance(exc, InvariantViolation) else f"internal error: {exc}", file=sys.stderr)


# Most specific first; the first matching type wins.
EXCEPTION_HANDLERS: List[Tuple[Type[BaseException], int, Callable]] = [
    (StaticError, EXIT_STATIC, _static_handler),
    (ShapesRuntimeError, EXIT_RUNTIME, _runtime_handler),
    (OSError, EXIT_IO, _io_handler),
    (InvariantViolation, EXIT_INTERNAL, _internal_handler),
    (InternalStuck, EXIT_INTERNAL, _internal_handler),
]


def handle_exception(exc: BaseException) -> Optional[int]:
    for exc_type, code, handler in EXCEPTION_HANDLERS:
        if isinstance(exc, exc_type):
            handler(exc)
            return code
    return None


# ==================== COMMANDS ====================

def print_trace(rule: str, value: str) -> None:
    print(f"trace {rule} {value}")


def cmd_check(path: str) -> int:
    """Parse and check a file; diagnostics on stderr in source order."""
    SourceFileFilter.source = path
    compile_file(path)
    logger.debug("check passed")
    return EXIT_OK


def cmd_run(path: str, settings: RunSettings) -> int:
    SourceFileFilter.source = path
    index = compile_file(path)
    class_name, method = settings.entry_point
    try:
        index.method_of(class_name, method)
    except StaticError as exc:
        raise StaticError([d.with_file(path) for d in exc.diagnostics]) from None
    evaluator = Evaluator(
        index,
        max_depth=settings.max_depth,
        tracer=print_trace if settings.trace else None,
        check_invariants=settings.check_invariants,
    )
    result = evaluator.run_entry(class_name, method)
    print(render_value(result))
    if settings.dump_heap:
        for line in evaluator.heap.dump_lines():
            print(line)
    return EXIT_OK


def cmd_bench(n: int) -> int:
    for line in bench_traversal(n).lines():
        print(line)
    return EXIT_OK


class ShapesArgumentParser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with EXIT_USAGE"""

    def error(self, message: str):  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: usage error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = ShapesArgumentParser(prog="shapes", description="Check and run SHAPES programs.")
    parser.add_argument("--debug", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="parse and type-check a program")
    check.add_argument("file")

    run = sub.add_parser("run", help="type-check and run a program")
    run.add_argument("file")
    run.add_argument("--entry", required=True, metavar="C::m", help="class and method to invoke")
    run.add_argument("--check-invariants", action="store_true",
                     help="check heap and frame well-formedness after every step")
    run.add_argument("--dump-heap", action="store_true", help="print the final heap after the result")
    run.add_argument("--max-depth", type=int, default=DEFAULT_MAX_DEPTH, help="call depth limit")
    run.add_argument("--trace", action="store_true", help="print one line per rule application")

    bench = sub.add_parser("bench", help="time pooled vs unpooled list traversal")
    bench.add_argument("--n", type=int, default=DEFAULT_BENCH_N, help="list length")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = RunSettings.from_namespace(args)
    except ValidationError as exc:
        parser.error("; ".join(err["msg"] for err in exc.errors()))
    configure_logging(settings.log_level)
    if args.command == "bench" and args.n < 1:
        parser.error(f"--n must be at least 1, got {args.n}")

    commands: Dict[str, Callable[[], int]] = {
        "check": lambda: cmd_check(args.file),
        "run": lambda: cmd_run(args.file, settings),
        "bench": lambda: cmd_bench(args.n),
    }
    try:
        return commands[args.command]()
    except Exception as exc:
        code = handle_exception(exc)
        if code is None:
            raise
        return code
    finally:
        sys.stdout.flush()


if __name__ == "__main__":
    sys.exit(main())
