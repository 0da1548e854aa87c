"""
Corpus of sample programs and their expected verdicts.

The MANIFEST sidecar has one line per program:

    path exit=N [codes=CODE@LINE,CODE@LINE] [entry=Class::method]

Blank lines and lines starting with `#` are ignored.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Union

from config import CORPUS_DIR, DEFAULT_MAX_DEPTH, EXIT_INTERNAL, EXIT_OK, EXIT_RUNTIME, EXIT_STATIC, MANIFEST_NAME
from models import LayoutDecl, Program
from schemas import (
    CorpusEntry,
    CorpusExpectation,
    Diagnostic,
    InternalStuck,
    InvariantViolation,
    ShapesRuntimeError,
    StaticError,
)
from services.evaluator import Evaluator
from services.frontend import check_program, compile_file
from services.lookup_tables import ProgramIndex
from services.runtime_heap import Heap, Value, render_value

logger = logging.getLogger(__name__)

LAYOUT_MODES = ("declared", "aos", "soa")


def parse_manifest_line(line: str) -> Optional[CorpusEntry]:
    text = line.split("#", 1)[0].strip()
    if not text:
        return None
    path, *options = text.split()
    values: Dict[str, str] = {}
    for opt in options:
        key, sep, value = opt.partition("=")
        if not sep:
            raise ValueError(f"malformed manifest option {opt!r} for {path}")
        values[key] = value
    expected = []
    for item in filter(None, values.get("codes", "").split(",")):
        code, _, at = item.partition("@")
        expected.append(CorpusExpectation(code=code, line=int(at) if at else None))
    return CorpusEntry(
        path=path,
        exit_code=int(values.get("exit", "0")),
        expected=expected,
        entry=values.get("entry"),
    )


def load_manifest(directory: Union[str, Path] = CORPUS_DIR) -> List[CorpusEntry]:
    """All MANIFEST entries of a corpus directory, in file order."""
    directory = Path(directory)
    entries = []
    manifest = directory / MANIFEST_NAME
    for lineno, line in enumerate(manifest.read_text(encoding="utf-8").splitlines(), 1):
        try:
            entry = parse_manifest_line(line)
        except ValueError as exc:
            raise ValueError(f"{manifest}:{lineno}: {exc}") from exc
        if entry is not None:
            entries.append(entry)
    logger.debug(f"loaded {len(entries)} corpus entries from {manifest}")
    return entries


# ==================== LAYOUT VARIANTS ====================

def relayout(prog: Program, mode: str) -> Program:
    """Rewrite every layout of `prog` to the declared, AoS or SoA clustering.

    Layout names and their classes are kept, so the program text that
    refers to them type-checks unchanged.
    """
    if mode not in LAYOUT_MODES:
        raise ValueError(f"unknown layout mode {mode!r}; expected one of {LAYOUT_MODES}")
    if mode == "declared":
        return prog
    fields = {cd.name: tuple(f.name for f in cd.fields) for cd in prog.classes}
    layouts: List[LayoutDecl] = []
    for ld in prog.layouts:
        names = fields.get(ld.class_name, ())
        if not names:
            layouts.append(ld)
        elif mode == "aos":
            layouts.append(replace(ld, clusters=(names,)))
        else:
            layouts.append(replace(ld, clusters=tuple((f,) for f in names)))
    return replace(prog, layouts=tuple(layouts))


@dataclass
class VariantRun:
    mode: str
    heap: Heap
    result: Value
    trace: List[str] = field(default_factory=list)

    @property
    def rendered(self) -> str:
        return render_value(self.result)


def run_variants(
    prog: Program,
    entry: str,
    *,
    modes=LAYOUT_MODES,
    check_invariants: bool = True,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> Dict[str, VariantRun]:
    """Run `entry` once per layout mode, recording heap, result and rule trace."""
    class_name, method = entry.split("::")
    runs: Dict[str, VariantRun] = {}
    for mode in modes:
        index = check_program(relayout(prog, mode))
        trace: List[str] = []
        evaluator = Evaluator(
            index,
            max_depth=max_depth,
            tracer=lambda rule, value: trace.append(f"trace {rule} {value}"),
            check_invariants=check_invariants,
        )
        result = evaluator.run_entry(class_name, method)
        runs[mode] = VariantRun(mode, evaluator.heap, result, trace)
    return runs


# ==================== VERDICTS ====================

@dataclass
class CorpusOutcome:
    exit_code: int
    diagnostics: List[Diagnostic] = field(default_factory=list)
    index: Optional[ProgramIndex] = None

    def matches(self, entry: CorpusEntry) -> bool:
        if self.exit_code != entry.exit_code:
            return False
        if [d.code for d in self.diagnostics] != entry.codes:
            return False
        return all(
            exp.line is None or exp.line == d.line
            for exp, d in zip(entry.expected, self.diagnostics)
        )


def evaluate_entry(entry: CorpusEntry, directory: Union[str, Path] = CORPUS_DIR) -> CorpusOutcome:
    """Check (and, when an entry point is given, run) one corpus program."""
    try:
        index = compile_file(Path(directory) / entry.path)
    except StaticError as exc:
        return CorpusOutcome(EXIT_STATIC, exc.diagnostics)
    if entry.entry is None:
        return CorpusOutcome(EXIT_OK, index=index)
    class_name, method = entry.entry.split("::")
    try:
        Evaluator(index, check_invariants=True).run_entry(class_name, method)
    except StaticError as exc:
        return CorpusOutcome(EXIT_STATIC, exc.diagnostics, index)
    except ShapesRuntimeError as exc:
        return CorpusOutcome(EXIT_RUNTIME, exc.diagnostics, index)
    except (InvariantViolation, InternalStuck) as exc:
        logger.error(f"{entry.path}: {exc}")
        return CorpusOutcome(EXIT_INTERNAL, index=index)
    return CorpusOutcome(EXIT_OK, index=index)
