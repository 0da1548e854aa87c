"""
Source text to checked ProgramIndex.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional, Union

from models import Pos, Program
from schemas import StaticError, diagnostic
from services.lookup_tables import ProgramIndex
from services.parser import parse_program
from services.static_wf import wf_program

logger = logging.getLogger(__name__)


def check_program(program: Program, filename: Optional[str] = None) -> ProgramIndex:
    """Index and check a parsed program; raise StaticError with every diagnostic."""
    index = ProgramIndex(program)
    diags = wf_program(index)
    if diags:
        raise StaticError([d.with_file(filename) for d in diags])
    return index


def compile_source(text: str, filename: Optional[str] = None) -> ProgramIndex:
    parsed = parse_program(text)
    if isinstance(parsed, list):
        raise StaticError([d.with_file(filename) for d in parsed])
    index = check_program(parsed, filename)
    logger.debug(f"{filename or '<input>'}: well-formed")
    return index


def compile_file(path: Union[str, Path]) -> ProgramIndex:
    """Read and check a `.shapes` file. OSError propagates to the caller."""
    path = Path(path)
    raw = path.read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        line_start = raw.rfind(b"\n", 0, exc.start) + 1
        pos = Pos(raw.count(b"\n", 0, exc.start) + 1, exc.start - line_start + 1)
        bad = diagnostic("E001", f"source is not valid UTF-8 (byte 0x{raw[exc.start]:02x})", pos)
        raise StaticError([bad.with_file(str(path))]) from None
    return compile_source(text, str(path))
