"""
Pydantic schemas shared by the front-end, the interpreter and the CLI.
Diagnostics, corpus manifest entries, bench report, and the exception
hierarchy that carries diagnostics out of the services.
"""
from __future__ import annotations

from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator


# Error-code catalogue. Keys are the stable codes printed by the CLI.
ERROR_CODES = {
    "E001": "parse error",
    "E100": "unknown name",
    "E101": "duplicate top-level name",
    "E200": "type mismatch",
    "E201": "null needs an expected type",
    "E210": "ill-formed type or bound",
    "E220": "repeated layout field",
    "E221": "missing layout field",
    "E230": "malformed class header",
    "R001": "null dereference",
    "R002": "call depth exceeded",
}


class Diagnostic(BaseModel):
    model_config = ConfigDict(frozen=True)

    code: str
    message: str
    line: int = Field(default=1, ge=1)
    column: int = Field(default=1, ge=1)
    file: Optional[str] = None

    @field_validator('code')
    @classmethod
    def validate_code(cls, v: str) -> str:
        if v not in ERROR_CODES:
            raise ValueError(f"unknown diagnostic code {v!r}")
        return v

    @property
    def is_runtime(self) -> bool:
        return self.code.startswith("R")

    def with_file(self, file: Optional[str]) -> "Diagnostic":
        return self.model_copy(update={"file": file})

    def sort_key(self) -> tuple:
        return (self.line, self.column, self.code)

    def render(self) -> str:
        """`FILE:LINE:COL: error[CODE]: MESSAGE` (runtime codes use their own prefix)"""
        if self.is_runtime:
            return f"runtime error[{self.code}]: {self.message}"
        return f"{self.file or '<input>'}:{self.line}:{self.column}: error[{self.code}]: {self.message}"


def diagnostic(code: str, message: str, pos=None) -> Diagnostic:
    """Build a Diagnostic from anything with `line`/`column` attributes."""
    if pos is None:
        return Diagnostic(code=code, message=message)
    return Diagnostic(code=code, message=message, line=pos.line, column=pos.column)


class CorpusExpectation(BaseModel):
    code: str
    line: Optional[int] = None


class CorpusEntry(BaseModel):
    """One line of the corpus MANIFEST sidecar"""
    path: str
    exit_code: int = Field(ge=0, le=4)
    expected: List[CorpusExpectation] = Field(default_factory=list)
    entry: Optional[str] = None

    @property
    def is_positive(self) -> bool:
        return self.exit_code == 0

    @property
    def codes(self) -> List[str]:
        return [e.code for e in self.expected]


class BenchTiming(BaseModel):
    label: str
    n: int = Field(ge=1)
    seconds: float = Field(ge=0.0)

    def render(self) -> str:
        return f"{self.label} n={self.n} seconds={self.seconds:.6f}"


class BenchReport(BaseModel):
    pooled: BenchTiming
    unpooled: BenchTiming

    def lines(self) -> List[str]:
        return [self.pooled.render(), self.unpooled.render()]


# ==================== EXCEPTIONS ====================

class ShapesError(Exception):
    """Base error carrying one or more diagnostics"""

    def __init__(self, diagnostics: Diagnostic | List[Diagnostic]):
        if isinstance(diagnostics, Diagnostic):
            diagnostics = [diagnostics]
        self.diagnostics: List[Diagnostic] = list(diagnostics)
        super().__init__("; ".join(d.message for d in self.diagnostics))

    @property
    def diagnostic(self) -> Diagnostic:
        return self.diagnostics[0]

    @property
    def code(self) -> str:
        return self.diagnostic.code


class StaticError(ShapesError):
    """Parse, lookup, well-formedness or typing failure"""

    @classmethod
    def of(cls, code: str, message: str, pos=None) -> "StaticError":
        return cls(diagnostic(code, message, pos))


class ShapesRuntimeError(ShapesError):
    """Trapped run-time fault (R001 null dereference, R002 call depth)"""

    @classmethod
    def of(cls, code: str, message: str) -> "ShapesRuntimeError":
        return cls(Diagnostic(code=code, message=message))


class InvariantViolation(Exception):
    """A configuration failed wf_heap / wf_frame while invariant checking was on"""

    def __init__(self, report: str):
        self.report = report
        super().__init__(report)


class InternalStuck(RuntimeError):
    """A reduction rule premise failed; typing should have prevented it"""


class InternalArityError(ValueError):
    """Pool-argument substitution called with mismatched lengths"""
