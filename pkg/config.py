"""
Run configuration for the shapes command line.

Everything comes from command-line flags; nothing is read from the
environment or from dotfiles, so a run is reproducible from its argv.
"""
import argparse
import logging
from pathlib import Path
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from models import is_identifier

logger = logging.getLogger(__name__)

# ==================== CONSTANTS ====================
DEFAULT_MAX_DEPTH = 10000
DEFAULT_BENCH_N = 100000
SOURCE_SUFFIX = ".shapes"
CORPUS_DIR = Path(__file__).resolve().parent / "corpus"
MANIFEST_NAME = "MANIFEST"

# Process exit codes
EXIT_OK = 0
EXIT_STATIC = 1
EXIT_RUNTIME = 2
EXIT_IO = 3
EXIT_INTERNAL = 4
# Malformed command line; never EXIT_RUNTIME
EXIT_USAGE = EXIT_IO


class RunSettings(BaseModel):
    """Validated options for one `run` invocation"""

    model_config = ConfigDict(frozen=True)

    # ==================== ENTRY ====================
    entry: Optional[str] = Field(default=None, description="Class::method to invoke")

    # ==================== CHECKS ====================
    check_invariants: bool = False
    max_depth: int = Field(default=DEFAULT_MAX_DEPTH, ge=1)

    # ==================== OUTPUT ====================
    dump_heap: bool = False
    trace: bool = False
    debug: bool = False

    @field_validator('entry')
    @classmethod
    def validate_entry(cls, v: Optional[str]) -> Optional[str]:
        """Entry must read `Class::method` with two identifiers"""
        if v is None:
            return v
        parts = v.split("::")
        if len(parts) != 2 or not all(is_identifier(p) for p in parts):
            raise ValueError(f"entry must look like Class::method, got {v!r}")
        return v

    @property
    def entry_point(self) -> Tuple[str, str]:
        if self.entry is None:
            raise ValueError("no entry point configured")
        class_name, method = self.entry.split("::")
        return class_name, method

    @property
    def log_level(self) -> int:
        return logging.DEBUG if self.debug else logging.WARNING

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "RunSettings":
        return cls(
            entry=getattr(ns, "entry", None),
            check_invariants=getattr(ns, "check_invariants", False),
            dump_heap=getattr(ns, "dump_heap", False),
            max_depth=getattr(ns, "max_depth", DEFAULT_MAX_DEPTH),
            trace=getattr(ns, "trace", False),
            debug=getattr(ns, "debug", False),
        )
