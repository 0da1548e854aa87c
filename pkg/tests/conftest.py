"""
Pytest configuration and fixtures
Shared programs, compiled indexes and a CLI runner
"""
import pytest

from config import CORPUS_DIR
from main import main
from models import Program
from services.frontend import compile_source
from services.lookup_tables import ProgramIndex
from services.parser import parse_program


LIST_PROGRAM = """
class Node<<p: [Node<<p>>]>> {
    next: Node<<p>>;
    other: Node<<p>>;
    def link(n: Node<<p>>): Node<<p>> {
        pools
        locals
        ;
        this.next = n;
        this
    }
}

class Main<<m: [Main<<m>>]>> {
    def pooled(x: Main<<m>>): Main<<m>> {
        pools np: NodeL<<np>>
        locals a: Node<<np>>
               b: Node<<np>>
        ;
        a = new Node<<np>>;
        b = new Node<<np>>;
        a = a.link(b);
        this
    }
    def plain(x: Main<<m>>): Main<<m>> {
        pools
        locals a: Node<<none>>
               b: Node<<none>>
        ;
        a = new Node<<none>>;
        b = new Node<<none>>;
        a = a.link(b);
        this
    }
}

layout NodeL: [Node] = rec {next} + rec {other};
"""


@pytest.fixture
def compile_text():
    """Compile SHAPES text to a checked ProgramIndex"""
    def _compile(text: str) -> ProgramIndex:
        return compile_source(text, "<test>")
    return _compile


@pytest.fixture
def parse_ok():
    """Parse SHAPES text that is expected to be syntactically valid"""
    def _parse(text: str) -> Program:
        result = parse_program(text)
        assert isinstance(result, Program), result
        return result
    return _parse


@pytest.fixture
def list_index(compile_text) -> ProgramIndex:
    """Two-field Node class with a two-cluster layout, plus a Main driver"""
    return compile_text(LIST_PROGRAM)


@pytest.fixture
def corpus_dir():
    return CORPUS_DIR


@pytest.fixture
def run_cli(capsys):
    """Run the command line in-process; returns (exit code, stdout, stderr)"""
    def _run(*argv: str):
        code = main([str(a) for a in argv])
        captured = capsys.readouterr()
        return code, captured.out, captured.err
    return _run
