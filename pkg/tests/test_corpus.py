"""
Tests for the sample-program corpus, its manifest and the layout variants
"""
import pytest

from config import SOURCE_SUFFIX
from schemas import CorpusExpectation
from services.config_wf import heap_iso
from services.corpus_service import (
    LAYOUT_MODES,
    evaluate_entry,
    load_manifest,
    parse_manifest_line,
    relayout,
    run_variants,
)
from services.parser import parse_program
from services.runtime_heap import Location, ObjectAddr, PoolAddr

ENTRIES = load_manifest()
RUNNABLE = [e for e in ENTRIES if e.is_positive and e.entry]


def test_corpus_has_enough_programs():
    assert len(ENTRIES) >= 10
    assert sum(e.is_positive for e in ENTRIES) >= 5
    assert sum(not e.is_positive for e in ENTRIES) >= 5


def test_every_corpus_file_is_listed(corpus_dir):
    listed = {e.path for e in ENTRIES}
    on_disk = {p.name for p in corpus_dir.glob(f"*{SOURCE_SUFFIX}")}
    assert listed == on_disk


@pytest.mark.parametrize("entry", ENTRIES, ids=lambda e: e.path)
def test_corpus_verdict(entry, corpus_dir):
    outcome = evaluate_entry(entry, corpus_dir)
    assert outcome.matches(entry), (outcome.exit_code, [d.render() for d in outcome.diagnostics])


def test_negative_programs_name_their_lines():
    for entry in ENTRIES:
        if entry.exit_code == 1:
            assert all(exp.line is not None for exp in entry.expected), entry.path


def _all_addresses(heap):
    for addr, _ in heap.iter_objects():
        yield addr
    for addr, cell in heap.iter_pools():
        for n in range(cell.size):
            yield Location(addr, n)


@pytest.mark.parametrize("entry", RUNNABLE, ids=lambda e: e.path)
def test_layout_variants_agree(entry, corpus_dir):
    """Declared, AoS and SoA layouts give the same result and isomorphic object graphs"""
    prog = parse_program((corpus_dir / entry.path).read_text(encoding="utf-8"))
    runs = run_variants(prog, entry.entry)
    declared = runs["declared"]
    for mode in LAYOUT_MODES[1:]:
        other = runs[mode]
        assert other.rendered == declared.rendered
        assert other.trace == declared.trace
        for addr in _all_addresses(declared.heap):
            assert heap_iso(declared.heap, addr, other.heap, addr), (mode, addr)


@pytest.mark.parametrize("entry", RUNNABLE, ids=lambda e: e.path)
def test_runs_are_reproducible(entry, corpus_dir):
    prog = parse_program((corpus_dir / entry.path).read_text(encoding="utf-8"))
    first = run_variants(prog, entry.entry, modes=("declared",))["declared"]
    second = run_variants(prog, entry.entry, modes=("declared",))["declared"]
    assert first.heap.dump() == second.heap.dump()
    assert first.trace == second.trace


def test_deep_calls_result(corpus_dir):
    prog = parse_program((corpus_dir / "deep_calls.shapes").read_text(encoding="utf-8"))
    run = run_variants(prog, "Driver::go", modes=("declared",))["declared"]
    assert run.result == ObjectAddr(2)
    assert run.rendered == "obj@2"


def test_list_in_pools_and_in_none_are_isomorphic(corpus_dir):
    def head(name):
        prog = parse_program((corpus_dir / name).read_text(encoding="utf-8"))
        return run_variants(prog, "School::build", modes=("declared",))["declared"].heap

    pooled = head("linked_list.shapes")
    unpooled = head("linked_list_none.shapes")
    roots = [addr for addr, cell in unpooled.iter_objects() if cell.class_name == "Student"]
    assert heap_iso(pooled, Location(PoolAddr(0), 2), unpooled, roots[-1])


def test_relayout_modes(corpus_dir):
    prog = parse_program((corpus_dir / "linked_list.shapes").read_text(encoding="utf-8"))
    assert relayout(prog, "declared") is prog
    student = {ld.name: ld for ld in relayout(prog, "aos").layouts}["L"]
    assert student.clusters == (("age", "supervisor", "next"),)
    student = {ld.name: ld for ld in relayout(prog, "soa").layouts}["L"]
    assert student.clusters == (("age",), ("supervisor",), ("next",))
    with pytest.raises(ValueError):
        relayout(prog, "hybrid")


def test_manifest_line_parsing():
    entry = parse_manifest_line("bad.shapes  exit=1 codes=E210@13,E200  # note")
    assert entry.path == "bad.shapes"
    assert entry.exit_code == 1
    assert entry.expected == [CorpusExpectation(code="E210", line=13), CorpusExpectation(code="E200")]
    assert entry.entry is None
    assert parse_manifest_line("   # just a comment") is None
    assert parse_manifest_line("") is None


def test_manifest_line_with_bad_option():
    with pytest.raises(ValueError):
        parse_manifest_line("x.shapes exit")
