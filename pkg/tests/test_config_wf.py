"""
Tests for run-time agreement, heap and frame well-formedness, and heap isomorphism
"""
import pytest

from models import NONE, ClassType
from schemas import InvariantViolation
from services.config_wf import (
    RtBound,
    RtClass,
    RtPool,
    agrees,
    check_configuration,
    explain_heap,
    frame_reason,
    heap_iso,
    heap_reason,
    resolve_in_frame,
    weak_agree,
    weak_reason,
    wf_frame,
    wf_heap,
)
from services.corpus_service import run_variants
from services.evaluator import run_entry
from services.parser import parse_program
from services.runtime_heap import NONE_POOL, NULL, Frame, Heap, Location, ObjectAddr, PoolAddr
from services.typechecker import build_method_context


@pytest.fixture
def pooled(list_index):
    heap, _ = run_entry(list_index, "Main", "pooled")
    return heap


@pytest.fixture
def plain(list_index):
    heap, _ = run_entry(list_index, "Main", "plain")
    return heap


def _chain(index, n, cyclic=False):
    heap = Heap(index)
    nodes = [heap.alloc_object("Node", (NONE_POOL,)) for _ in range(n)]
    for a, b in zip(nodes, nodes[1:]):
        heap.store(a, "next", b)
    if cyclic:
        heap.store(nodes[-1], "next", nodes[0])
    return heap, nodes[0]


def test_heaps_produced_by_runs_are_well_formed(pooled, plain):
    assert wf_heap(pooled)
    assert explain_heap(plain) == []


def test_weak_agreement_examples(pooled):
    p0 = PoolAddr(0)
    node_in_p0 = RtClass("Node", (p0,))
    assert weak_agree(pooled, NULL, node_in_p0)
    assert weak_agree(pooled, Location(p0, 1), node_in_p0)
    assert not weak_agree(pooled, Location(p0, 2), node_in_p0)
    assert not weak_agree(pooled, Location(p0, 0), RtClass("Node", (NONE_POOL,)))
    assert weak_agree(pooled, ObjectAddr(0), RtClass("Main", (NONE_POOL,)))
    assert not weak_agree(pooled, ObjectAddr(0), RtClass("Node", (NONE_POOL,)))


def test_weak_agreement_for_pools(pooled):
    p0 = PoolAddr(0)
    assert weak_agree(pooled, p0, RtPool("NodeL", (p0,)))
    assert weak_agree(pooled, p0, RtBound("Node", (p0,)))
    assert weak_agree(pooled, NONE_POOL, RtBound("Node", (NONE_POOL,)))
    assert not weak_agree(pooled, NONE_POOL, RtPool("NodeL", (NONE_POOL,)))
    assert not weak_agree(pooled, p0, RtBound("Main", (p0,)))
    assert "not a pool" in weak_reason(pooled, NULL, RtPool("NodeL", (p0,)))


def test_strong_agreement_of_cells(pooled):
    p0 = PoolAddr(0)
    assert agrees(pooled, ObjectAddr(0), RtClass("Main", (NONE_POOL,)))
    assert agrees(pooled, p0, RtPool("NodeL", (p0,)))
    assert agrees(pooled, Location(p0, 0), RtClass("Node", (p0,)))
    assert not agrees(pooled, p0, RtClass("Node", (p0,)))


def test_unequal_cluster_lengths_are_reported(pooled):
    pooled.pool_cell(PoolAddr(0)).clusters[0].append([NULL])
    assert not wf_heap(pooled)
    assert "cluster lengths differ" in heap_reason(pooled)


def test_retargeted_pooled_field_is_reported_with_its_path(pooled):
    pooled.write_slot(PoolAddr(0), 0, 0, 0, ObjectAddr(0))
    assert heap_reason(pooled).startswith("pool@0[0].next:")


def test_unpooled_field_pointing_into_a_pool_is_reported(plain):
    p = plain.reserve_pool()
    plain.alloc_pool("NodeL", (p,), p)
    plain.pool_append(p)
    plain.store(ObjectAddr(1), "other", Location(p, 0))
    assert heap_reason(plain).startswith("obj@1.other:")


def test_reserved_pool_is_reported(plain):
    plain.reserve_pool()
    assert explain_heap(plain) == ["pool@0: reserved but never allocated"]


@pytest.fixture
def pooled_frame(list_index, pooled):
    cd = list_index.class_of("Main")
    md = list_index.method_of("Main", "pooled")
    ctx = build_method_context(list_index, cd, md)
    frame = Frame({
        "m": NONE_POOL,
        "this": ObjectAddr(0),
        "x": NULL,
        "np": PoolAddr(0),
        "a": Location(PoolAddr(0), 0),
        "b": Location(PoolAddr(0), 1),
    })
    return ctx, frame


def test_frame_agrees_with_method_context(pooled, pooled_frame):
    ctx, frame = pooled_frame
    assert wf_frame(ctx, pooled, frame)


def test_frame_missing_a_variable(pooled, pooled_frame):
    ctx, frame = pooled_frame
    short = Frame({k: v for k, v in frame.items() if k != "b"})
    assert "missing ['b']" in frame_reason(ctx, pooled, short)


def test_frame_with_object_in_wrong_pool(pooled, pooled_frame):
    ctx, frame = pooled_frame
    frame["a"] = ObjectAddr(0)
    assert frame_reason(ctx, pooled, frame).startswith("a:")


def test_frame_with_pool_variable_bound_to_none(pooled, pooled_frame):
    ctx, frame = pooled_frame
    frame["np"] = NONE_POOL
    assert not wf_frame(ctx, pooled, frame)


def test_check_configuration_raises_with_reason(pooled, pooled_frame):
    ctx, frame = pooled_frame
    check_configuration(ctx, pooled, frame)
    frame["b"] = Location(PoolAddr(0), 9)
    with pytest.raises(InvariantViolation) as exc_info:
        check_configuration(ctx, pooled, frame)
    assert str(exc_info.value).startswith("invariant violation: b:")


def test_isomorphism_is_an_equivalence(list_index):
    a, ra = _chain(list_index, 3)
    b, rb = _chain(list_index, 3)
    c, rc = _chain(list_index, 3)
    assert heap_iso(a, ra, a, ra)
    assert heap_iso(a, ra, b, rb) and heap_iso(b, rb, a, ra)
    assert heap_iso(b, rb, c, rc) and heap_iso(a, ra, c, rc)


def test_lists_of_different_length_are_not_isomorphic(list_index):
    two, r2 = _chain(list_index, 2)
    three, r3 = _chain(list_index, 3)
    assert not heap_iso(two, r2, three, r3)
    assert not heap_iso(three, r3, two, r2)


def test_isomorphism_is_a_bijection(list_index):
    """A one-node cycle does not match a two-node cycle"""
    one, r1 = _chain(list_index, 1, cyclic=True)
    two, r2 = _chain(list_index, 2, cyclic=True)
    assert not heap_iso(one, r1, two, r2)


def test_pooled_and_unpooled_lists_are_isomorphic(pooled, plain):
    assert heap_iso(pooled, Location(PoolAddr(0), 0), plain, ObjectAddr(1))
    assert not heap_iso(pooled, Location(PoolAddr(0), 1), plain, ObjectAddr(1))


def test_null_matches_only_null(pooled, plain):
    assert heap_iso(pooled, NULL, plain, NULL)
    assert not heap_iso(pooled, NULL, plain, ObjectAddr(1))


def test_layout_choice_does_not_change_the_object_graph(corpus_dir):
    prog = parse_program((corpus_dir / "linked_list.shapes").read_text())
    runs = run_variants(prog, "School::build")
    head = Location(PoolAddr(0), 2)
    declared = runs["declared"].heap
    for mode in ("aos", "soa"):
        assert heap_iso(declared, head, runs[mode].heap, head)
        assert runs[mode].rendered == runs["declared"].rendered
    assert not heap_iso(declared, head, declared, Location(PoolAddr(0), 1))


def test_runtime_types_resolve_none_to_the_none_pool(pooled, pooled_frame):
    _, frame = pooled_frame
    assert resolve_in_frame(ClassType("Node", (NONE,)), frame) == RtClass("Node", (NONE_POOL,))
    assert resolve_in_frame(ClassType("Node", ("np",)), frame) == RtClass("Node", (PoolAddr(0),))


@pytest.mark.parametrize("appends", [1, 3])
def test_agreement_survives_pool_growth(pooled, appends):
    """Appending null records keeps every cell and value agreeing"""
    p0 = PoolAddr(0)
    facts = [
        (ObjectAddr(0), RtClass("Main", (NONE_POOL,))),
        (p0, RtPool("NodeL", (p0,))),
        (Location(p0, 0), RtClass("Node", (p0,))),
        (Location(p0, 1), RtClass("Node", (p0,))),
    ]
    assert all(agrees(pooled, addr, tau) for addr, tau in facts)
    for _ in range(appends):
        n = pooled.pool_append(p0)
        assert agrees(pooled, Location(p0, n), RtClass("Node", (p0,)))
    assert all(agrees(pooled, addr, tau) for addr, tau in facts)
    assert wf_heap(pooled)
