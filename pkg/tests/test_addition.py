"""Node addition: plan geometry, traffic, final layout."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rebalance import (
    ParameterError,
    SegmentLabel,
    addition_lower_bound,
    build_cyclic_database,
    cyclic_range,
    default_params,
    make_addition_plan,
    rebalance_add,
    slice_atoms,
)


def test_golden_plan_6_3():
    plan = make_addition_plan(default_params(6, 3))
    assert [(p.atom_start, p.atom_stop) for p in plan.kept] == [(0, 60)] * 6
    assert [p.superscript for p in plan.kept] == [(), (), (), (), (7,), (7,)]
    assert [(p.atom_start, p.atom_stop) for p in plan.small] == [(60, 70)] * 6
    assert [p.superscript for p in plan.small] == [
        (7,),
        (1, 7),
        (1, 2, 7),
        (1, 2, 7),
        (1, 2, 7),
        (1, 2, 7),
    ]
    assert plan.shipped == (5, 6)
    assert plan.discards == ((1, 5), (2, 6))


def test_golden_run_6_3():
    params = default_params(6, 3)
    db = build_cyclic_database(params, seed=0)
    run = rebalance_add(db)
    assert run.log.load == Fraction(18, 7) == addition_lower_bound(params)
    assert run.report.matches_formula
    assert run.report.lower_bound == run.report.measured

    sizes = [(b.sender, b.kind, b.payload_atoms) for b in run.log.broadcasts]
    assert sizes == [(i, "uncoded", 10) for i in range(1, 7)] + [
        (5, "uncoded", 60),
        (6, "uncoded", 60),
    ]

    final = run.final
    assert final.n_nodes == 7
    assert final.generation == "target"
    assert final.segment_atoms == 60
    assert sorted(final.contents) == list(range(1, 8))
    for i in range(1, 8):
        label = SegmentLabel(i, "target")
        assert final.holders(label) == frozenset(cyclic_range(i, 3, 7))


def test_new_segment_concatenates_trailers():
    params = default_params(6, 3)
    db = build_cyclic_database(params, seed=11)
    run = rebalance_add(db)
    w = params.atom_bits
    want = 0
    for i in range(1, 7):
        src = db.segment_bits_at(i, i)
        want |= slice_atoms(src, 60, 70, w) << ((i - 1) * 10 * w)
    for node in (7, 1, 2):
        piece = run.final.stored(node, SegmentLabel(7, "target"))
        assert piece.bits == want
        assert piece.n_atoms == 60


def test_kept_parts_are_leading_slices():
    params = default_params(6, 3)
    db = build_cyclic_database(params, seed=11)
    run = rebalance_add(db)
    w = params.atom_bits
    for i in range(1, 7):
        want = slice_atoms(db.segment_bits_at(i, i), 0, 60, w)
        for node in cyclic_range(i, 3, 7):
            assert run.final.stored(node, SegmentLabel(i, "target")).bits == want


def test_smallest_system_3_2():
    params = default_params(3, 2)
    db = build_cyclic_database(params, seed=0)
    run = rebalance_add(db)
    assert run.log.load == Fraction(3, 2)
    assert run.final.n_nodes == 4
    assert run.final.segment_atoms == 12


def test_addition_requires_original_layout():
    db = build_cyclic_database(default_params(6, 3), seed=0)
    run = rebalance_add(db)
    with pytest.raises(ParameterError):
        rebalance_add(run.final)


def test_load_independent_of_segment_size():
    loads = set()
    for t_mult in (1, 3):
        db = build_cyclic_database(default_params(6, 3, t_mult=t_mult), seed=0)
        loads.add(rebalance_add(db).log.load)
    assert loads == {Fraction(18, 7)}


@settings(max_examples=40, derandomize=True)
@given(st.integers(3, 20).flatmap(lambda k: st.tuples(st.just(k), st.integers(2, k - 1))))
def test_load_meets_lower_bound_everywhere(kr):
    k, r = kr
    params = default_params(k, r)
    db = build_cyclic_database(params, seed=2)
    run = rebalance_add(db)
    assert run.log.load == Fraction(r * k, k + 1)
    assert run.log.load == addition_lower_bound(params)
    # stored volume unchanged in proportion: r replicas of K+1 equal segments
    assert run.final.total_stored_atoms() == r * (k + 1) * run.final.segment_atoms
