"""Split plans: golden layouts, partition invariants, relabeling."""

import pytest
from hypothesis import given, settings, strategies as st

from rebalance import (
    ParameterError,
    UnsupportedConfigError,
    default_params,
    make_split_plan,
    split_corners,
    split_middle,
    storage_set,
)

kr = st.integers(min_value=4, max_value=30).flatmap(
    lambda k: st.tuples(st.just(k), st.integers(min_value=3, max_value=k - 1))
)


def as_tuple(piece):
    return (piece.base.index, piece.superscript, piece.atom_start, piece.atom_stop)


def test_golden_split_6_3():
    plan = make_split_plan(default_params(6, 3), removed=6)
    # low corner W_4: big to node 1, tiny to {2,3}, one pair to {3}
    assert as_tuple(plan.low_corner.big) == (4, (1,), 0, 49)
    assert as_tuple(plan.low_corner.tiny) == (4, (2, 3), 49, 56)
    assert [as_tuple(p) for p in plan.low_corner.pairs] == [(4, (3,), 56, 70)]
    # middle W_5 splits into equal halves
    assert [as_tuple(p) for p in plan.middles[0]] == [(5, (2,), 0, 35), (5, (4,), 35, 70)]
    # high corner W_6 mirrors the low one
    assert as_tuple(plan.high_corner.big) == (6, (5,), 0, 49)
    assert as_tuple(plan.high_corner.tiny) == (6, (3, 4), 49, 56)
    assert [as_tuple(p) for p in plan.high_corner.pairs] == [(6, (3,), 56, 70)]
    assert len(plan.all_pieces()) == 8


def test_golden_split_8_6():
    plan = make_split_plan(default_params(8, 6), removed=8)
    assert as_tuple(plan.low_corner.big) == (3, (1,), 0, 108)
    assert plan.low_corner.tiny is None  # K-r even: no tiny piece
    assert [as_tuple(p) for p in plan.low_corner.pairs] == [(3, (2,), 108, 126)]
    assert as_tuple(plan.high_corner.big) == (8, (7,), 0, 108)
    assert [as_tuple(p) for p in plan.high_corner.pairs] == [(8, (6,), 108, 126)]
    expected_middles = [
        [(4, (2,), 0, 90), (4, (3,), 90, 126)],
        [(5, (3,), 0, 72), (5, (4,), 72, 126)],
        [(6, (4,), 0, 54), (6, (5,), 54, 126)],
        [(7, (5,), 0, 36), (7, (6,), 36, 126)],
    ]
    assert [[as_tuple(a), as_tuple(b)] for a, b in plan.middles] == expected_middles
    assert len(plan.all_pieces()) == 12


def test_split_plan_relabels_for_other_removed_node():
    plan = make_split_plan(default_params(6, 3), removed=3)
    # canonical W_4..W_6 become actual W_1..W_3; canonical survivor s maps to s-3 mod 6
    assert as_tuple(plan.low_corner.big) == (1, (4,), 0, 49)
    assert as_tuple(plan.low_corner.tiny) == (1, (5, 6), 49, 56)
    assert [as_tuple(p) for p in plan.middles[0]] == [(2, (5,), 0, 35), (2, (1,), 35, 70)]
    assert as_tuple(plan.high_corner.big) == (3, (2,), 0, 49)
    assert as_tuple(plan.high_corner.tiny) == (3, (1, 6), 49, 56)
    assert plan.to_actual(6) == 3


def test_split_middle_validates_index():
    params = default_params(6, 3)
    with pytest.raises(ParameterError):
        split_middle(0, params)
    with pytest.raises(ParameterError):
        split_middle(2, params)  # only r-2 = 1 middle exists


def test_make_split_plan_rejects_bad_input():
    with pytest.raises(UnsupportedConfigError):
        make_split_plan(default_params(6, 2), removed=6)
    with pytest.raises(ParameterError):
        make_split_plan(default_params(6, 3), removed=7)
    with pytest.raises(ParameterError):
        make_split_plan(default_params(6, 3), removed=0)


def test_corner_label_collision_at_max_replication():
    # K-r = 1: big and tiny of each corner carry the same superscript and are
    # distinguished only by their atom ranges
    low, high = split_corners(default_params(6, 5))
    assert low.big.superscript == low.tiny.superscript == (1,)
    assert low.big.size_atoms != low.tiny.size_atoms
    assert high.big.superscript == high.tiny.superscript == (5,)
    assert low.pairs == () and high.pairs == ()


@settings(derandomize=True, max_examples=120)
@given(kr)
def test_split_partitions_every_segment(t):
    k, r = t
    params = default_params(k, r)
    plan = make_split_plan(params, removed=k)
    hu = params.half_unit_atoms
    by_base = {}
    for piece in plan.all_pieces():
        by_base.setdefault(piece.base.index, []).append(piece)
        assert piece.size_atoms % hu == 0
        assert piece.size_atoms > 0
    assert sorted(by_base) == list(range(k - r + 1, k + 1))
    for base, pieces in by_base.items():
        spans = sorted((p.atom_start, p.atom_stop) for p in pieces)
        cursor = 0
        for start, stop in spans:
            assert start == cursor, (base, spans)
            cursor = stop
        assert cursor == params.segment_atoms


@settings(derandomize=True, max_examples=120)
@given(kr)
def test_split_superscripts_avoid_current_holders(t):
    # a piece is addressed only to survivors that do not already store its base
    k, r = t
    params = default_params(k, r)
    plan = make_split_plan(params, removed=k)
    for piece in plan.all_pieces():
        sup = set(piece.superscript)
        assert sup, piece
        assert sup <= set(range(1, k)), piece
        assert not sup & storage_set(piece.base.index, k, r), piece


@settings(derandomize=True, max_examples=60)
@given(kr.flatmap(lambda t: st.tuples(st.just(t[0]), st.just(t[1]),
                                      st.integers(min_value=1, max_value=t[0]))))
def test_split_relabeling_preserves_shape(t):
    k, r, removed = t
    params = default_params(k, r)
    canonical = make_split_plan(params, removed=k)
    shifted = make_split_plan(params, removed=removed)
    for a, b in zip(canonical.all_pieces(), shifted.all_pieces()):
        assert (a.atom_start, a.atom_stop) == (b.atom_start, b.atom_stop)
        assert len(a.superscript) == len(b.superscript)
    # the split touches exactly the segments the removed node held
    bases = {p.base.index for p in shifted.all_pieces()}
    assert bases == {i for i in range(1, k + 1) if removed in storage_set(i, k, r)}
    # no piece is addressed to the removed node
    for piece in shifted.all_pieces():
        assert removed not in piece.superscript
