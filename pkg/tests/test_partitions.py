import pytest
from hypothesis import given, strategies as st

from faabruno.partitions import (CapacityError, Cover, Partition, bell, covers_of, mask_to_subset,
                                 nonempty_subsets, partitions_of, restricted_growth_strings,
                                 subset_mask, subsets_of)

BELL = [1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975]


def test_partitions_of_three_listing():
    got = [p.to_lists() for p in partitions_of(3)]
    assert got == [[[0, 1, 2]], [[0, 1], [2]], [[0, 2], [1]], [[0], [1, 2]], [[0], [1], [2]]]


def test_empty_ground_set_has_one_partition():
    parts = list(partitions_of(0))
    assert len(parts) == 1 and parts[0].blocks == ()


@pytest.mark.parametrize("n", range(len(BELL)))
def test_bell_values(n):
    assert bell(n) == BELL[n]


@pytest.mark.parametrize("n", range(9))
def test_partition_count_matches_bell(n):
    assert sum(1 for _ in partitions_of(n)) == bell(n)


@given(st.integers(0, 7))
def test_partitions_are_valid_and_distinct(n):
    parts = list(partitions_of(n))
    for p in parts:
        p.validate()
    assert len({p.blocks for p in parts}) == len(parts)


@given(st.integers(1, 8))
def test_rgs_lexicographic(n):
    strings = list(restricted_growth_strings(n))
    assert strings == sorted(strings)
    assert strings[0] == (0,) * n and strings[-1] == tuple(range(n))


def test_enumeration_is_stable():
    assert [p.blocks for p in partitions_of(6)] == [p.blocks for p in partitions_of(6)]


def test_validate_rejects_bad_partitions():
    with pytest.raises(ValueError):
        Partition(((0, 1), (1, 2)), 3).validate()
    with pytest.raises(ValueError):
        Partition(((1,), (0,)), 2).validate()
    with pytest.raises(ValueError):
        Partition(((0,),), 2).validate()


@pytest.mark.parametrize("n,expected", [(1, 1), (2, 5), (3, 109), (4, 32297)])
def test_cover_counts(n, expected):
    assert sum(1 for _ in covers_of(n)) == expected


def test_covers_are_valid_and_contain_partitions():
    covers = list(covers_of(3))
    for c in covers:
        c.validate()
    parts = {c.blocks for c in covers if c.is_partition()}
    assert parts == {p.blocks for p in partitions_of(3)}


def test_cover_capacity():
    with pytest.raises(CapacityError):
        next(covers_of(6))
    with pytest.raises(ValueError):
        Cover(((0,), (0,)), 1).validate()


@given(st.integers(0, 10))
def test_subsets_of(n):
    subs = list(subsets_of(n))
    assert len(subs) == 2 ** n
    assert [len(s) for s in subs] == sorted(len(s) for s in subs)
    assert len(nonempty_subsets(n)) == 2 ** n - 1


@given(st.sets(st.integers(0, 15)))
def test_mask_round_trip(s):
    sub = tuple(sorted(s))
    assert mask_to_subset(subset_mask(sub)) == sub
