import itertools
import math

import pytest

from src.core.errors import InputUnsorted, SizeNotPow2
from src.services.batcher import (
    CompareSchedule,
    apply_schedule,
    batcher_sort,
    bitonic_merge,
    flip,
    merge_schedule,
    shift,
    sort_schedule,
)


def test_merge_schedule_small_cases():
    assert merge_schedule(1).layers == (((0, 1),),)
    assert merge_schedule(2).layers == (((0, 2), (1, 3)), ((0, 1), (2, 3)))
    three = merge_schedule(3)
    assert three.depth == 3
    assert all(len(layer) == 4 for layer in three.layers)


def test_first_layer_pairs_each_index_with_its_flip():
    k = 4
    for lo, hi in merge_schedule(k).layers[0]:
        assert flip(lo, k) == hi


def test_shift_is_a_rotation():
    k = 3
    assert shift(0b100, k) == 0b001
    assert shift(0b011, k) == 0b110
    i = 0b101
    for _ in range(k):
        i = shift(i, k)
    assert i == 0b101


def test_schedule_rejects_overlapping_layer():
    with pytest.raises(ValueError):
        CompareSchedule(4, (((0, 1), (1, 2)),))


def test_merge_examples():
    assert bitonic_merge([1, 3, 5, 7], [2, 4, 6, 8]) == list(range(1, 9))
    assert bitonic_merge([9], [4]) == [4, 9]
    assert bitonic_merge([2, 2], [2, 2]) == [2, 2, 2, 2]


def test_merge_errors():
    with pytest.raises(InputUnsorted):
        bitonic_merge([3, 1], [2, 4])
    with pytest.raises(SizeNotPow2):
        bitonic_merge([1, 2], [3])


def test_merge_pads_unequal_lengths():
    assert bitonic_merge([1, 5], [2], pad=True) == [1, 2, 5]
    assert bitonic_merge([1, 4, 6], [0, 2, 3, 9, 10], pad=True) == [0, 1, 2, 3, 4, 6, 9, 10]
    merged = bitonic_merge([3], [1, 2, 7, 8, 11], pad=True)
    assert merged == [1, 2, 3, 7, 8, 11]
    assert math.inf not in merged


def test_empty_padded_merge():
    assert bitonic_merge([], [], pad=True) == []
    assert bitonic_merge([], []) == []
    assert bitonic_merge([], [4, 7, 9], pad=True) == [4, 7, 9]


def test_later_layers_flip_lower_address_bits():
    k = 4
    for level, layer in enumerate(merge_schedule(k).layers):
        assert all(hi == lo ^ (1 << (k - 1 - level)) for lo, hi in layer)


def test_merge_random_against_sorted(rng):
    for _ in range(300):
        n = rng.randint(1, 40)
        a = sorted(rng.randint(0, 50) for _ in range(rng.randint(0, n)))
        b = sorted(rng.randint(0, 50) for _ in range(n - len(a)))
        assert bitonic_merge(a, b, pad=True) == sorted(a + b)


def test_sort_depth():
    assert batcher_sort(list(range(16, 0, -1))) == (list(range(1, 17)), 10)
    for k in range(1, 8):
        assert sort_schedule(k).depth == k * (k + 1) // 2


def test_sorted_input_unchanged():
    data = [0, 1, 1, 4, 5, 9, 12, 20]
    assert batcher_sort(data)[0] == data


def test_sort_rejects_bad_length():
    with pytest.raises(SizeNotPow2):
        batcher_sort([3, 2, 1])
    with pytest.raises(SizeNotPow2):
        apply_schedule(sort_schedule(2), [1, 2])


def test_single_element():
    assert batcher_sort([7]) == ([7], 0)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_zero_one_principle(k):
    schedule = sort_schedule(k)
    for bits in itertools.product((0, 1), repeat=1 << k):
        assert apply_schedule(schedule, bits) == sorted(bits)


@pytest.mark.slow
def test_zero_one_principle_sixteen():
    schedule = sort_schedule(4)
    for bits in itertools.product((0, 1), repeat=16):
        assert apply_schedule(schedule, bits) == sorted(bits)


def _random_arrays(rng, count):
    for _ in range(count):
        size = 1 << rng.randint(1, 8)
        yield [rng.randint(-1000, 1000) for _ in range(size)]


def test_sort_agrees_with_sorted(rng):
    for arr in _random_arrays(rng, 400):
        out, _ = batcher_sort(arr)
        assert out == sorted(arr)


@pytest.mark.slow
def test_sort_agrees_with_sorted_many(rng):
    for arr in _random_arrays(rng, 10_000):
        assert batcher_sort(arr)[0] == sorted(arr)
