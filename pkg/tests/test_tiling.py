import itertools

import pytest

from src.core.errors import BadInput, BudgetExceeded, HeightTooLarge
from src.services.machine_core import HaltMode
from src.services.tiling import (
    Tile,
    TilingInstance,
    brute_force_extendable,
    sides_match,
    solve_backtrack,
    solve_narrow_dp,
    tiles_from_run,
)
from tests.helpers import make_tm

T1 = Tile("a", "x", "m", "r")
T2 = Tile("x", "c", "r", "z")
T3 = Tile("m", "r", "n", "s")
T4 = Tile("r", "z", "s", "z")


def _figure_instance(height=2):
    return TilingInstance((T1, T2, T3, T4), (T1, T2), height)


def test_sides_match_examples():
    assert sides_match(T1, T2, "right")
    assert sides_match(T1, T3, "below")
    assert not sides_match(T1, T1, "right")
    with pytest.raises(BadInput):
        sides_match(T1, T2, "diagonal")


def test_figure_instance_is_solvable():
    result = solve_backtrack(_figure_instance())
    assert result.ok
    assert result.rows == ((T1, T2), (T3, T4))
    assert solve_narrow_dp(_figure_instance())


def test_figure_instance_cannot_grow_a_third_row():
    # nada tiene (n, s) ni (s, z) arriba
    assert not solve_backtrack(_figure_instance(3)).ok
    assert not solve_narrow_dp(_figure_instance(3))


def test_empty_tile_set():
    inst = TilingInstance((), (T1,), 2)
    assert not solve_backtrack(inst).ok
    assert not solve_narrow_dp(inst)


def test_single_row_depends_on_first_row_only():
    assert solve_backtrack(TilingInstance((), (T1, T2), 1)).ok
    assert not solve_backtrack(TilingInstance((T1, T2), (T2, T1), 1)).ok
    assert not solve_narrow_dp(TilingInstance((T1, T2), (T2, T1), 1))


def test_instance_validation():
    with pytest.raises(BadInput):
        TilingInstance((T1,), (T1,), 0)
    with pytest.raises(BadInput):
        TilingInstance((T1,), (), 2)
    assert _figure_instance().alphabet == frozenset("axmrcznzs")


def test_dp_refuses_tall_boards():
    with pytest.raises(HeightTooLarge):
        solve_narrow_dp(TilingInstance((T1, T2, T3, T4), (T1, T2), 5))


def test_backtrack_budget():
    with pytest.raises(BudgetExceeded):
        solve_backtrack(_figure_instance(), budget=1)


def _random_instance(rng, width, height, letters="abc", extra=14):
    columns = [(rng.choice(letters), rng.choice(letters)) for _ in range(width + 1)]
    first = tuple(
        Tile(columns[i][0], columns[i + 1][0], columns[i][1], columns[i + 1][1]) for i in range(width)
    )
    tiles = {Tile(*(rng.choice(letters) for _ in range(4))) for _ in range(extra)}
    return TilingInstance(tuple(sorted(tiles | set(first), key=str)), first, height)


def test_dp_agrees_with_backtracking_on_random_instances(rng):
    for _ in range(50):
        width = rng.randint(2, 6)
        inst = _random_instance(rng, width, 3)
        assert solve_narrow_dp(inst) == solve_backtrack(inst).ok


def test_width_eight_height_three(rng):
    for _ in range(10):
        inst = _random_instance(rng, 8, 3, letters="ab", extra=8)
        assert solve_narrow_dp(inst) == solve_backtrack(inst).ok


def test_renaming_letters_preserves_answers(rng):
    swap = str.maketrans("abc", "cab")

    def rename(t):
        return Tile(*(s.translate(swap) for s in (t.nw, t.ne, t.sw, t.se)))

    for _ in range(20):
        inst = _random_instance(rng, 4, 3)
        renamed = TilingInstance(
            tuple(rename(t) for t in inst.tiles), tuple(rename(t) for t in inst.first_row), inst.height
        )
        assert solve_backtrack(inst).ok == solve_backtrack(renamed).ok


def test_backtracking_witness_is_a_valid_tiling(rng):
    for _ in range(20):
        inst = _random_instance(rng, 4, 3)
        result = solve_backtrack(inst)
        if not result.ok:
            continue
        rows = result.rows
        assert rows[0] == inst.first_row
        for r, row in enumerate(rows):
            for c, tile in enumerate(row):
                assert tile in inst.tiles or r == 0
                if c:
                    assert sides_match(row[c - 1], tile, "right")
                if r:
                    assert sides_match(rows[r - 1][c], tile, "below")


# ------------------------
# Reducción
# ------------------------
def test_reduction_height_one_always_extendable(increment):
    assert solve_backtrack(tiles_from_run(increment, "1", 1)).ok


def test_looping_machine_extends_at_every_height(looper):
    for height in range(1, 6):
        inst = tiles_from_run(looper, "0", height)
        assert solve_backtrack(inst).ok, height


def test_halting_state_stops_the_table():
    tm = make_tm(
        {(0, 0): (1, 0, "R"), (0, 1): (1, 1, "R")},
        state_count=2,
        halt_mode=HaltMode.EXPLICIT_HALT_STATE,
        halt_states={1},
    )
    assert solve_backtrack(tiles_from_run(tm, "1", 2)).ok
    assert not solve_backtrack(tiles_from_run(tm, "1", 3)).ok
    assert not brute_force_extendable(tm, "1", 3)


def _reduction_cases(suite_machines, max_v, max_height):
    for name, tm in suite_machines.items():
        for n in range(max_v + 1):
            for v in itertools.product((0, 1), repeat=n):
                for height in range(1, max_height + 1):
                    yield name, tm, v, height


def test_reduction_matches_brute_force(suite_machines):
    for name, tm, v, height in _reduction_cases(suite_machines, 1, 4):
        inst = tiles_from_run(tm, v, height)
        expected = brute_force_extendable(tm, v, height)
        assert solve_backtrack(inst).ok == expected, (name, v, height)


def test_reduction_dp_matches_backtracking(suite_machines):
    for name, tm, v, height in _reduction_cases(suite_machines, 1, 3):
        inst = tiles_from_run(tm, v, height)
        assert solve_narrow_dp(inst) == solve_backtrack(inst).ok, (name, v, height)


def test_one_cell_witness():
    tm = make_tm(
        {
            (0, 0): (1, 0, "R"),
            (0, 1): (1, 1, "R"),
            (1, 0): (2, 0, "L"),
            (1, 1): (1, 1, "L"),
            (2, 0): (2, 0, "L"),
            (2, 1): (2, 1, "L"),
        },
    )
    assert brute_force_extendable(tm, "0", 4, witness_len=1) == solve_backtrack(
        tiles_from_run(tm, "0", 4, witness_len=1)
    ).ok


@pytest.mark.slow
def test_reduction_matches_brute_force_larger(suite_machines):
    for name, tm, v, height in _reduction_cases(suite_machines, 3, 6):
        inst = tiles_from_run(tm, v, height)
        assert solve_backtrack(inst).ok == brute_force_extendable(tm, v, height), (name, v, height)
