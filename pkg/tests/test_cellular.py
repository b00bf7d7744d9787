import itertools

import numpy as np
import pytest

from src.core.errors import SymbolOutOfAlphabet
from src.services.cellular import (
    BLINKER_HORIZONTAL,
    BLINKER_VERTICAL,
    BLOCK,
    GLIDER,
    CA1D,
    Boundary,
    LifeGrid,
    ca_run,
    ca_step,
    elementary_rule,
    empty_grid,
    identity_rule,
    life_run,
    life_step,
    place,
    ww_ca_batch,
    ww_ca_recognizer,
)
from src.services.machine_core import is_ww


def _shift_right():
    return CA1D(frozenset({"0", "1"}), lambda l, s, r: l, "0")


# ------------------------
# CA 1D
# ------------------------
def test_identity_rule_repeats_row():
    ca = identity_rule("01", "0")
    rows = ca_run(ca, "1011", 3)
    assert len(rows) == 4
    assert all(row == tuple("1011") for row in rows)


def test_shift_rule_moves_the_one_right():
    assert ca_run(_shift_right(), "100", 2) == [tuple("100"), tuple("010"), tuple("001")]


def test_quiescent_row_stays_quiescent():
    assert ca_step(elementary_rule(110), "0000") == tuple("0000")


def test_rule_90_is_xor_of_neighbours():
    assert ca_step(elementary_rule(90), "00100") == tuple("01010")


def test_symbol_outside_alphabet():
    with pytest.raises(SymbolOutOfAlphabet):
        ca_run(identity_rule("01", "0"), "012", 1)


def test_empty_row_rejected():
    with pytest.raises(ValueError):
        ca_run(identity_rule("01", "0"), "", 1)


def test_quiescent_must_be_fixed_point():
    with pytest.raises(ValueError):
        CA1D(frozenset({"0", "1"}), lambda l, s, r: "1", "0")
    with pytest.raises(ValueError):
        elementary_rule(1)


# ------------------------
# Juego de la Vida
# ------------------------
def test_empty_grid_stays_empty():
    grid = empty_grid(5, 5)
    assert life_step(grid) == grid


def test_block_is_still_life_with_dead_edge():
    grid = place(empty_grid(4, 4, Boundary.DEAD_EDGE), BLOCK, 1, 1)
    assert life_step(grid) == grid


def test_blinker_has_period_two():
    vertical = place(empty_grid(5, 5), BLINKER_VERTICAL, 1, 1)
    horizontal = place(empty_grid(5, 5), BLINKER_HORIZONTAL, 1, 1)
    assert life_step(vertical) == horizontal
    assert life_step(horizontal) == vertical


def test_glider_moves_diagonally_every_four_steps():
    grid = place(empty_grid(8, 8), GLIDER)
    after = life_run(grid, 4)[-1]
    assert after == place(empty_grid(8, 8), GLIDER, 1, 1)
    assert after.population() == 5


def test_dead_edge_cuts_off_neighbours():
    # En el toro de 4x4 las tres esquinas son vecinas; con borde muerto no.
    cells = np.zeros((4, 4), dtype=bool)
    cells[0, 0] = cells[0, 3] = cells[3, 0] = True
    assert life_step(LifeGrid(cells, Boundary.DEAD_EDGE)).population() == 0
    assert life_step(LifeGrid(cells, Boundary.TORUS)).population() >= 3


def test_life_commutes_with_translation_on_torus(rng):
    for _ in range(20):
        cells = np.array([[rng.random() < 0.35 for _ in range(9)] for _ in range(7)])
        dy, dx = rng.randrange(7), rng.randrange(9)
        grid = LifeGrid(cells)
        shifted = LifeGrid(np.roll(cells, (dy, dx), axis=(0, 1)))
        expected = np.roll(life_step(grid).cells, (dy, dx), axis=(0, 1))
        assert np.array_equal(life_step(shifted).cells, expected)


# ------------------------
# ww como autómata celular
# ------------------------
@pytest.mark.parametrize("word, expected", [("aabbaabb", True), ("ab", False), ("aa", True), ("", True), ("aba", False)])
def test_ww_ca_examples(word, expected):
    assert ww_ca_recognizer(word)[0] is expected


def _all_words(n):
    return ["".join(p) for p in itertools.product("ab", repeat=n)]


def _check_lengths(lengths):
    for n in lengths:
        words = _all_words(n)
        for word, (accept, depth) in zip(words, ww_ca_batch(words)):
            assert accept == is_ww(word), word
            assert 0 < depth <= 8 * n + 8, word


def test_ww_ca_agrees_with_predicate_up_to_12():
    _check_lengths(range(1, 13))


@pytest.mark.slow
def test_ww_ca_agrees_with_predicate_up_to_16():
    _check_lengths(range(13, 17))


def test_ww_ca_depth_is_linear():
    ratios = [ww_ca_recognizer("ab" * k * 2)[1] / (4 * k) for k in (1, 2, 4, 8)]
    assert max(ratios) <= 10


def test_ww_ca_batch_requires_equal_lengths():
    with pytest.raises(ValueError):
        ww_ca_batch(["ab", "aab"])
    with pytest.raises(SymbolOutOfAlphabet):
        ww_ca_recognizer("abc")
