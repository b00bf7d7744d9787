import itertools

import pytest

from src.core.errors import (
    BadInput,
    DepthOverflow,
    MalformedTable,
    MalformedTriple,
    NotBinary,
    StateSpaceOverflow,
)
from src.services.games import (
    SIDE_S,
    SIDE_W,
    gender_winner,
    halting_game,
    linear_chess,
    linear_chess_table,
    make_piece,
    match_game,
    one_d_chess,
    solve_dfs,
    solve_position,
    solve_retrograde,
)
from src.services.machine_core import bounded_halt

WM = make_piece(SIDE_W, 0, 1)
WF = make_piece(SIDE_W, 1, 1)
SM = make_piece(SIDE_S, 0, 1)
SF = make_piece(SIDE_S, 1, 1)
TYPES = (WM, WF, SM, SF)
TRIPLES = [(SM, WM, SM), (WM, SF, WM)]


# ------------------------
# Cerillas
# ------------------------
def test_match_small_positions():
    g = match_game()
    assert solve_position(g, g.start((1, 0, 0))) == -1
    assert solve_position(g, g.start((2, 0, 0))) == 1
    assert solve_position(g, g.start((1, 1, 0))) == 1


def test_match_333_first_player_wins():
    g = match_game()
    assert solve_position(g, g.start((3, 3, 3))) == 1
    assert solve_dfs(g, g.start((3, 3, 3))) == 1


def test_match_value_invariant_under_permutation():
    g = match_game()
    values = {solve_position(g, g.start(p)) for p in itertools.permutations((1, 2, 3))}
    # 1 ^ 2 ^ 3 == 0: pierde quien empieza
    assert values == {-1}


def test_match_second_player_view():
    g = match_game()
    assert solve_position(g, g.start((2, 0, 0), player=1)) == -1


def test_dfs_agrees_with_retrograde_on_every_match_position():
    g = match_game()
    table = solve_retrograde(g, [g.start((3, 3, 3))])
    assert table.unresolved == 0
    for key, x in table.positions.items():
        assert solve_dfs(g, x) == table.values[key], g.describe(x)


def test_cycle_listing_covers_all_positions():
    g = match_game()
    seen = {}

    def record(cycle, evaluated):
        seen.setdefault(cycle, {}).update(evaluated)

    table = solve_retrograde(g, [g.start((2, 2, 1))], on_cycle=record)
    assert min(seen) == 0
    assert sum(len(v) for v in seen.values()) == len(table)


def test_state_cap_and_depth_cap():
    g = match_game()
    with pytest.raises(StateSpaceOverflow):
        solve_retrograde(g, [g.start((3, 3, 3))], cap=10)
    with pytest.raises(DepthOverflow):
        solve_dfs(g, g.start((3, 3, 3)), depth_cap=2)


def test_negative_boxes_rejected():
    with pytest.raises(BadInput):
        match_game().start((1, -1, 0))


# ------------------------
# Ajedrez lineal y 1d-Chess
# ------------------------
def test_gender_rules():
    assert gender_winner(WM, SM) == SIDE_S
    assert gender_winner(WM, SF) == SIDE_W
    assert gender_winner(WF, SF) == SIDE_S


def test_linear_chess_fights():
    g = linear_chess(TYPES, TRIPLES)
    assert solve_position(g, g.start([WM, SM], budget=3)) == -1
    assert solve_position(g, g.start([WM, WM, SF], budget=3)) == 1
    assert solve_position(g, g.start([WM, WM, SM], budget=3)) == -1


def test_linear_chess_budget_runs_out():
    g = linear_chess(TYPES, TRIPLES)
    assert solve_position(g, g.start([WM, WM, SF, SF], budget=2)) == 1
    assert solve_position(g, g.start([WM, WM, SF, SF], budget=1)) == -1


def test_fight_without_triple_loses_for_winner():
    g = linear_chess(TYPES, TRIPLES)
    # WF contra SM: gana W por sexo, pero no hay triple que lo permita
    assert solve_position(g, g.start([WF, SM], budget=4)) == -1


def test_malformed_triples():
    with pytest.raises(MalformedTriple):
        linear_chess(TYPES, [(WM, SM, WM)])
    with pytest.raises(MalformedTriple):
        linear_chess(TYPES, [(WM, SF, SF)])
    with pytest.raises(MalformedTriple):
        linear_chess((WM, SM), [(SM, WM, SF)])


def test_board_with_w_right_of_s_rejected():
    g = linear_chess(TYPES, TRIPLES)
    with pytest.raises(BadInput):
        g.start([SM, WM], budget=2)


def test_one_d_chess_matches_linear_chess():
    linear = linear_chess(TYPES, TRIPLES)
    table_game = one_d_chess(linear_chess_table(TYPES, TRIPLES))
    for board in itertools.product(TYPES, repeat=3):
        sides = [p >> 7 for p in board]
        if sides != sorted(sides):
            continue
        for budget in (1, 3):
            assert solve_position(linear, linear.start(board, budget)) == solve_position(
                table_game, table_game.start(board, budget)
            ), board


def test_one_d_chess_promotion():
    promoted = make_piece(SIDE_W, 0, 9)
    g = one_d_chess({(WM, SM): (SIDE_W, [(promoted, promoted)])})
    table = solve_retrograde(g, [g.start([WM, SM], budget=1)])
    assert table.value_of(g, (0, promoted, promoted)) == 1
    assert table.value_of(g, (1, WM, SM)) == 1


def test_one_d_chess_rejects_bad_tables():
    with pytest.raises(MalformedTable):
        one_d_chess({(WM, SM): (SIDE_W, [(WM, SM)])})
    with pytest.raises(MalformedTable):
        one_d_chess({(SM, WM): (SIDE_S, [(SM, SM)])})
    g = one_d_chess({(WM, SM): (SIDE_S, [(SM, SM)])})
    with pytest.raises(MalformedTable):
        solve_position(g, g.start([WF, SF], budget=2))


def _rename(piece):
    return make_piece(piece >> 7, (piece >> 6) & 1, (piece & 0x3F) + 7)


def test_values_stable_under_piece_renaming(rng):
    table = linear_chess_table(TYPES, TRIPLES)
    renamed = {
        (_rename(l), _rename(r)): (w, [(_rename(a), _rename(b)) for a, b in outs])
        for (l, r), (w, outs) in table.items()
    }
    g1, g2 = one_d_chess(table), one_d_chess(renamed)
    for _ in range(25):
        board = sorted((rng.choice(TYPES) for _ in range(3)), key=lambda p: p >> 7)
        budget = rng.randint(1, 3)
        assert solve_position(g1, g1.start(board, budget)) == solve_position(
            g2, g2.start([_rename(p) for p in board], budget)
        )


# ------------------------
# Juego de la parada
# ------------------------
def _words(max_len):
    for n in range(max_len + 1):
        yield from itertools.product((0, 1), repeat=n)


def test_halting_game_matches_bounded_halt(suite_machines):
    for tm in suite_machines.values():
        for x in _words(2):
            g = halting_game(tm, x)
            value = solve_position(g, g.start())
            assert (value == 1) == bounded_halt(tm, x, 2 ** len(x)), x


@pytest.mark.slow
def test_halting_game_matches_bounded_halt_length_3(suite_machines):
    for tm in suite_machines.values():
        for x in itertools.product((0, 1), repeat=3):
            g = halting_game(tm, x)
            assert (solve_position(g, g.start()) == 1) == bounded_halt(tm, x, 8), x


def test_halting_game_both_outcomes(increment, looper):
    # increment sobre "1" necesita 3 pasos, más que 2^1
    g = halting_game(increment, (1,))
    assert solve_position(g, g.start()) == -1
    g = halting_game(increment, (0, 1))
    assert solve_position(g, g.start()) == 1
    g = halting_game(looper, (0,))
    assert solve_position(g, g.start()) == -1


def test_halting_game_dfs_agrees(suite_machines):
    for tm in suite_machines.values():
        for x in _words(1):
            g = halting_game(tm, x)
            assert solve_dfs(g, g.start()) == solve_position(g, g.start())


def test_halting_game_initial_row_is_legal(eraser):
    g = halting_game(eraser, (0,))
    fills = g.legal_fills(1, 1, g.transition(1, *(g.initial_cell(1 + s) for s in (-1, 0, 1))))
    assert fills == [tuple(g.initial_cell(1 + s) for s in (-1, 0, 1))]


def test_halting_game_preconditions(flip_right, increment):
    with pytest.raises(NotBinary):
        halting_game(flip_right, (0,))
    with pytest.raises(BadInput):
        halting_game(increment, (0,) * 5)
