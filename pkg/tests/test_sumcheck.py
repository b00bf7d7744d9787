import itertools

import pytest

from src.core.errors import BadInput, CapExceeded, FalseClaim
from src.services.games import solve_dfs
from src.services.sumcheck import (
    FieldOracle,
    RoundPoly,
    SmallFieldWarning,
    arith_game_rule,
    best_response_prover,
    honest_prover,
    initial_state,
    interpolate,
    run_protocol,
    shift_register_game,
    shifted_prover,
    soundness_rate,
    total_rounds,
    v_brute,
    verifier_round,
)
from src.utils.utils import derive_rng

P17 = 131_071  # 2^17 - 1


def _bits(s):
    return list(itertools.product((0, 1), repeat=s))


# ------------------------
# Aritmética
# ------------------------
def test_interpolation_recovers_line():
    assert interpolate([(0, 1), (1, 3), (2, 5)], 7) == (1, 2)


def test_interpolation_rejects_repeated_points():
    with pytest.raises(BadInput):
        interpolate([(0, 1), (7, 2)], 7)


def test_round_poly_degree_bound():
    assert RoundPoly((1, 2, 0, 0), P17).degree == 1
    with pytest.raises(BadInput):
        RoundPoly((0,) * 7 + (1,), P17)


def test_round_poly_evaluation():
    poly = RoundPoly((3, 0, 1), 11)
    assert poly(4) == (3 + 16) % 11


# ------------------------
# Juego booleano
# ------------------------
def test_v_brute_base_case():
    g = shift_register_game(3, 0)
    for x in _bits(3):
        assert v_brute(g, 0, x) == x[0]


def test_v_brute_both_children_losing():
    g = shift_register_game(3, 1)
    # x = 000: los hijos son 000 y 001, ambos con x1 = 0
    assert v_brute(g, 1, "000") == 1


def test_v_brute_matches_game_solver(rng):
    for _ in range(5):
        taps = [rng.randint(0, 1) for _ in range(4)]
        g = shift_register_game(4, 3, taps)
        rule = arith_game_rule(g)
        for x in _bits(4):
            expected = 1 if solve_dfs(rule, (0, 3) + x) == 1 else 0
            assert v_brute(g, 3, x) == expected, (taps, x)


def test_v_brute_limits():
    g = shift_register_game(3, 2)
    with pytest.raises(CapExceeded):
        v_brute(g, 99, "000")
    with pytest.raises(BadInput):
        v_brute(g, 1, "00")


def test_game_construction_errors():
    with pytest.raises(BadInput):
        shift_register_game(1, 1)
    with pytest.raises(BadInput):
        shift_register_game(3, 1, taps=(0, 1, 2, 0))
    with pytest.raises(BadInput):
        shift_register_game(30, 1)


def test_each_variable_in_at_most_two_factors():
    g = shift_register_game(5, 2)
    uses = {}
    for f in g.factors:
        for var in f.variables:
            uses[var] = uses.get(var, 0) + 1
    assert max(uses.values()) <= 2


def test_arithmetized_value_matches_boolean_value():
    for s in (2, 3, 4):
        g = shift_register_game(s, 2)
        oracle = FieldOracle(g, P17)
        for c in range(3):
            for x in _bits(s):
                assert oracle.value(c, x) == v_brute(g, c, x)


def test_transition_term_is_indicator_on_bits():
    g = shift_register_game(3, 1)
    for m in (0, 1):
        for x in _bits(3):
            for y in _bits(3):
                assert g.t(m, x, y, P17) == (1 if y == g.transition(m, x) else 0)


# ------------------------
# Protocolo
# ------------------------
def _game(s=3, c=2):
    return shift_register_game(s, c)


def test_total_rounds():
    assert total_rounds(shift_register_game(4, 3)) == 15


def test_honest_runs_accept_and_keep_round_identity():
    g = _game()
    oracle = FieldOracle(g, P17)
    for x in _bits(3):
        v = v_brute(g, g.c, x)
        for i in range(3):
            run = run_protocol(oracle, initial_state(g, x, v), honest_prover, derive_rng(7, x, i), keep_transcript=True)
            assert run.accepted
            assert run.rounds == total_rounds(g)
            for st, coeffs, _ in run.transcript:
                poly = RoundPoly(coeffs, P17)
                assert poly.degree <= 6
                if len(st.y) < g.s:
                    assert (poly(0) + poly(1)) % P17 == st.v % P17
                else:
                    assert oracle.t_of(st) * (1 - poly(0) * poly(1)) % P17 == st.v % P17


def test_honest_prover_refuses_false_claim():
    g = _game()
    oracle = FieldOracle(g, P17)
    v = v_brute(g, g.c, "101")
    with pytest.raises(FalseClaim):
        honest_prover(oracle, initial_state(g, "101", 1 - v))


def test_verifier_rejects_broken_identity():
    g = _game()
    oracle = FieldOracle(g, P17)
    st = initial_state(g, "011", v_brute(g, g.c, "011"))
    st = verifier_round(oracle, st, honest_prover(oracle, st), 5)
    assert st is not None and len(st.y) == 0
    good = honest_prover(oracle, st)
    bad = RoundPoly(((good.coeffs[0] + 1) % P17,) + good.coeffs[1:], P17)
    assert verifier_round(oracle, st, bad, 3) is None
    assert verifier_round(oracle, st, RoundPoly(good.coeffs, 13), 3) is None


def test_zero_rounds_checks_first_bit():
    g = shift_register_game(3, 0)
    oracle = FieldOracle(g, P17)
    assert run_protocol(oracle, initial_state(g, "100", 1), honest_prover, derive_rng(1)).accepted
    assert not run_protocol(oracle, initial_state(g, "100", 0), shifted_prover, derive_rng(1)).accepted


def test_honest_claim_rate_is_one():
    g = _game()
    v = v_brute(g, g.c, "110")
    assert soundness_rate(g, "110", v, honest_prover, trials=20, seed=3) == 1.0


@pytest.mark.parametrize("strategy", [shifted_prover, best_response_prover])
def test_false_claims_are_caught(strategy):
    g = _game()
    v = v_brute(g, g.c, "010")
    rate = soundness_rate(g, "010", 1 - v, strategy, trials=60, seed=11, p=P17)
    assert rate <= 0.01


@pytest.mark.slow
def test_soundness_bound_s4_c3():
    g = shift_register_game(4, 3)
    v = v_brute(g, 3, "1011")
    rate = soundness_rate(g, "1011", 1 - v, best_response_prover, trials=300, seed=5)
    assert rate <= 0.01


@pytest.mark.slow
def test_completeness_thousand_runs():
    g = shift_register_game(4, 3)
    v = v_brute(g, 3, "0110")
    assert soundness_rate(g, "0110", v, honest_prover, trials=1000, seed=9) == 1.0


def test_small_field_warns():
    with pytest.warns(SmallFieldWarning):
        FieldOracle(_game(), 2)


def test_soundness_needs_trials():
    with pytest.raises(BadInput):
        soundness_rate(_game(), "000", 0, honest_prover, trials=0, seed=1)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_honest_prover_is_complete_in_small_fields(p):
    g = _game()
    for bits in _bits(g.s):
        x = "".join(map(str, bits))
        v = v_brute(g, g.c, x)
        with pytest.warns(SmallFieldWarning):
            assert soundness_rate(g, x, v, honest_prover, trials=10, seed=2, p=p) == 1.0


def test_false_claim_often_passes_in_z2():
    g = _game()
    v = v_brute(g, g.c, "010")
    with pytest.warns(SmallFieldWarning):
        rate = soundness_rate(g, "010", 1 - v, shifted_prover, trials=200, seed=4, p=2)
    assert rate >= 0.3
