import itertools
import math

import numpy as np
import pytest

from src.core.errors import (
    BadInput,
    KeyMismatch,
    LengthMismatch,
    NotCoprime,
    NotResidue,
    NotToeplitz,
    ShapeMismatch,
)
from src.services.crypto import (
    BlumKey,
    bbs_generator,
    bg_decrypt,
    bg_encrypt,
    bg_keystream,
    blum_keygen,
    constant_oracle,
    extractor_distance,
    factor_with_inverter,
    flat_source_sample,
    fold_source,
    fwht,
    gl_invert,
    gl_invert_checked,
    gl_width,
    hardcore_bit,
    is_residue,
    joint_distance,
    nextbit_hybrid,
    noisy_oracle,
    parity_oracle,
    prg_states,
    prg_stream,
    quadratic_residues,
    rabin_forward,
    rabin_invert,
    sign_release,
    tm_acceptor,
    toeplitz_extract,
    toeplitz_from_bits,
    verify_sig,
)
from src.services.machine_core import HaltMode
from src.services.numtheory import trial_division_is_prime
from src.utils.utils import bits_to_int
from tests.helpers import make_tm


# ------------------------
# Rabin y claves
# ------------------------
def test_blum_key_parameters(blum21):
    assert blum21.t == 3
    assert blum21.u == 2
    with pytest.raises(ValueError):
        BlumKey(n=15, p=3, q=5)
    with pytest.raises(ValueError):
        BlumKey(n=22, p=3, q=7)


def test_residues_of_21(blum21):
    assert quadratic_residues(blum21) == [1, 4, 16]
    assert {y: rabin_forward(y, 21) for y in (1, 4, 16)} == {1: 1, 4: 16, 16: 4}
    assert rabin_invert(16, blum21) == 4
    assert rabin_invert(1, blum21) == 1


def test_rabin_errors(blum21):
    with pytest.raises(NotCoprime):
        rabin_forward(3, 21)
    with pytest.raises(NotResidue):
        rabin_invert(2, blum21)


def _blum_primes(limit):
    return [p for p in range(3, limit) if p % 4 == 3 and trial_division_is_prime(p)]


def _blum_keys(max_n):
    primes = _blum_primes(max_n // 3 + 1)
    for p, q in itertools.combinations(primes, 2):
        if p * q <= max_n:
            yield BlumKey(n=p * q, p=p, q=q)


def _check_permutation(key):
    residues = quadratic_residues(key)
    images = sorted(rabin_forward(y, key.n) for y in residues)
    assert images == residues
    for y in residues:
        assert rabin_invert(rabin_forward(y, key.n), key) == y
        assert is_residue(y, key)


def test_squaring_permutes_residues_small_moduli():
    for key in _blum_keys(1500):
        _check_permutation(key)


@pytest.mark.slow
def test_squaring_permutes_residues_up_to_10000():
    for key in _blum_keys(10_000):
        if key.n > 1500:
            _check_permutation(key)


def test_inverter_factors_the_modulus(blum21, rng):
    f = factor_with_inverter(21, lambda y: rabin_invert(y, blum21), rng)
    assert f in (3, 7)


def test_keygen(rng):
    key = blum_keygen(16, rng)
    assert key.p % 4 == 3 and key.q % 4 == 3
    assert key.p != key.q
    assert key.t % 2 == 1


# ------------------------
# Bit duro y generador
# ------------------------
def test_hardcore_bit():
    assert hardcore_bit("1101", "1011") == 0
    assert hardcore_bit("1111", "0000") == 0
    with pytest.raises(LengthMismatch):
        hardcore_bit("101", "10")


def test_hardcore_bit_is_linear(rng):
    for _ in range(200):
        x = tuple(rng.getrandbits(1) for _ in range(12))
        y = tuple(rng.getrandbits(1) for _ in range(12))
        p = tuple(rng.getrandbits(1) for _ in range(12))
        xor = tuple(a ^ b for a, b in zip(x, y))
        assert hardcore_bit(xor, p) == hardcore_bit(x, p) ^ hardcore_bit(y, p)


def test_prg_chain_on_21(blum21):
    states = prg_states(4, 21, blum21)
    assert [next(states) for _ in range(4)] == [4, 16, 4, 16]
    unkeyed = prg_states(4, 21)
    assert next(unkeyed) == 16


def test_prg_stream_basics(blum21):
    assert prg_stream(4, "10101", 21, 0, blum21) == ()
    long = prg_stream(4, "10101", 21, 9, blum21)
    assert prg_stream(4, "10101", 21, 8, blum21) == long[:8]
    with pytest.raises(LengthMismatch):
        prg_stream(4, "101", 21, 3)
    with pytest.raises(KeyMismatch):
        prg_stream(4, "10101", 21, 3, BlumKey(n=77, p=7, q=11))


def test_prg_is_balanced(rng):
    key = blum_keygen(32, rng)
    pvec = tuple(rng.getrandbits(1) for _ in range(key.bits))
    stream = prg_stream(rng.randrange(2, key.n - 1) | 1, pvec, key.n, 10_000, key)
    ones = sum(stream) / len(stream)
    assert 0.45 <= ones <= 0.55


# ------------------------
# Blum-Goldwasser y firmas
# ------------------------
def test_bg_hand_example(blum21):
    # s1 = 16, s2 = 4, s3 = 16; v = u^2 mod t = 1
    stream, s_k = bg_keystream(16, (1, 0, 0, 0, 0), 21, 2)
    assert s_k == 16
    assert pow(s_k, pow(blum21.u, 2, blum21.t), 21) == 16
    assert len(stream) == 2


def test_bg_zero_message_is_keystream(rng):
    key = blum_keygen(32, rng)
    ct = bg_encrypt("0" * 16, key.n, rng)
    assert bg_decrypt(ct, key) == (0,) * 16
    # s_1 recuperado da el mismo flujo que se usó
    s1 = pow(ct.s_k, pow(key.u, len(ct.c), key.t), key.n)
    assert bg_keystream(s1, ct.x, key.n, 16)[0] == ct.c


def test_bg_round_trips(rng):
    key = blum_keygen(32, rng)
    for _ in range(100):
        m = tuple(rng.getrandbits(1) for _ in range(rng.randint(0, 40)))
        assert bg_decrypt(bg_encrypt(m, key.n, rng), key) == m


def test_bg_wrong_key(rng):
    key = blum_keygen(16, rng)
    other = blum_keygen(16, rng)
    ct = bg_encrypt("1011", key.n, rng)
    with pytest.raises(KeyMismatch):
        bg_decrypt(ct, other)


def test_signatures():
    x, y = sign_release(4, 21)
    assert y == 16
    assert verify_sig(4, 16, 21)
    assert verify_sig(21 - 4, 16, 21)
    assert not verify_sig(4, 17, 21)


# ------------------------
# Inversión del bit duro
# ------------------------
def test_fwht_matches_definition(rng):
    a = np.array([rng.randint(-3, 3) for _ in range(16)])
    h = fwht(a)
    for z in range(16):
        expected = sum((-1) ** bin(z & r).count("1") * int(a[r]) for r in range(16))
        assert h[z] == expected


def test_gl_noiseless_recovery(rng):
    for _ in range(10):
        x = tuple(rng.getrandbits(1) for _ in range(16))
        candidates = gl_invert(parity_oracle(x), 16, 1.0, rng)
        assert len(candidates) == 1 << gl_width(16, 1.0)
        assert x in candidates


def test_gl_noisy_recovery_rate(rng):
    hits = 0
    trials = 20
    for t in range(trials):
        x = tuple(rng.getrandbits(1) for _ in range(12))
        hits += x in gl_invert(noisy_oracle(x, 0.2, seed=t), 12, 0.2, rng)
    assert hits / trials > 0.5


def test_gl_constant_oracle_gives_only_trivial_candidates(rng):
    candidates = set(gl_invert(constant_oracle(), 10, 1.0, rng))
    assert candidates <= {(0,) * 10, (1,) * 10}


def test_gl_checked_inverts_squaring(rng):
    key = BlumKey(n=77, p=7, q=11)
    k = key.bits
    for x_int in (4, 9, 15, 60):
        x = tuple(int(b) for b in format(x_int, f"0{k}b"))
        y = rabin_forward(x_int, key.n)
        found = gl_invert_checked(
            parity_oracle(x), k, 1.0, rng, lambda cand: bits_to_int(cand) ** 2 % key.n, y
        )
        assert found is not None
        assert bits_to_int(found) ** 2 % key.n == y


# ------------------------
# Extractor
# ------------------------
def test_toeplitz_construction():
    Z = toeplitz_from_bits([1, 0, 1, 1], 3, 2)
    assert Z.shape == (3, 2)
    assert (Z[1:, 1:] == Z[:-1, :-1]).all()
    with pytest.raises(ShapeMismatch):
        toeplitz_from_bits([1, 0], 3, 2)


def test_extract_edge_cases():
    Z = toeplitz_from_bits([1, 0, 1], 3, 1)
    assert not toeplitz_extract(np.zeros((4, 3), dtype=int), Z).any()
    X = np.array([[1, 1, 0], [1, 1, 1]])
    out = toeplitz_extract(X, Z)
    assert out[:, 0].tolist() == [(row @ Z[:, 0]) % 2 for row in X]
    with pytest.raises(NotToeplitz):
        toeplitz_extract(X, np.array([[1, 0], [0, 0], [0, 1]]))
    with pytest.raises(ShapeMismatch):
        toeplitz_extract(X, np.ones((2, 2), dtype=int))


def test_fold_source():
    assert fold_source([1, 0, 1, 1, 0, 0], 3).shape == (2, 3)
    with pytest.raises(ShapeMismatch):
        fold_source([1, 0, 1, 1], 3)


def test_flat_source_rows_come_from_support(rng):
    X = flat_source_sample([3, 12], 4, 10, rng)
    assert X.shape == (10, 4)
    assert {bits_to_int(row.tolist()) for row in X} <= {3, 12}


def test_joint_distance_exact_values():
    assert joint_distance([0.25] * 4, 64) == pytest.approx(0.0, abs=1e-9)
    # masa puntual: 2 (1 - 4^-n)
    assert joint_distance([1, 0, 0, 0], 1) == pytest.approx(1.5)
    assert joint_distance([1, 0, 0, 0], 2) == pytest.approx(1.875)
    assert joint_distance([0.5, 0.5], 3) == pytest.approx(0.0, abs=1e-9)
    assert joint_distance([0.75, 0.25], 1) == pytest.approx(0.5)


def test_joint_distance_grows_with_rows():
    freq = [0.3, 0.2, 0.25, 0.25]
    assert joint_distance(freq, 1) < joint_distance(freq, 8) < joint_distance(freq, 64) <= 2.0


def test_joint_distance_type_cap():
    with pytest.raises(BadInput):
        joint_distance([1 / 256] * 256, 64)


@pytest.mark.parametrize("m, i", [(2, 1), (3, 2), (4, 2)])
def test_toeplitz_family_is_universal(m, i):
    outputs_per_x = {}
    for diag in itertools.product((0, 1), repeat=m + i - 1):
        Z = toeplitz_from_bits(diag, m, i)
        for x in itertools.product((0, 1), repeat=m):
            if any(x):
                out = tuple(toeplitz_extract(np.array([x]), Z)[0])
                outputs_per_x.setdefault(x, []).append(out)
    for outs in outputs_per_x.values():
        counts = {o: outs.count(o) for o in set(outs)}
        assert len(counts) == 1 << i
        assert len(set(counts.values())) == 1


def test_extractor_distance_at_toy_point(rng):
    # m=8, k=6, i=2, n=64
    support = rng.sample(range(256), 64)
    distance = extractor_distance(support, 8, 2, 64, 100, rng)
    assert 0.0 <= distance <= 4 * math.sqrt(64 * 2 / 64)


def test_single_row_distance_is_small(rng):
    support = rng.sample(range(256), 64)
    assert extractor_distance(support, 8, 2, 1, 300, rng) <= 4 * math.sqrt(2 / 64)


# ------------------------
# Argumento híbrido
# ------------------------
def _alternating(n):
    def gen(rng):
        b = rng.getrandbits(1)
        return tuple((b + k) % 2 for k in range(n))

    return gen


def _first_two_differ(bits):
    return bits[0] != bits[1]


def test_hybrid_finds_the_leaking_position(rng):
    report = nextbit_hybrid(_alternating(8), _first_two_differ, 8, 2000, rng)
    assert report.position == 2
    assert report.p[0] == pytest.approx(0.5, abs=0.06)
    assert report.p[2] == 1.0
    assert report.correlation > 0.04


def test_hybrid_null_case_and_telescoping(rng):
    uniform = lambda r: tuple(r.getrandbits(1) for _ in range(6))
    report = nextbit_hybrid(uniform, _first_two_differ, 6, 2000, rng)
    assert all(abs(g) < 0.1 for g in report.gaps)
    assert sum(report.gaps) == pytest.approx(report.p[0] - report.p[-1])


def test_hybrid_rejects_short_generator(rng):
    with pytest.raises(LengthMismatch):
        nextbit_hybrid(lambda r: (0, 1), _first_two_differ, 4, 5, rng)


def test_tm_acceptor_and_bbs_generator(rng):
    tm = make_tm(
        {(0, 0): (1, 0, "R"), (0, 1): (2, 1, "R")},
        state_count=3,
        halt_mode=HaltMode.EXPLICIT_HALT_STATE,
        halt_states={1, 2},
        accept_states={2},
    )
    accept = tm_acceptor(tm, budget=10)
    assert accept((1, 0)) and not accept((0, 1))
    key = blum_keygen(16, rng)
    gen = bbs_generator(key, 12)
    assert len(gen(rng)) == 12
    report = nextbit_hybrid(gen, accept, 12, 300, rng)
    assert len(report.p) == 13
