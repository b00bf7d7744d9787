import math

import pytest

from src.core.errors import BadInput, GenerationTimeout
from src.services.numtheory import (
    MRTag,
    count_candidates,
    ext_gcd,
    fermat_test,
    gen_blum_prime,
    gen_prime,
    is_probable_prime,
    miller_rabin,
    mod_inverse,
    modexp,
    square_chain,
    square_root_test,
    trial_division_is_prime,
)


# ------------------------
# ext_gcd y modexp
# ------------------------
def test_ext_gcd_examples():
    assert ext_gcd(7, 0) == (7, 1, 0)
    assert ext_gcd(6, 35) == (1, 6, 1)
    g, a, b = ext_gcd(12, 8)
    assert g == 4 and a * 12 - b * 8 == 4


def test_ext_gcd_identity_on_random_pairs(rng):
    for _ in range(10_000):
        x, y = rng.randint(1, 10**9), rng.randint(1, 10**9)
        g, a, b = ext_gcd(x, y)
        assert g == math.gcd(x, y)
        assert a * x - b * y == g
        assert 1 <= a <= y // g
        assert 0 <= b < x


def test_ext_gcd_rejects_bad_arguments():
    with pytest.raises(BadInput):
        ext_gcd(0, 0)
    with pytest.raises(BadInput):
        ext_gcd(-3, 5)


def test_mod_inverse():
    assert mod_inverse(3, 7) == 5
    assert mod_inverse(10, 21) * 10 % 21 == 1
    with pytest.raises(BadInput):
        mod_inverse(6, 21)


def test_modexp_examples():
    assert modexp(12345, 0, 97) == 1
    assert modexp(3, 6, 7) == 1
    assert modexp(2, 10, 1000) == 24
    assert modexp(5, 3, 1) == 0


def test_modexp_matches_pow(rng):
    for _ in range(3000):
        x, q, p = rng.randrange(1 << 10), rng.randrange(1 << 10), rng.randrange(1, 1 << 10)
        assert modexp(x, q, p) == pow(x, q, p)


def test_modexp_rejects_bad_arguments():
    with pytest.raises(BadInput):
        modexp(2, 3, 0)
    with pytest.raises(BadInput):
        modexp(2, -1, 7)


def test_fermat_holds_for_small_primes():
    for p in range(2, 1000):
        if trial_division_is_prime(p):
            assert all(fermat_test(x, p) for x in range(1, p))


# ------------------------
# Miller-Rabin
# ------------------------
def test_carmichael_561_chain_and_factor():
    verdict = miller_rabin(2, 561, 560)
    assert verdict.chain[:4] == (263, 166, 67, 1)
    assert verdict.tag is MRTag.FACTOR
    assert verdict.factor == 17 == math.gcd(561, 67 + 1)
    assert str(verdict) == "Factor(17)"


def test_miller_rabin_other_verdicts():
    assert miller_rabin(1, 13, 12).tag is MRTag.NO_INFO
    assert miller_rabin(2, 9, 8).tag is MRTag.COMPOSITE_BY_FERMAT
    assert miller_rabin(3, 9, 8) == miller_rabin(3, 9, 8)
    assert miller_rabin(3, 9, 8).factor == 3


def test_miller_rabin_needs_odd_modulus():
    with pytest.raises(BadInput):
        miller_rabin(3, 10, 9)


def test_square_chain_layout():
    chain = square_chain(3, 13, 12)
    assert len(chain) == 3
    assert chain[0] == pow(3, 3, 13)
    assert chain[-1] == pow(3, 12, 13)


def test_square_root_test_factors_are_proper(rng):
    for _ in range(2000):
        n = rng.randrange(15, 5000) | 1
        x, x2 = rng.randrange(n), rng.randrange(n)
        f = square_root_test(x, x2, n)
        if f is not None:
            assert 1 < f < n and n % f == 0
    assert square_root_test(4, 1, 15) == 5


@pytest.mark.parametrize("n", [561, 1105, 1729])
def test_carmichael_numbers_mostly_factor(rng, n):
    hits = sum(miller_rabin(rng.randrange(2, n - 1), n, n - 1).tag is MRTag.FACTOR for _ in range(200))
    assert hits >= 100


# ------------------------
# Primalidad y generación
# ------------------------
def test_probable_prime_agrees_with_trial_division(rng):
    for p in range(2, 10_000):
        if p > 2 and p % 2 == 0:
            continue
        assert is_probable_prime(p, 20, rng) == trial_division_is_prime(p), p


def test_small_cases():
    assert is_probable_prime(2, 1, None)
    assert is_probable_prime(3, 1, None)
    assert not is_probable_prime(1, 1, None)
    assert not is_probable_prime(10, 1, None)
    with pytest.raises(BadInput):
        is_probable_prime(7, 0, None)


def test_gen_prime_has_exact_length(rng):
    for bits in (8, 16, 32, 64):
        p = gen_prime(bits, rng)
        assert p.bit_length() == bits
        assert is_probable_prime(p, 40, rng)


def test_blum_primes(rng):
    assert gen_blum_prime(3, rng) == 7
    for _ in range(10):
        assert gen_blum_prime(24, rng) % 4 == 3


def test_generation_budget(rng):
    with pytest.raises(GenerationTimeout):
        gen_prime(32, rng, budget=0)
    with pytest.raises(BadInput):
        gen_prime(2, rng)


def test_candidate_count_is_order_of_bits(rng):
    counts = count_candidates(32, rng, 60)
    assert len(counts) == 60
    assert sum(counts) / len(counts) <= 4 * 32
