"""
Aritmética de restos, tests de Fermat / raíz cuadrada / Miller-Rabin y
generación de primos.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

from src.core.errors import BadInput, GenerationTimeout
from src.core.settings.crypto_service import get_crypto_settings

logger = logging.getLogger(__name__)


def ext_gcd(x: int, y: int) -> Tuple[int, int, int]:
    """
    Devuelve (g, A, B) con g = gcd(x, y) = A*x - B*y.

    Para x, y >= 1: 1 <= A <= y/g y 0 <= B < x. gcd(x, 0) = x da (x, 1, 0);
    gcd(0, y) = y sólo admite B = -1.
    """
    if x < 0 or y < 0:
        raise BadInput(f"ext_gcd espera naturales: ({x}, {y})")
    if x == 0 and y == 0:
        raise BadInput("ext_gcd(0, 0) no está definido")
    if y == 0:
        return x, 1, 0
    if x == 0:
        return y, 0, -1
    old_r, r = x, y
    old_s, s = 1, 0
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
    g = old_r
    period = y // g
    a = old_s % period or period
    b = (a * x - g) // y
    return g, a, b


def mod_inverse(a: int, n: int) -> int:
    g, inv, _ = ext_gcd(a % n, n)
    if g != 1:
        raise BadInput(f"{a} no es invertible módulo {n}")
    return inv % n


def modexp(x: int, q: int, p: int) -> int:
    """x^q mod p por cuadrados sucesivos y la expansión binaria de q."""
    if p < 1:
        raise BadInput(f"Módulo inválido: {p}")
    if q < 0:
        raise BadInput(f"Exponente negativo: {q}")
    result = 1 % p
    square = x % p
    while q:
        if q & 1:
            result = result * square % p
        square = square * square % p
        q >>= 1
    return result


class MRTag(Enum):
    NO_INFO = "NoInfo"
    COMPOSITE_BY_FERMAT = "CompositeByFermat"
    FACTOR = "Factor"


@dataclass(frozen=True)
class MRVerdict:
    tag: MRTag
    factor: Optional[int] = None
    chain: Tuple[int, ...] = ()

    def __str__(self) -> str:
        if self.tag is MRTag.FACTOR:
            return f"Factor({self.factor})"
        return self.tag.value


def square_chain(x: int, p: int, d: int) -> Tuple[int, ...]:
    """x^q, x^2q, ..., x^d con d = 2^k q, q impar."""
    if d < 1:
        raise BadInput(f"Exponente d inválido: {d}")
    q, k = d, 0
    while q % 2 == 0:
        q //= 2
        k += 1
    chain = [modexp(x, q, p)]
    for _ in range(k):
        chain.append(chain[-1] * chain[-1] % p)
    return tuple(chain)


def square_root_test(x: int, x2: int, p: int) -> Optional[int]:
    """
    Si x^2 = x2^2 (mod p) con x != ±x2, gcd(p, x + x2) es un factor propio.
    """
    if (x * x - x2 * x2) % p:
        return None
    if (x - x2) % p == 0 or (x + x2) % p == 0:
        return None
    f = math.gcd(p, (x + x2) % p)
    if 1 < f < p:
        return f
    return None


def miller_rabin(x: int, p: int, d: int) -> MRVerdict:
    if p < 3 or p % 2 == 0:
        raise BadInput(f"Miller-Rabin requiere p impar >= 3: {p}")
    x %= p
    g = math.gcd(x, p)
    if 1 < g < p:
        return MRVerdict(MRTag.FACTOR, g)
    chain = square_chain(x, p, d)
    for cur, nxt in zip(chain, chain[1:]):
        if nxt == 1 and cur not in (1, p - 1):
            f = square_root_test(cur, 1, p)
            if f is not None:
                return MRVerdict(MRTag.FACTOR, f, chain)
    if chain[-1] != 1 and g == 1:
        return MRVerdict(MRTag.COMPOSITE_BY_FERMAT, None, chain)
    return MRVerdict(MRTag.NO_INFO, None, chain)


def fermat_test(x: int, p: int) -> bool:
    return modexp(x, p - 1, p) == 1


def is_probable_prime(p: int, rounds: int, rng: random.Random) -> bool:
    if rounds < 1:
        raise BadInput("Se necesita al menos una ronda")
    if p < 2:
        return False
    if p in (2, 3):
        return True
    if p % 2 == 0:
        return False
    for _ in range(rounds):
        x = rng.randrange(1, p)
        if miller_rabin(x, p, p - 1).tag is not MRTag.NO_INFO:
            return False
    return True


def gen_prime(bits: int, rng: random.Random, blum: bool = False, budget: Optional[int] = None) -> int:
    if bits < 3:
        raise BadInput(f"Se necesitan al menos 3 bits: {bits}")
    settings = get_crypto_settings()
    budget = settings.candidate_budget if budget is None else budget
    for candidate_count in range(1, budget + 1):
        p = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
        if blum:
            p |= 3
        if is_probable_prime(p, settings.prime_rounds, rng):
            logger.debug("Primo de %d bits tras %d candidatos", bits, candidate_count)
            return p
    raise GenerationTimeout(f"Sin primo de {bits} bits tras {budget} candidatos")


def gen_blum_prime(bits: int, rng: random.Random, budget: Optional[int] = None) -> int:
    return gen_prime(bits, rng, blum=True, budget=budget)


def count_candidates(bits: int, rng: random.Random, samples: int) -> List[int]:
    """Número de candidatos impares probados hasta dar con un primo, por muestra."""
    settings = get_crypto_settings()
    counts: List[int] = []
    for _ in range(samples):
        n = 0
        while True:
            n += 1
            p = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
            if is_probable_prime(p, settings.prime_rounds, rng):
                counts.append(n)
                break
            if n >= settings.candidate_budget:
                raise GenerationTimeout(f"Sin primo de {bits} bits tras {n} candidatos")
    return counts


def trial_division_is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True
