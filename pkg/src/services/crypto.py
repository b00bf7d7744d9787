"""
Criptografía de juguete sobre números de Blum (uso educativo, NO producción).

    - rabin_forward / rabin_invert: x -> x^2 es una permutación de Q_n, y^u la invierte.
    - prg_stream: S_i = B_p(x_i), x_{i+1} = x_i^2 mod n.
    - bg_encrypt / bg_decrypt: Blum-Goldwasser.
    - gl_invert: inversión del bit duro con la transformada de Hadamard.
    - toeplitz_extract: extractor sobre GF(2).
    - nextbit_hybrid: medida del argumento híbrido.
"""

from __future__ import annotations

import hashlib
import itertools
import logging
import math
import random
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, model_validator

from src.core.errors import BadInput, KeyMismatch, LengthMismatch, NotCoprime, NotResidue, NotToeplitz, ShapeMismatch
from src.core.settings.crypto_service import get_crypto_settings
from src.core.settings.workbench_service import get_workbench_settings
from src.services.machine_core import BinaryTM, tm_accepts
from src.services.numtheory import gen_blum_prime, square_root_test
from src.utils.utils import Bits, bits_to_int, int_to_bits, to_bits

logger = logging.getLogger(__name__)


# ------------------------
# Claves de Blum
# ------------------------
class BlumKey(BaseModel):
    n: int
    p: int
    q: int

    @model_validator(mode="after")
    def check_blum(self) -> "BlumKey":
        if self.p * self.q != self.n:
            raise ValueError(f"n = {self.n} no es p*q = {self.p}*{self.q}")
        if self.p == self.q:
            raise ValueError("p y q deben ser distintos")
        if self.p % 4 != 3 or self.q % 4 != 3:
            raise ValueError(f"p = {self.p} y q = {self.q} deben ser 3 mod 4")
        return self

    @property
    def t(self) -> int:
        return (self.p - 1) * (self.q - 1) // 4

    @property
    def u(self) -> int:
        return (self.t + 1) // 2

    @property
    def bits(self) -> int:
        return self.n.bit_length()


def blum_keygen(bits: Optional[int] = None, rng: Optional[random.Random] = None) -> BlumKey:
    settings = get_crypto_settings()
    bits = settings.key_bits if bits is None else bits
    rng = rng or random.Random()
    p = gen_blum_prime(bits, rng)
    q = gen_blum_prime(bits, rng)
    while q == p:
        q = gen_blum_prime(bits, rng)
    logger.info("Clave de Blum de %d bits generada", (p * q).bit_length())
    return BlumKey(n=p * q, p=p, q=q)


def is_residue(y: int, key: BlumKey) -> bool:
    """y en Q_n por el criterio de Euler módulo p y módulo q."""
    if math.gcd(y, key.n) != 1:
        return False
    return pow(y, (key.p - 1) // 2, key.p) == 1 and pow(y, (key.q - 1) // 2, key.q) == 1


def rabin_forward(x: int, n: int) -> int:
    if math.gcd(x, n) != 1:
        raise NotCoprime(f"gcd({x}, {n}) != 1")
    return x * x % n


def rabin_invert(y: int, key: BlumKey) -> int:
    if not is_residue(y, key):
        raise NotResidue(f"{y} no es un residuo cuadrático módulo {key.n}")
    return pow(y, key.u, key.n)


def quadratic_residues(key: BlumKey) -> List[int]:
    return sorted({x * x % key.n for x in range(1, key.n) if math.gcd(x, key.n) == 1})


def factor_with_inverter(
    n: int,
    inverter: Callable[[int], int],
    rng: random.Random,
    attempts: int = 64,
) -> Optional[int]:
    """Cualquier inversor de x -> x^2 factoriza n: basta una raíz x' != ±x."""
    for _ in range(attempts):
        x = rng.randrange(2, n - 1)
        if math.gcd(x, n) != 1:
            return math.gcd(x, n)
        x2 = inverter(x * x % n)
        f = square_root_test(x, x2, n)
        if f is not None:
            return f
    return None


# ------------------------
# Bit duro, generador y Blum-Goldwasser
# ------------------------
def hardcore_bit(x: Sequence[int] | str, p: Sequence[int] | str) -> int:
    x, p = to_bits(x), to_bits(p)
    if len(x) != len(p):
        raise LengthMismatch(f"|x| = {len(x)} y |p| = {len(p)} difieren")
    return sum(a & b for a, b in zip(x, p)) % 2


def _int_bit(value: int, pvec: Bits) -> int:
    return hardcore_bit(int_to_bits(value, len(pvec)), pvec)


def prg_states(x0: int, n: int, key: Optional[BlumKey] = None) -> Iterator[int]:
    """x_0, x_1, ... con x_{i+1} = x_i^2 mod n; x_0 se eleva al cuadrado si no está en Q_n."""
    if math.gcd(x0, n) != 1:
        raise NotCoprime(f"gcd({x0}, {n}) != 1")
    if key is not None and key.n != n:
        raise KeyMismatch(f"La clave es para n = {key.n}, no {n}")
    # sin la factorización no se puede decidir si x0 es residuo: se eleva siempre
    x = x0 % n if key is not None and is_residue(x0, key) else x0 * x0 % n
    while True:
        yield x
        x = x * x % n


def prg_stream(x0: int, pvec: Sequence[int] | str, n: int, length: int, key: Optional[BlumKey] = None) -> Bits:
    if length < 0:
        raise BadInput(f"Longitud negativa: {length}")
    pvec = to_bits(pvec)
    if len(pvec) != n.bit_length():
        raise LengthMismatch(f"|p| = {len(pvec)} y ||n|| = {n.bit_length()} difieren")
    out = []
    for x, _ in zip(prg_states(x0, n, key), range(length)):
        out.append(_int_bit(x, pvec))
    return tuple(out)


@dataclass(frozen=True)
class Ciphertext:
    n: int
    x: Bits
    s_k: int
    c: Bits


def bg_keystream(s1: int, x: Bits, n: int, length: int) -> Tuple[Bits, int]:
    """S_1..S_length desde s_1 y el último s_{length+1}."""
    bits = []
    s = s1
    for _ in range(length):
        bits.append(_int_bit(s, x))
        s = s * s % n
    return tuple(bits), s


def bg_encrypt(m: Sequence[int] | str, n: int, rng: random.Random) -> Ciphertext:
    m = to_bits(m)
    width = n.bit_length()
    x = tuple(rng.getrandbits(1) for _ in range(width))
    s0 = rng.randrange(2, n - 1)
    while math.gcd(s0, n) != 1:
        s0 = rng.randrange(2, n - 1)
    s1 = s0 * s0 % n
    stream, s_k = bg_keystream(s1, x, n, len(m))
    return Ciphertext(n, x, s_k, tuple(a ^ b for a, b in zip(m, stream)))


def bg_decrypt(ct: Ciphertext, key: BlumKey) -> Bits:
    if ct.n != key.n:
        raise KeyMismatch(f"El mensaje es para n = {ct.n} y la clave para n = {key.n}")
    k = len(ct.c) + 1
    v = pow(key.u, k - 1, key.t)
    s1 = pow(ct.s_k, v, key.n)
    stream, s_k = bg_keystream(s1, ct.x, key.n, len(ct.c))
    if s_k != ct.s_k % key.n:
        raise KeyMismatch("s_k no se reproduce con esta clave")
    return tuple(a ^ b for a, b in zip(ct.c, stream))


def sign_release(x: int, n: int) -> Tuple[int, int]:
    return x, rabin_forward(x, n)


def verify_sig(x: int, y: int, n: int) -> bool:
    return x * x % n == y % n


# ------------------------
# Inversión del bit duro (transformada de Hadamard)
# ------------------------
GLOracle = Callable[[Bits], int]


def parity_oracle(x: Sequence[int] | str) -> GLOracle:
    x = to_bits(x)
    return lambda p: 1 - 2 * hardcore_bit(x, p)


def noisy_oracle(x: Sequence[int] | str, eps: float, seed: int) -> GLOracle:
    """Acierta B_p(x) con correlación eps; el error depende sólo de (seed, p)."""
    x = to_bits(x)
    flip = (1 - eps) / 2

    def oracle(p: Bits) -> int:
        digest = hashlib.blake2b(f"{seed}|{bits_to_int(p)}".encode("utf-8"), digest_size=8).digest()
        wrong = int.from_bytes(digest, "big") / 2 ** 64 < flip
        return (1 - 2 * hardcore_bit(x, p)) * (-1 if wrong else 1)

    return oracle


def constant_oracle(value: int = 1) -> GLOracle:
    return lambda p: value


def fwht(a: np.ndarray) -> np.ndarray:
    """Walsh-Hadamard sin normalizar sobre el último eje, h(z) = sum_r (-1)^{z.r} a(r)."""
    h = np.array(a, dtype=np.int64, copy=True)
    n = h.shape[-1]
    step = 1
    while step < n:
        shaped = h.reshape(h.shape[:-1] + (n // (2 * step), 2, step))
        lo = shaped[..., 0, :].copy()
        hi = shaped[..., 1, :]
        shaped[..., 0, :] = lo + hi
        shaped[..., 1, :] = lo - hi
        h = shaped.reshape(h.shape)
        step *= 2
    return h


def gl_width(k: int, eps: float) -> int:
    if not 0 < eps <= 1:
        raise BadInput(f"eps debe estar en (0, 1]: {eps}")
    return max(1, math.ceil(math.log2(2 * k / eps ** 2)))


def gl_invert(oracle: GLOracle, k: int, eps: float, rng: random.Random) -> List[Bits]:
    """
    Lista de 2^j candidatos para el x oculto. P es una matriz k x j al azar;
    G_i(r) = oracle(P r + e_i) y el signo de h_i(z) da el bit i del candidato z.
    """
    j = gl_width(k, eps)
    nprng = np.random.default_rng(rng.getrandbits(64))
    P = nprng.integers(0, 2, size=(k, j), dtype=np.int64)
    rs = np.array([int_to_bits(r, j) for r in range(1 << j)], dtype=np.int64)
    # las filas de rs están en big-endian: el índice r del array coincide con z.r
    pr = (rs @ P.T) % 2
    G = np.empty((k, 1 << j), dtype=np.int64)
    for r in range(1 << j):
        base = pr[r]
        for i in range(k):
            query = base.copy()
            query[i] ^= 1
            G[i, r] = oracle(tuple(int(b) for b in query))
    H = fwht(G)
    candidates = [tuple(int(b) for b in (H[:, z] <= 0)) for z in range(1 << j)]
    logger.debug("gl_invert: k=%d eps=%.3f j=%d, %d consultas", k, eps, j, k << j)
    return candidates


def gl_invert_checked(
    oracle: GLOracle,
    k: int,
    eps: float,
    rng: random.Random,
    f: Callable[[Bits], int],
    y: int,
) -> Optional[Bits]:
    """Primer candidato x con f(x) = y."""
    for cand in gl_invert(oracle, k, eps, rng):
        if f(cand) == y:
            return cand
    return None


# ------------------------
# Extractor de Toeplitz
# ------------------------
def is_toeplitz(Z: np.ndarray) -> bool:
    return bool(np.all(Z[1:, 1:] == Z[:-1, :-1]))


def toeplitz_from_bits(diagonals: Sequence[int], m: int, i: int) -> np.ndarray:
    """Z[a, b] = d[a - b + i - 1]; necesita m + i - 1 bits."""
    if len(diagonals) != m + i - 1:
        raise ShapeMismatch(f"Una Toeplitz {m}x{i} necesita {m + i - 1} bits, no {len(diagonals)}")
    d = np.asarray(diagonals, dtype=np.uint8)
    a = np.arange(m)[:, None]
    b = np.arange(i)[None, :]
    return d[a - b + i - 1]


def random_toeplitz(m: int, i: int, rng: random.Random) -> np.ndarray:
    return toeplitz_from_bits([rng.getrandbits(1) for _ in range(m + i - 1)], m, i)


def fold_source(bits: Sequence[int], m: int) -> np.ndarray:
    if m < 1 or len(bits) % m:
        raise ShapeMismatch(f"{len(bits)} bits no se pliegan en filas de {m}")
    return np.asarray(bits, dtype=np.uint8).reshape(-1, m)


def toeplitz_extract(X: np.ndarray, Z: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.int64)
    Z = np.asarray(Z, dtype=np.int64)
    if X.ndim != 2 or Z.ndim != 2 or X.shape[1] != Z.shape[0]:
        raise ShapeMismatch(f"No se puede multiplicar {X.shape} por {Z.shape}")
    if not is_toeplitz(Z):
        raise NotToeplitz("Z no cumple Z[a+1, b+1] = Z[a, b]")
    return ((X @ Z) % 2).astype(np.uint8)


def flat_source_sample(support: Sequence[int], m: int, n: int, rng: random.Random) -> np.ndarray:
    """n filas de m bits, cada una uniforme sobre `support`, plegadas en una matriz n x m."""
    bits: List[int] = []
    for _ in range(n):
        bits.extend(int_to_bits(rng.choice(list(support)), m))
    return fold_source(bits, m)


def joint_distance(row_freq: Sequence[float], n: int) -> float:
    """
    Distancia L1 a la uniforme de n filas independientes con distribución `row_freq`.
    Suma por tipos (recuentos por valor) en vez de por las cells^n salidas.
    """
    freq = np.asarray(row_freq, dtype=float)
    cells = len(freq)
    if n < 1 or cells < 1:
        raise BadInput(f"Se necesitan n >= 1 y alguna salida: n={n}, salidas={cells}")
    if math.comb(n + cells - 1, cells - 1) > get_crypto_settings().max_types:
        raise BadInput(f"Demasiados tipos para n={n} con {cells} salidas por fila")
    types = np.array([
        np.diff((-1,) + bars + (n + cells - 1,)) - 1
        for bars in itertools.combinations(range(n + cells - 1), cells - 1)
    ], dtype=np.int64).reshape(-1, cells)
    lgamma = np.array([math.lgamma(c + 1) for c in range(n + 1)])
    log_count = lgamma[n] - lgamma[types].sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_freq = np.log(freq)
        log_p = np.where(types > 0, types * log_freq, 0.0).sum(axis=1)
    p = np.exp(log_count + log_p)
    u = np.exp(log_count - n * math.log(cells))
    return float(np.abs(p - u).sum())


def extractor_distance(support: Sequence[int], m: int, i: int, n: int, draws: int, rng: random.Random) -> float:
    """
    Distancia L1 media (sobre Z) entre la salida n x i y la uniforme, con cada
    fila uniforme sobre `support` (fuente plana de min-entropía log|support|).
    """
    rows = fold_source([b for v in support for b in int_to_bits(v, m)], m)
    weights = 1 << np.arange(i - 1, -1, -1)
    total = 0.0
    for _ in range(draws):
        out = toeplitz_extract(rows, random_toeplitz(m, i, rng)).astype(np.int64) @ weights
        total += joint_distance(np.bincount(out, minlength=1 << i) / len(support), n)
    return total / draws


# ------------------------
# Argumento híbrido
# ------------------------
Generator = Callable[[random.Random], Bits]
Acceptor = Callable[[Bits], bool]


@dataclass(frozen=True)
class HybridReport:
    p: Tuple[float, ...]
    gaps: Tuple[float, ...]
    position: int
    correlation: float


def nextbit_hybrid(gen: Generator, test: Acceptor, n: int, trials: int, rng: random.Random) -> HybridReport:
    """
    p_i = Pr[test acepta H_i], H_i = i primeros bits de gen y el resto al azar.
    gaps[i-1] = p_{i-1} - p_i; position es el i (1..n) con mayor |gap|.
    """
    if trials < 1 or n < 1:
        raise BadInput("Se necesitan n >= 1 y al menos un ensayo")
    probs = []
    for i in range(n + 1):
        hits = 0
        for _ in range(trials):
            prefix = gen(rng)
            if len(prefix) < n:
                raise LengthMismatch(f"El generador dio {len(prefix)} bits y se piden {n}")
            hybrid = tuple(prefix[:i]) + tuple(rng.getrandbits(1) for _ in range(n - i))
            hits += bool(test(hybrid))
        probs.append(hits / trials)
    gaps = tuple(probs[i - 1] - probs[i] for i in range(1, n + 1))
    position = max(range(1, n + 1), key=lambda i: abs(gaps[i - 1]))
    correlation = abs(probs[0] - probs[n]) / n
    return HybridReport(tuple(probs), gaps, position, correlation)


def tm_acceptor(tm: BinaryTM, budget: Optional[int] = None) -> Acceptor:
    """Adaptador: acepta si la máquina acaba en un estado de aceptación dentro del presupuesto."""
    budget = get_workbench_settings().tmax if budget is None else budget
    return lambda bits: tm_accepts(tm, bits, budget)


def bbs_generator(key: BlumKey, n_bits: int) -> Generator:
    """Generador para nextbit_hybrid: semilla (x0, p) al azar en cada llamada."""

    def gen(rng: random.Random) -> Bits:
        x0 = rng.randrange(2, key.n - 1)
        while math.gcd(x0, key.n) != 1:
            x0 = rng.randrange(2, key.n - 1)
        pvec = tuple(rng.getrandbits(1) for _ in range(key.bits))
        return prg_stream(x0, pvec, key.n, n_bits, key)

    return gen
