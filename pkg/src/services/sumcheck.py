"""
Juego de un jugador con transición aleatoria (Merlin contra las monedas de Arthur).

El juego booleano tiene posiciones x de s bits, movimientos m in {0,1},
transición r(m, x) y contador de movimientos c:
    V_0(x) = x_1
    V_{c+1}(x) = 1 - V_c(r(0, x)) * V_c(r(1, x))

Aritmetización: t(m, x, y) = [y = r(m, x)] como producto de s factores
multilineales, evaluado sobre Z_p. Estados del protocolo (c, m, x, y, v):
    |y| < s : v = suma sobre completados booleanos z de V_c(y∘z) * t(m, x, y∘z)
    |y| = s : v = V_c(y) * t(m, x, y)   (t = 1 en la raíz)
"""

from __future__ import annotations

import logging
import random
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple

from src.core.errors import BadInput, CapExceeded, FalseClaim
from src.core.settings.protocol_service import get_protocol_settings
from src.services.games import GameRule
from src.services.numtheory import gen_prime
from src.utils.utils import Bits, derive_rng, int_to_bits, to_bits

logger = logging.getLogger(__name__)

SMALL_FIELD = 1 << 16


class SmallFieldWarning(UserWarning):
    pass


# ------------------------
# Polinomios sobre Z_p
# ------------------------
def _poly_mul(a: List[int], b: List[int], p: int) -> List[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = (out[i + j] + x * y) % p
    return out


def interpolate(points: Sequence[Tuple[int, int]], p: int) -> Tuple[int, ...]:
    """Coeficientes (grado creciente) del polinomio de Lagrange por los puntos dados."""
    xs = [x % p for x, _ in points]
    if len(set(xs)) != len(xs):
        raise BadInput(f"Puntos de interpolación repetidos: {xs}")
    coeffs = [0] * len(points)
    for i, (xi, yi) in enumerate(points):
        basis = [1]
        denom = 1
        for j, (xj, _) in enumerate(points):
            if i == j:
                continue
            basis = _poly_mul(basis, [-xj % p, 1], p)
            denom = denom * (xi - xj) % p
        scale = yi * pow(denom, -1, p) % p
        for k, c in enumerate(basis):
            coeffs[k] = (coeffs[k] + scale * c) % p
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


@dataclass(frozen=True)
class RoundPoly:
    coeffs: Tuple[int, ...]
    p: int

    def __post_init__(self) -> None:
        bound = get_protocol_settings().degree_bound
        if self.degree > bound:
            raise BadInput(f"Polinomio de grado {self.degree} > {bound}")

    @property
    def degree(self) -> int:
        d = len(self.coeffs) - 1
        while d > 0 and self.coeffs[d] % self.p == 0:
            d -= 1
        return max(d, 0)

    def __call__(self, z: int) -> int:
        out = 0
        for c in reversed(self.coeffs):
            out = (out * z + c) % self.p
        return out


# ------------------------
# Juego aritmetizado
# ------------------------
TermFn = Callable[[int, Sequence[int], Sequence[int], int], int]


@dataclass(frozen=True)
class TermFactor:
    variables: FrozenSet[str]
    evaluate: TermFn


@dataclass(frozen=True)
class ArithGame:
    s: int
    c: int
    transition: Callable[[int, Bits], Bits]
    factors: Tuple[TermFactor, ...]
    name: str = "arith"

    def __post_init__(self) -> None:
        settings = get_protocol_settings()
        if not 1 <= self.s <= settings.max_s:
            raise BadInput(f"s = {self.s} fuera de [1, {settings.max_s}]")
        if self.c < 0:
            raise BadInput(f"c = {self.c} negativo")
        uses: Dict[str, int] = {}
        for f in self.factors:
            for var in f.variables:
                uses[var] = uses.get(var, 0) + 1
        shared = sorted(v for v, n in uses.items() if n > 2)
        if shared:
            raise BadInput(f"Variables en más de dos factores: {shared}")

    def t(self, m: int, x: Sequence[int], y: Sequence[int], p: int) -> int:
        out = 1
        for f in self.factors:
            out = out * f.evaluate(m, x, y, p) % p
            if not out:
                return 0
        return out


def _eq(a: int, b: int, p: int) -> int:
    return (1 - a - b + 2 * a * b) % p


def _xor(a: int, b: int, p: int) -> int:
    return (a + b - 2 * a * b) % p


def shift_register_game(s: int, c: int, taps: Sequence[int] = (0, 0, 0, 1)) -> ArithGame:
    """
    r(m, x) = (x_2, ..., x_s, m XOR f(x_1, x_2)); taps = (f00, f01, f10, f11),
    por defecto f = AND.
    """
    if s < 2:
        raise BadInput("El registro de desplazamiento necesita s >= 2")
    taps = tuple(int(b) for b in taps)
    if len(taps) != 4 or any(b not in (0, 1) for b in taps):
        raise BadInput(f"taps debe tener 4 bits: {taps}")
    f00, f01, f10, f11 = taps

    def transition(m: int, x: Bits) -> Bits:
        return tuple(x[1:]) + (m ^ taps[2 * x[0] + x[1]],)

    def tap(a: int, b: int, p: int) -> int:
        return (f00 * (1 - a) * (1 - b) + f01 * (1 - a) * b + f10 * a * (1 - b) + f11 * a * b) % p

    def shifted(i: int) -> TermFn:
        return lambda m, x, y, p: _eq(y[i], x[i + 1], p)

    def feedback(m: int, x: Sequence[int], y: Sequence[int], p: int) -> int:
        return _eq(y[s - 1], _xor(m, tap(x[0], x[1], p), p), p)

    factors = [TermFactor(frozenset({f"y{i + 1}", f"x{i + 2}"}), shifted(i)) for i in range(s - 1)]
    factors.append(TermFactor(frozenset({f"y{s}", "m", "x1", "x2"}), feedback))
    return ArithGame(s, c, transition, tuple(factors), name=f"shift-register{taps}")


def _value_tables(g: ArithGame, c: int) -> List[Dict[Bits, int]]:
    states = [int_to_bits(i, g.s) for i in range(1 << g.s)]
    tables = [{x: x[0] for x in states}]
    for _ in range(c):
        prev = tables[-1]
        tables.append({x: 1 - prev[g.transition(0, x)] * prev[g.transition(1, x)] for x in states})
    return tables


def v_brute(g: ArithGame, c: int, x: Sequence[int] | str) -> int:
    cap = get_protocol_settings().max_rounds_c
    if c > cap:
        raise CapExceeded(f"c = {c} supera el máximo {cap}")
    x = to_bits(x)
    if len(x) != g.s:
        raise BadInput(f"|x| = {len(x)} distinto de s = {g.s}")
    return _value_tables(g, c)[c][x]


def arith_game_rule(g: ArithGame) -> GameRule:
    """El juego booleano como GameRule: posición (jugador, c, x...)."""

    class _Rule(GameRule):
        namespace = 5
        name = g.name

        def active(self, pos):
            return 1 if pos[0] == 0 else -1

        def terminal(self, pos):
            return pos[1] == 0

        def value(self, pos):
            return self.active(pos) if pos[2] == 1 else -self.active(pos)

        def moves(self, pos):
            return [0, 1]

        def play(self, pos, m):
            return (1 - pos[0], pos[1] - 1) + g.transition(m, tuple(pos[2:]))

    return _Rule()


# ------------------------
# Protocolo
# ------------------------
@dataclass(frozen=True)
class ProtocolState:
    c: int
    m: int
    x: Tuple[int, ...]
    y: Tuple[int, ...]
    v: int
    root: bool = False


@dataclass
class FieldOracle:
    """Evalúa las cantidades aritmetizadas de un juego sobre Z_p."""

    g: ArithGame
    p: int
    tables: List[Dict[Bits, int]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.p < SMALL_FIELD:
            warnings.warn(f"Campo pequeño p = {self.p}: la cota de solidez es débil", SmallFieldWarning, stacklevel=2)
        if not self.tables:
            self.tables = _value_tables(self.g, self.g.c)

    def value(self, c: int, y: Sequence[int]) -> int:
        """V_c(y) para y en Z_p^s."""
        if c == 0:
            return y[0] % self.p
        return (1 - self.a(c - 1, 0, y) * self.a(c - 1, 1, y)) % self.p

    def a(self, c: int, m: int, x: Sequence[int]) -> int:
        """V_c(m, x, {}) = suma sobre w booleano de V_c(w) t(m, x, w)."""
        total = 0
        for w, bit in self.tables[c].items():
            if bit:
                total += self.g.t(m, x, w, self.p)
        return total % self.p

    def claim(self, c: int, m: int, x: Sequence[int], y: Sequence[int], root: bool = False) -> int:
        s = self.g.s
        if len(y) == s:
            t = 1 if root else self.g.t(m, x, y, self.p)
            return self.value(c, y) * t % self.p
        total = 0
        for i in range(1 << (s - len(y))):
            rest = int_to_bits(i, s - len(y))
            full = tuple(y) + rest
            t = self.g.t(m, x, full, self.p)
            if t:
                total += self.value(c, full) * t
        return total % self.p

    def true_value(self, st: ProtocolState) -> int:
        return self.claim(st.c, st.m, st.x, st.y, st.root)

    def round_values(self, st: ProtocolState, z: int) -> int:
        """El polinomio de la ronda evaluado en z."""
        if len(st.y) < self.g.s:
            return self.claim(st.c, st.m, st.x, st.y + (z,))
        return self.a(st.c - 1, z, st.y)

    def t_of(self, st: ProtocolState) -> int:
        return 1 if st.root else self.g.t(st.m, st.x, st.y, self.p)


def is_terminal(g: ArithGame, st: ProtocolState) -> bool:
    return st.c == 0 and len(st.y) == g.s


def initial_state(g: ArithGame, x: Sequence[int] | str, v: int) -> ProtocolState:
    x = to_bits(x)
    if len(x) != g.s:
        raise BadInput(f"|x| = {len(x)} distinto de s = {g.s}")
    return ProtocolState(g.c, 0, x, x, v, root=True)


Prover = Callable[[FieldOracle, ProtocolState, random.Random], RoundPoly]


def _honest_poly(oracle: FieldOracle, st: ProtocolState) -> RoundPoly:
    # en Z_p con p pequeño bastan los p puntos del cuerpo
    n = min(get_protocol_settings().degree_bound + 1, oracle.p)
    return RoundPoly(interpolate([(z, oracle.round_values(st, z)) for z in range(n)], oracle.p), oracle.p)


def honest_prover(oracle: FieldOracle, st: ProtocolState, rng: Optional[random.Random] = None) -> RoundPoly:
    truth = oracle.true_value(st)
    if truth != st.v % oracle.p:
        raise FalseClaim(f"El valor reclamado {st.v} no es el verdadero {truth}")
    return _honest_poly(oracle, st)


def _lying_endpoints(oracle: FieldOracle, st: ProtocolState, honest: RoundPoly) -> Optional[Tuple[int, int]]:
    """Valores en 0 y 1 que pasan la comprobación de la ronda para el v falso."""
    p = oracle.p
    q0, q1 = honest(0), honest(1)
    if len(st.y) < oracle.g.s:
        return (st.v - q1) % p, q1
    t = oracle.t_of(st)
    if t == 0:
        return None
    target = (1 - st.v * pow(t, -1, p)) % p
    if q0:
        return q0, target * pow(q0, -1, p) % p
    return 1, target


def shifted_prover(oracle: FieldOracle, st: ProtocolState, rng: Optional[random.Random] = None) -> RoundPoly:
    """Tramposo ingenuo: desplaza el polinomio verdadero lo justo para pasar la ronda."""
    honest = _honest_poly(oracle, st)
    if oracle.true_value(st) == st.v % oracle.p:
        return honest
    ends = _lying_endpoints(oracle, st, honest)
    if ends is None:
        return honest
    p = oracle.p
    d0 = (ends[0] - honest(0)) % p
    d1 = (ends[1] - honest(1)) % p
    shift = [d0, (d1 - d0) % p]
    coeffs = list(honest.coeffs) + [0] * max(0, 2 - len(honest.coeffs))
    coeffs[0] = (coeffs[0] + shift[0]) % p
    coeffs[1] = (coeffs[1] + shift[1]) % p
    return RoundPoly(tuple(coeffs), p)


def best_response_prover(oracle: FieldOracle, st: ProtocolState, rng: random.Random) -> RoundPoly:
    """
    Tramposo que pasa la ronda y coincide con la verdad en 5 puntos al azar:
    gana la ronda sólo si Arthur elige uno de ellos.
    """
    honest = _honest_poly(oracle, st)
    if oracle.true_value(st) == st.v % oracle.p:
        return honest
    ends = _lying_endpoints(oracle, st, honest)
    if ends is None:
        return honest
    p = oracle.p
    degree = get_protocol_settings().degree_bound
    extra = set()
    while len(extra) < min(degree - 1, p - 2):
        extra.add(rng.randrange(2, p))
    points = [(0, ends[0]), (1, ends[1])] + [(z, honest(z)) for z in sorted(extra)]
    return RoundPoly(interpolate(points, p), p)


def verifier_round(oracle: FieldOracle, st: ProtocolState, poly: RoundPoly, r: int) -> Optional[ProtocolState]:
    """Comprueba la identidad de la ronda; None = reject."""
    p = oracle.p
    if poly.p != p:
        return None
    if len(st.y) < oracle.g.s:
        if (poly(0) + poly(1)) % p != st.v % p:
            return None
        return ProtocolState(st.c, st.m, st.x, st.y + (r,), poly(r))
    if oracle.t_of(st) * (1 - poly(0) * poly(1)) % p != st.v % p:
        return None
    return ProtocolState(st.c - 1, r, st.y, (), poly(r))


def verifier_final(oracle: FieldOracle, st: ProtocolState) -> bool:
    return st.v % oracle.p == oracle.t_of(st) * st.y[0] % oracle.p


@dataclass(frozen=True)
class ProtocolRun:
    accepted: bool
    rounds: int
    transcript: Tuple[Tuple[ProtocolState, Tuple[int, ...], int], ...] = ()


def run_protocol(
    oracle: FieldOracle,
    start: ProtocolState,
    prover: Prover,
    rng: random.Random,
    keep_transcript: bool = False,
) -> ProtocolRun:
    st = start
    rounds = 0
    transcript = []
    while not is_terminal(oracle.g, st):
        try:
            poly = prover(oracle, st, rng)
        except BadInput:
            logger.info("Reject: polinomio fuera de la cota de grado en la ronda %d", rounds)
            return ProtocolRun(False, rounds, tuple(transcript))
        r = rng.randrange(oracle.p)
        if keep_transcript:
            transcript.append((st, poly.coeffs, r))
        rounds += 1
        nxt = verifier_round(oracle, st, poly, r)
        if nxt is None:
            logger.debug("Reject en la ronda %d (c=%d, |y|=%d)", rounds, st.c, len(st.y))
            return ProtocolRun(False, rounds, tuple(transcript))
        st = nxt
    return ProtocolRun(verifier_final(oracle, st), rounds, tuple(transcript))


def total_rounds(g: ArithGame) -> int:
    return g.c * (g.s + 1)


def choose_prime(g: ArithGame, rng: random.Random, min_bits: int = 17) -> int:
    return gen_prime(max(2 * g.s, min_bits), rng)


def soundness_rate(
    g: ArithGame,
    x: Sequence[int] | str,
    claim: int,
    strategy: Prover,
    trials: int,
    seed: int,
    p: Optional[int] = None,
) -> float:
    """Frecuencia de aceptación de `claim` contra la estrategia dada."""
    if trials < 1:
        raise BadInput("Se necesita al menos un ensayo")
    if p is None:
        p = choose_prime(g, derive_rng(seed, "prime"))
    oracle = FieldOracle(g, p)
    start = initial_state(g, x, claim)
    accepted = 0
    for i in range(trials):
        if run_protocol(oracle, start, strategy, derive_rng(seed, "trial", i)).accepted:
            accepted += 1
    rate = accepted / trials
    logger.info("Solidez: %d/%d aceptados (p=%d, rondas=%d)", accepted, trials, p, total_rounds(g))
    return rate
