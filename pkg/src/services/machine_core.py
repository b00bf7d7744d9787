"""
Máquinas de Turing binarias con medidores de recursos.

Convenciones:
    - La cinta tiene extremo izquierdo; la celda 0 es la primera. Salir por la
      izquierda (head = -1) detiene la máquina en cualquier modo.
    - Por la derecha la cinta se extiende con ceros, salvo en RIGHT_ROLL_OFF,
      donde salir por la derecha también detiene (head = len(cells)).
    - EXPLICIT_HALT_STATE: además se detiene al entrar en un estado de halt_states.

Métodos principales:
    - tm_step(tm, cfg)
    - tm_run(tm, input, limits)
    - bounded_halt(tm, input, t)
    - tm_ww_recognizer()
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from src.core.errors import StepOnHalted
from src.utils.utils import Bits, int_to_bits, to_bits

logger = logging.getLogger(__name__)

Rule = Tuple[int, int, str]


class HaltMode(Enum):
    EXPLICIT_HALT_STATE = "explicit"
    LEFT_ROLL_OFF = "left"
    RIGHT_ROLL_OFF = "right"


@dataclass(frozen=True)
class BinaryTM:
    state_count: int
    start: int
    rules: Mapping[Tuple[int, int], Rule]
    halt_mode: HaltMode = HaltMode.LEFT_ROLL_OFF
    halt_states: FrozenSet[int] = frozenset()
    accept_states: FrozenSet[int] = frozenset()
    state_names: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.state_count < 1:
            raise ValueError("stateCount debe ser positivo")
        if not 0 <= self.start < self.state_count:
            raise ValueError(f"Estado inicial fuera de rango: {self.start}")
        for q in self.halt_states | self.accept_states:
            if not 0 <= q < self.state_count:
                raise ValueError(f"Estado de parada fuera de rango: {q}")
        for (q, b), (q2, b2, d) in self.rules.items():
            if not 0 <= q < self.state_count or not 0 <= q2 < self.state_count:
                raise ValueError(f"Regla con estado fuera de rango: ({q},{b})")
            if b not in (0, 1) or b2 not in (0, 1):
                raise ValueError(f"Regla con bit no binario: ({q},{b})")
            if d not in ("L", "R"):
                raise ValueError(f"Dirección inválida {d!r} en ({q},{b})")
        for q in range(self.state_count):
            if q in self.halt_states and self.halt_mode is HaltMode.EXPLICIT_HALT_STATE:
                continue
            for b in (0, 1):
                if (q, b) not in self.rules:
                    raise ValueError(f"Falta la regla para ({q},{b})")

    def name(self, q: int) -> str:
        if q < len(self.state_names):
            return self.state_names[q]
        return f"q{q}"


@dataclass(frozen=True)
class TapeState:
    cells: Bits
    head: int
    state: int
    halted: bool = False

    def read(self) -> int:
        if 0 <= self.head < len(self.cells):
            return self.cells[self.head]
        return 0


class RunMeters(NamedTuple):
    steps: int
    volume: int
    space: int


@dataclass(frozen=True)
class RunLimits:
    steps: int = 10_000
    space: Optional[int] = None


class RunResult(NamedTuple):
    tape: TapeState
    meters: RunMeters
    halted: bool


def _is_halted(tm: BinaryTM, cells: Sequence[int], head: int, state: int) -> bool:
    if head < 0:
        return True
    if tm.halt_mode is HaltMode.RIGHT_ROLL_OFF and head >= len(cells):
        return True
    if tm.halt_mode is HaltMode.EXPLICIT_HALT_STATE and state in tm.halt_states:
        return True
    return False


def initial_tape(tm: BinaryTM, input_bits: Iterable[int]) -> TapeState:
    cells = to_bits(input_bits)
    return TapeState(cells, 0, tm.start, _is_halted(tm, cells, 0, tm.start))


def tm_step(tm: BinaryTM, cfg: TapeState) -> TapeState:
    if cfg.halted:
        raise StepOnHalted(f"La máquina ya está parada (estado {tm.name(cfg.state)}, cabeza {cfg.head})")
    bit = cfg.read()
    q2, b2, d = tm.rules[(cfg.state, bit)]
    cells = list(cfg.cells)
    while len(cells) <= cfg.head:
        cells.append(0)
    cells[cfg.head] = b2
    head = cfg.head + (1 if d == "R" else -1)
    if head == len(cells) and tm.halt_mode is not HaltMode.RIGHT_ROLL_OFF:
        cells.append(0)
    return TapeState(tuple(cells), head, q2, _is_halted(tm, cells, head, q2))


def _visited(cfg: TapeState) -> int:
    if 0 <= cfg.head < len(cfg.cells):
        return cfg.head + 1
    return 0


def tm_run(tm: BinaryTM, input_bits: Iterable[int], limits: RunLimits = RunLimits()) -> RunResult:
    """Itera tm_step hasta parar o hasta que salte un límite (halted=False)."""
    if limits.steps < 0:
        raise ValueError("limits.steps no puede ser negativo")
    cfg = initial_tape(tm, input_bits)
    steps = 0
    space = _visited(cfg)
    while not cfg.halted and steps < limits.steps:
        cfg = tm_step(tm, cfg)
        steps += 1
        space = max(space, _visited(cfg))
        if limits.space is not None and space > limits.space:
            break
    return RunResult(cfg, RunMeters(steps=steps, volume=steps, space=space), cfg.halted)


def bounded_halt(tm: BinaryTM, input_bits: Iterable[int], t: int) -> bool:
    if t < 0:
        raise ValueError("t debe ser >= 0")
    return tm_run(tm, input_bits, RunLimits(steps=t)).halted


def tm_accepts(tm: BinaryTM, input_bits: Iterable[int], t: int) -> bool:
    result = tm_run(tm, input_bits, RunLimits(steps=t))
    return result.halted and result.tape.head >= 0 and result.tape.state in tm.accept_states


# ------------------------
# Máquinas simbólicas y su compilación a binario
# ------------------------
@dataclass(frozen=True)
class SymbolicTM:
    """TM sobre un alfabeto arbitrario; symbols[0] es el blanco."""

    symbols: Tuple[str, ...]
    states: Tuple[str, ...]
    start: str
    rules: Mapping[Tuple[str, str], Tuple[str, str, str]]
    accept: FrozenSet[str]
    reject: str
    halt: FrozenSet[str] = field(default_factory=frozenset)

    @property
    def halting(self) -> FrozenSet[str]:
        return self.accept | self.halt | {self.reject}


def code_width(symbols: Sequence[str]) -> int:
    return max(1, (len(symbols) - 1).bit_length())


def encode_symbols(stm: SymbolicTM, text: Iterable[str]) -> Bits:
    w = code_width(stm.symbols)
    out: List[int] = []
    for ch in text:
        out.extend(int_to_bits(stm.symbols.index(ch), w))
    return tuple(out)


def compile_symbolic(stm: SymbolicTM) -> BinaryTM:
    """
    Codifica cada símbolo con w bits (big-endian). Cada paso simbólico:
    lee el bloque hacia la derecha, reescribe hacia la izquierda y se
    desplaza w celdas en la dirección pedida.
    """
    w = code_width(stm.symbols)
    ids: Dict[Tuple, int] = {}
    names: List[str] = []
    rules: Dict[Tuple[int, int], Rule] = {}

    def sid(key: Tuple) -> int:
        if key not in ids:
            ids[key] = len(names)
            names.append("/".join(str(k) for k in key))
        return ids[key]

    def arrive(q: str) -> int:
        if q in stm.halting:
            return sid(("H", q))
        return sid(("R", q, ()))

    def post_move(q: str, d: str, remaining: int) -> int:
        if q in stm.halting:
            return sid(("H", q))
        if remaining == 0:
            return arrive(q)
        return sid(("P", q, d, remaining))

    start = arrive(stm.start)
    pending = [stm.start] if stm.start not in stm.halting else []
    seen = set(pending)
    while pending:
        q = pending.pop()
        for depth in range(w):
            for prefix in _prefixes(depth):
                here = sid(("R", q, prefix))
                for b in (0, 1):
                    code = prefix + (b,)
                    if depth < w - 1:
                        rules[(here, b)] = (sid(("R", q, code)), b, "R")
                        continue
                    index = int("".join(map(str, code)), 2)
                    sym = stm.symbols[index] if index < len(stm.symbols) else None
                    q2, s2, d = stm.rules.get((q, sym), (stm.reject, sym or stm.symbols[0], "R"))
                    if q2 not in stm.halting and q2 not in seen:
                        seen.add(q2)
                        pending.append(q2)
                    out = int_to_bits(stm.symbols.index(s2), w)
                    if w == 1:
                        rules[(here, b)] = (post_move(q2, d, 0), out[0], d)
                    else:
                        rules[(here, b)] = (sid(("W", q2, s2, d, w - 2)), out[w - 1], "L")
    # Escritura hacia la izquierda y desplazamientos: se generan para todo lo referenciado.
    changed = True
    while changed:
        changed = False
        for key in list(ids):
            here = ids[key]
            if (here, 0) in rules or key[0] == "H":
                continue
            changed = True
            if key[0] == "W":
                _, q2, s2, d, j = key
                out = int_to_bits(stm.symbols.index(s2), w)
                for b in (0, 1):
                    if j > 0:
                        rules[(here, b)] = (sid(("W", q2, s2, d, j - 1)), out[j], "L")
                    else:
                        rules[(here, b)] = (post_move(q2, d, w - 1), out[0], d)
            elif key[0] == "P":
                _, q2, d, remaining = key
                for b in (0, 1):
                    rules[(here, b)] = (post_move(q2, d, remaining - 1), b, d)
            elif key[0] == "R" and key[2] == ():
                raise AssertionError(f"Estado de lectura sin reglas: {key}")
    halts = frozenset(i for k, i in ids.items() if k[0] == "H")
    accepts = frozenset(i for k, i in ids.items() if k[0] == "H" and k[1] in stm.accept)
    logger.debug("Compilada TM simbólica: %d estados binarios, ancho %d", len(names), w)
    return BinaryTM(
        state_count=len(names),
        start=start,
        rules=rules,
        halt_mode=HaltMode.EXPLICIT_HALT_STATE,
        halt_states=halts,
        accept_states=accepts,
        state_names=tuple(names),
    )


def _prefixes(depth: int) -> List[Tuple[int, ...]]:
    return [int_to_bits(v, depth) for v in range(2 ** depth)] if depth else [()]


# ------------------------
# Reconocedor de ww
# ------------------------
WW_SYMBOLS = ("_", "a", "b", "A", "B")


def ww_symbolic() -> SymbolicTM:
    """
    Fase 1: capitaliza alternativamente la letra más a la izquierda y la más
    a la derecha hasta encontrar el centro. Fase 2: baja a minúsculas la
    segunda mitad y compara, de atrás hacia delante, cada mayúscula de la
    primera mitad con la última minúscula que queda.
    """
    rules: Dict[Tuple[str, str], Tuple[str, str, str]] = {}
    low = ("a", "b")

    def up(x: str) -> str:
        return x.upper()

    rules[("qL", "_")] = ("acc", "_", "R")
    for x in low:
        rules[("qL", x)] = ("qR1", up(x), "R")
        rules[("qL", up(x))] = ("lowR", x, "R")
        rules[("qR1", x)] = ("qR1", x, "R")
        rules[("qR1", up(x))] = ("qR2", up(x), "L")
        rules[("qR2", x)] = ("qBack", up(x), "L")
        rules[("qBack", x)] = ("qBack", x, "L")
        rules[("qBack", up(x))] = ("qL", up(x), "R")
        rules[("lowR", up(x))] = ("lowR", x, "R")
        rules[("back2", x)] = ("back2", x, "L")
        rules[("back2", up(x))] = (f"gap_{x}", "_", "R")
        rules[("chk", x)] = ("retLow", x, "L")
        rules[("retLow", x)] = ("retLow", x, "L")
        rules[("retGap", up(x))] = (f"gap_{x}", "_", "R")
    rules[("qR1", "_")] = ("qR2", "_", "L")
    rules[("lowR", "_")] = ("back2", "_", "L")
    rules[("chk", "_")] = ("acc", "_", "R")
    rules[("retLow", "_")] = ("retGap", "_", "L")
    rules[("retGap", "_")] = ("retGap", "_", "L")
    for carried in low:
        rules[(f"gap_{carried}", "_")] = (f"gap_{carried}", "_", "R")
        for x in low:
            rules[(f"gap_{carried}", x)] = (f"low_{carried}", x, "R")
            rules[(f"low_{carried}", x)] = (f"low_{carried}", x, "R")
        rules[(f"low_{carried}", "_")] = (f"cmp_{carried}", "_", "L")
        rules[(f"cmp_{carried}", carried)] = ("chk", "_", "L")
    states = tuple(sorted({q for q, _ in rules} | {"acc", "rej"}))
    return SymbolicTM(
        symbols=WW_SYMBOLS,
        states=states,
        start="qL",
        rules=rules,
        accept=frozenset({"acc"}),
        reject="rej",
    )


def tm_ww_recognizer() -> BinaryTM:
    return compile_symbolic(ww_symbolic())


def encode_ww_input(text: str) -> Bits:
    if any(ch not in "ab" for ch in text):
        raise ValueError(f"Sólo se admiten letras a/b: {text!r}")
    return encode_symbols(ww_symbolic(), text)


def is_ww(text: str) -> bool:
    half, rest = divmod(len(text), 2)
    return rest == 0 and text[:half] == text[half:]
