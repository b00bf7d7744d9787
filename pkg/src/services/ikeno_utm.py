"""
Máquina universal de 11 estados y 6 símbolos.

Disposición de la cinta (de izquierda a derecha):
    *' 0'...0'          comando previo ficticio que apunta al estado inicial
    * S d b  (x 2N)     un segmento por (s, b), en orden (s, b) descendente
    *                   separador
    x0 x1 ...           cinta de M (se extiende con 0 por la derecha)

Un ciclo empieza en F o f sobre la celda de M donde está su cabeza. Desde el
comando previo en el segmento P, con S = 1^k (delta = -k) o 0^k (delta = +k),
la máquina llega al segmento P + delta - beta, donde beta es el bit leído.
Por eso, para cada estado s, el segmento (s, 1) queda justo a la izquierda de
(s, 0). El bit d vale 1 para girar a la derecha (B -> F) y 0 para la izquierda
(A -> f).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from src.core.errors import NotBinary, UnreachableEntry
from src.services.machine_core import BinaryTM, HaltMode, RunLimits, tm_run, tm_step, initial_tape
from src.utils.utils import Bits, to_bits

logger = logging.getLogger(__name__)


class UtmState(str, Enum):
    A = "A"
    B = "B"
    f = "f"
    F = "F"
    D = "D"
    E = "E"
    d = "d"
    b = "b"
    a = "a"
    c = "c"
    e = "e"
    HALT = "="

    @property
    def looks_left(self) -> bool:
        return self.value.islower()


# Símbolos en el orden de las columnas de la tabla.
SYMBOLS: Tuple[str, ...] = ("1", "0", "*", "1'", "0'", "*'")
ONE, ZERO, STAR, ONE_P, ZERO_P, STAR_P = range(6)
_RENDER = {ONE: "1", ZERO: "0", STAR: "*", ONE_P: "i", ZERO_P: "o", STAR_P: "x"}
_PARSE_RENDER = {v: k for k, v in _RENDER.items()}


def prime(sym: int) -> int:
    return sym + 3 if sym < 3 else sym


def unprime(sym: int) -> int:
    return sym - 3 if sym >= 3 else sym


def toggle_prime(sym: int) -> int:
    return sym - 3 if sym >= 3 else sym + 3


# Tabla tal y como se imprime: sólo lo que cambia, salvo la prima.
_TABLE_TEXT: Dict[str, Tuple[str, ...]] = {
    "A": ("f", "f", "e0", "", "", ""),
    "B": ("F", "F", "e1", "", "", ""),
    "f": ("b*", "a*", "F", "", "", "c"),
    "F": ("b*", "a*", "F", "", "", "c"),
    "D": ("d'", "--", "", "", "", "e'"),
    "E": ("=", "--", "'", "'", "'", "e'"),
    "d": ("'", "'", "", "'", "'", "D"),
    "b": ("'", "'", "'", "", "a'", "D"),
    "a": ("'", "'", "'", "b'", "F", "E'"),
    "c": ("'", "'", "", "=", "F", "E'"),
    "e": ("'", "'", "'", "B", "A", "A/B"),
}

_CHOICE = "A/B"
_UNREACHABLE = "--"


@dataclass(frozen=True)
class TableEntry:
    state: UtmState
    symbol: int


def _expand(state: UtmState, sym: int, cell: str, choice: str) -> TableEntry:
    if cell == _UNREACHABLE:
        raise UnreachableEntry(f"Celda '--' en ({state.value}, {SYMBOLS[sym]}): cinta corrupta")
    if cell == "=":
        return TableEntry(UtmState.HALT, sym)
    if cell == _CHOICE:
        return TableEntry(UtmState(choice), unprime(sym))
    new_state = state
    base = unprime(sym)
    primed = False
    for ch in cell:
        if ch == "'":
            primed = True
        elif ch in "01":
            base = ZERO if ch == "0" else ONE
        elif ch == "*":
            base = STAR
        else:
            new_state = UtmState(ch)
    return TableEntry(new_state, prime(base) if primed else base)


def utm_transition(
    state: UtmState,
    sym: int,
    choice: str = "A",
    overrides: Optional[Mapping[Tuple[str, int], Tuple[str, int]]] = None,
) -> TableEntry:
    """Entrada de la tabla para (estado, símbolo). El giro lo da el caso del nuevo estado."""
    if state is UtmState.HALT:
        raise UnreachableEntry("La máquina universal ya está parada")
    if overrides and (state.value, sym) in overrides:
        new_state, new_sym = overrides[(state.value, sym)]
        return TableEntry(UtmState(new_state), new_sym)
    return _expand(state, sym, _TABLE_TEXT[state.value][sym], choice)


# ------------------------
# Codificación de programas
# ------------------------
@dataclass(frozen=True)
class Segment:
    state: int
    bit: int
    offset: int
    turn: int
    write: int

    @property
    def pointer(self) -> str:
        return ("1" * -self.offset) if self.offset < 0 else ("0" * self.offset)


@dataclass(frozen=True)
class ProgramImage:
    state_count: int
    start: int
    segments: Tuple[Segment, ...]

    def index_of(self, state: int, bit: int) -> int:
        return 2 * (self.state_count - 1 - state) + (1 - bit)

    def base(self, state: int) -> int:
        return self.index_of(state, 0)


def encode_program(tm: BinaryTM) -> ProgramImage:
    if tm.halt_mode is not HaltMode.LEFT_ROLL_OFF:
        raise NotBinary("Sólo se codifican máquinas binarias que paran saliendo por la izquierda")
    n = tm.state_count
    layout = [(s, b) for s in reversed(range(n)) for b in (1, 0)]
    image_stub = ProgramImage(n, tm.start, ())
    segments: List[Segment] = []
    for position, (s, b) in enumerate(layout):
        s2, b2, d = tm.rules[(s, b)]
        offset = image_stub.base(s2) - position
        segments.append(Segment(s, b, offset, 1 if d == "R" else 0, b2))
    image = ProgramImage(n, tm.start, tuple(segments))
    for position, seg in enumerate(image.segments):
        for beta in (0, 1):
            target = position + seg.offset - beta
            if not 0 <= target < len(image.segments):
                raise NotBinary(f"Desplazamiento sin destino en el segmento {position}")
    return image


def decode_program(image: ProgramImage) -> Dict[Tuple[int, int], Tuple[int, int, str]]:
    bases = {image.base(s): s for s in range(image.state_count)}
    rules: Dict[Tuple[int, int], Tuple[int, int, str]] = {}
    for position, seg in enumerate(image.segments):
        s2 = bases[position + seg.offset]
        rules[(seg.state, seg.bit)] = (s2, seg.write, "R" if seg.turn else "L")
    return rules


# ------------------------
# Cinta y ejecución
# ------------------------
@dataclass(frozen=True)
class UtmTape:
    symbols: Tuple[int, ...]
    head: int
    state: UtmState
    separator: int

    def render(self) -> str:
        return "".join(_RENDER[s] for s in self.symbols)

    def simulated_tape(self) -> Bits:
        """Región de M sin primas, sin ceros finales."""
        cells = [1 if unprime(s) == ONE else 0 for s in self.symbols[self.separator + 1:]]
        while cells and cells[-1] == 0:
            cells.pop()
        return tuple(cells)

    def simulated_head(self) -> int:
        return self.head - self.separator - 1

    def program_bases(self) -> Tuple[int, ...]:
        return tuple(unprime(s) for s in self.symbols[: self.separator + 1])


def parse_tape(text: str, head: int = 0, state: str = "F") -> UtmTape:
    symbols = tuple(_PARSE_RENDER[ch] for ch in text)
    separator = max(i for i, s in enumerate(symbols) if unprime(s) == STAR)
    return UtmTape(symbols, head, UtmState(state), separator)


def utm_initial_tape(prog: ProgramImage, input_bits: Sequence[int]) -> UtmTape:
    symbols: List[int] = [STAR_P] + [ZERO_P] * (prog.base(prog.start) + 1)
    for seg in prog.segments:
        symbols.append(STAR)
        symbols.extend(ONE if ch == "1" else ZERO for ch in seg.pointer)
        symbols.append(ONE if seg.turn else ZERO)
        symbols.append(ONE if seg.write else ZERO)
    symbols.append(STAR)
    separator = len(symbols) - 1
    cells = list(to_bits(input_bits)) or [0]
    symbols.extend(ONE if b else ZERO for b in cells)
    return UtmTape(tuple(symbols), separator + 1, UtmState.F, separator)


class UtmRun(NamedTuple):
    tape: UtmTape
    cycles: int
    halted: bool


def _cycle_cap(tape: UtmTape) -> int:
    size = len(tape.symbols) + 8
    return 16 * size * size


def iter_cycles(
    prog: ProgramImage,
    input_bits: Sequence[int],
    choice: str = "A",
    overrides: Optional[Mapping[Tuple[str, int], Tuple[str, int]]] = None,
) -> Iterator[Tuple[UtmTape, bool]]:
    """
    Produce (cinta, parada) al final de cada ciclo. Un ciclo termina cuando
    la cabeza, en F o f, está sobre una celda sin prima de la región de M;
    f sobre el separador significa que M se salió por la izquierda.
    """
    tape = utm_initial_tape(prog, input_bits)
    symbols = list(tape.symbols)
    head, state, sep = tape.head, tape.state, tape.separator
    while True:
        steps = 0
        cap = _cycle_cap(UtmTape(tuple(symbols), head, state, sep))
        first = True
        while True:
            if not first and state in (UtmState.F, UtmState.f):
                if head > sep and symbols[head] in (ZERO, ONE):
                    yield UtmTape(tuple(symbols), head, state, sep), False
                    break
                if head == sep and state is UtmState.f:
                    yield UtmTape(tuple(symbols), head, state, sep), True
                    return
            first = False
            entry = utm_transition(state, symbols[head], choice, overrides)
            symbols[head] = entry.symbol
            state = entry.state
            if state is UtmState.HALT:
                yield UtmTape(tuple(symbols), head, state, sep), True
                return
            head += -1 if state.looks_left else 1
            if head < 0:
                yield UtmTape(tuple(symbols), head, state, sep), True
                return
            if head == len(symbols):
                symbols.append(ZERO)
            steps += 1
            if steps > cap:
                logger.warning("Ciclo sin terminar tras %d pasos; se corta la ejecución", steps)
                return


def utm_run(
    prog: ProgramImage,
    input_bits: Sequence[int],
    cycle_limit: int,
    choice: str = "A",
    overrides: Optional[Mapping[Tuple[str, int], Tuple[str, int]]] = None,
) -> UtmRun:
    if cycle_limit < 0:
        raise ValueError("cycleLimit debe ser >= 0")
    tape = utm_initial_tape(prog, input_bits)
    cycles = 0
    if cycle_limit == 0:
        return UtmRun(tape, 0, False)
    for tape, halted in iter_cycles(prog, input_bits, choice, overrides):
        cycles += 1
        if halted or cycles >= cycle_limit:
            return UtmRun(tape, cycles, halted)
    return UtmRun(tape, cycles, False)


# ------------------------
# Correspondencia ciclo a ciclo
# ------------------------
@dataclass(frozen=True)
class CycleReport:
    exact: bool
    cycles_checked: int
    first_divergence: Optional[int] = None
    detail: str = "exact"


def _strip(bits: Sequence[int]) -> Bits:
    out = list(bits)
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def cycle_correspondence(
    tm: BinaryTM,
    input_bits: Sequence[int],
    n_cycles: int,
    overrides: Optional[Mapping[Tuple[str, int], Tuple[str, int]]] = None,
) -> CycleReport:
    prog = encode_program(tm)
    bits = to_bits(input_bits)
    cfg = initial_tape(tm, bits)
    start = utm_initial_tape(prog, bits)
    if start.simulated_tape() != _strip(cfg.cells) or start.simulated_head() != cfg.head:
        return CycleReport(False, 0, 0, "la codificación inicial no coincide")
    checked = 0
    cycles = iter_cycles(prog, bits, overrides=overrides)
    while checked < n_cycles:
        if cfg.halted:
            return CycleReport(True, checked)
        cfg = tm_step(tm, cfg)
        tape_halted = next(cycles, None)
        checked += 1
        if tape_halted is None:
            return CycleReport(False, checked, checked, "la máquina universal dejó de ciclar")
        tape, halted = tape_halted
        if halted != cfg.halted:
            return CycleReport(False, checked, checked, f"parada distinta: U={halted} M={cfg.halted}")
        if tape.simulated_tape() != _strip(cfg.cells):
            return CycleReport(False, checked, checked, f"cinta distinta: U={tape.simulated_tape()} M={_strip(cfg.cells)}")
        if tape.simulated_head() != cfg.head:
            return CycleReport(False, checked, checked, f"cabeza distinta: U={tape.simulated_head()} M={cfg.head}")
    return CycleReport(True, checked)


def halting_cycles(tm: BinaryTM, input_bits: Sequence[int], limit: int) -> Tuple[Optional[int], Optional[int]]:
    """(pasos de M hasta parar, ciclos de U hasta parar), None si no para dentro del límite."""
    direct = tm_run(tm, input_bits, RunLimits(steps=limit))
    run = utm_run(encode_program(tm), input_bits, limit)
    return (direct.meters.steps if direct.halted else None, run.cycles if run.halted else None)
