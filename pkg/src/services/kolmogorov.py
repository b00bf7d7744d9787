"""
Complejidad de Kolmogorov acotada en tiempo sobre una máquina de referencia de juguete.

Formato de programa: cabecera de 2 bits + campos + carga delimitada.
    00 LITERAL  gamma(|c| + 1) + c; salida = c
    01 REPEAT   gamma(n) + gamma(|c| + 1) + c; salida = c repetido n veces
    10 RUN-TM   gamma(q) + tabla de la máquina + gamma(|c| + 1) + c; la cinta empieza con y + c
    11 APPEND   gamma(|c| + 1) + c; salida = y + c

Un programa sólo es válido si la carga termina justo al final, así que ningún programa
válido es prefijo propio de otro. LITERAL de x cuesta |x| + literal_cost(|x|).
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from src.core.errors import BadInput, BudgetExceeded
from src.core.settings.workbench_service import get_workbench_settings
from src.services.machine_core import BinaryTM, HaltMode
from src.utils.utils import Bits, bits_to_int, int_to_bits, to_bits

logger = logging.getLogger(__name__)

LITERAL = (0, 0)
REPEAT = (0, 1)
RUN_TM = (1, 0)
APPEND = (1, 1)


class NotFound:
    """Ningún programa de la longitud permitida produce x."""

    _instance: Optional["NotFound"] = None

    def __new__(cls) -> "NotFound":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NotFound"

    def __bool__(self) -> bool:
        return False


NOT_FOUND = NotFound()


@dataclass(frozen=True)
class Instruction:
    opcode: Bits
    payload: Bits
    count: int = 1
    # entrada 2*q + b -> (q', b', derecha); sólo RUN-TM
    table: Tuple[Tuple[int, int, int], ...] = ()
    halt: int = 0


# ------------------------
# Codificación
# ------------------------
def gamma_encode(n: int) -> Bits:
    if n < 1:
        raise BadInput(f"gamma sólo codifica n >= 1: {n}")
    width = n.bit_length()
    return (0,) * (width - 1) + int_to_bits(n, width)


def gamma_decode(bits: Sequence[int], pos: int = 0) -> Optional[Tuple[int, int]]:
    """(valor, nueva posición) o None si el código está incompleto."""
    zeros = 0
    while pos + zeros < len(bits) and bits[pos + zeros] == 0:
        zeros += 1
    end = pos + 2 * zeros + 1
    if end > len(bits):
        return None
    return bits_to_int(bits[pos + zeros:end]), end


def literal_cost(n: int) -> int:
    """Bits de LITERAL además de los n de la carga."""
    return len(LITERAL) + len(gamma_encode(n + 1))


def _sized(payload: Sequence[int] | str) -> Bits:
    bits = to_bits(payload)
    return gamma_encode(len(bits) + 1) + bits


def encode_literal(x: Sequence[int] | str) -> Bits:
    return LITERAL + _sized(x)


def encode_repeat(pattern: Sequence[int] | str, count: int) -> Bits:
    return REPEAT + gamma_encode(count) + _sized(pattern)


def encode_append(payload: Sequence[int] | str) -> Bits:
    return APPEND + _sized(payload)


def encode_run_tm(tm: BinaryTM, input_bits: Sequence[int] | str = ()) -> Bits:
    """La máquina debe ser EXPLICIT_HALT_STATE con un único estado de parada, el último."""
    q = tm.state_count - 1
    if tm.halt_mode is not HaltMode.EXPLICIT_HALT_STATE or set(tm.halt_states) != {q} or q < 1:
        raise BadInput("RUN-TM necesita una máquina con parada explícita en su último estado")
    width = q.bit_length()
    out: List[int] = list(RUN_TM + gamma_encode(q))
    for state in range(q):
        for bit in (0, 1):
            q2, b2, d = tm.rules[(state, bit)]
            out += int_to_bits(q2, width) + (b2, 1 if d == "R" else 0)
    return tuple(out) + _sized(input_bits)


def decode_program(program: Sequence[int]) -> Optional[Instruction]:
    """Instrucción del programa, o None si no decodifica o sobran bits tras la carga."""
    program = tuple(program)
    if len(program) < 2:
        return None
    opcode, pos = program[:2], 2
    count, halt = 1, 0
    table: List[Tuple[int, int, int]] = []
    if opcode in (REPEAT, RUN_TM):
        decoded = gamma_decode(program, pos)
        if decoded is None:
            return None
        value, pos = decoded
        if opcode == REPEAT:
            count = value
        else:
            halt, width = value, value.bit_length()
            if pos + 2 * halt * (width + 2) > len(program):
                return None
            for _ in range(2 * halt):
                field = program[pos:pos + width + 2]
                pos += width + 2
                target = bits_to_int(field[:width])
                if target > halt:
                    return None
                table.append((target, field[width], field[width + 1]))
    decoded = gamma_decode(program, pos)
    if decoded is None:
        return None
    size, pos = decoded
    if pos + size - 1 != len(program):
        return None
    return Instruction(opcode, program[pos:], count, tuple(table), halt)


# ------------------------
# Máquina de referencia
# ------------------------
def _run_table(table: Tuple[Tuple[int, int, int], ...], halt: int, tape: List[int], tmax: int) -> Optional[Bits]:
    head, state, steps, space = 0, 0, 0, 1 if tape else 0
    while state != halt:
        if head < 0:
            break
        if steps >= tmax:
            return None
        if head == len(tape):
            tape.append(0)
        space = max(space, head + 1)
        q2, b2, right = table[2 * state + tape[head]]
        tape[head] = b2
        head += 1 if right else -1
        state = q2
        steps += 1
    return tuple(tape[:space])


def run_program(program: Sequence[int], y: Sequence[int] = (), tmax: Optional[int] = None, max_out: Optional[int] = None) -> Optional[Bits]:
    """Salida del programa sobre y, o None si no decodifica, no para en tmax o supera max_out."""
    tmax = get_workbench_settings().tmax if tmax is None else tmax
    instr = decode_program(program)
    if instr is None:
        return None
    y = tuple(y)
    out: Optional[Bits]
    if instr.opcode == LITERAL:
        out = instr.payload
    elif instr.opcode == APPEND:
        out = y + instr.payload
    elif instr.opcode == REPEAT:
        if max_out is not None and instr.count * len(instr.payload) > max_out:
            return None
        out = instr.payload * instr.count
    else:
        out = _run_table(instr.table, instr.halt, list(y + instr.payload), tmax)
    if out is None or (max_out is not None and len(out) > max_out):
        return None
    return out


def programs(max_len: int) -> Iterator[Bits]:
    """Todos los programas por longitud creciente y, dentro de cada longitud, en orden lexicográfico."""
    for length in range(2, max_len + 1):
        for bits in itertools.product((0, 1), repeat=length):
            yield bits


def _check_len(max_len: int) -> None:
    limit = get_workbench_settings().max_program_len
    if max_len > limit:
        raise BudgetExceeded(f"maxLen = {max_len} supera el límite de enumeración {limit}")


def complexity_table(
    y: Sequence[int] | str = (),
    max_len: int = 12,
    tmax: Optional[int] = None,
    max_out: Optional[int] = None,
) -> Dict[Bits, int]:
    """Longitud mínima de programa para cada salida alcanzable (enumeración única)."""
    _check_len(max_len)
    y = to_bits(y)
    best: Dict[Bits, int] = {}
    count = 0
    for prog in programs(max_len):
        count += 1
        out = run_program(prog, y, tmax, max_out)
        if out is not None and out not in best:
            best[out] = len(prog)
    logger.info("Tabla de complejidad: %d programas, %d salidas distintas", count, len(best))
    return best


def k_bounded(
    x: Sequence[int] | str,
    y: Sequence[int] | str = (),
    max_len: int = 12,
    tmax: Optional[int] = None,
) -> int | NotFound:
    _check_len(max_len)
    x, y = to_bits(x), to_bits(y)
    for prog in programs(max_len):
        if run_program(prog, y, tmax, len(x)) == x:
            return len(prog)
    return NOT_FOUND


def bin_of(n: int) -> Bits:
    if n < 1:
        raise BadInput(f"bin(n) requiere n >= 1: {n}")
    return to_bits(format(n, "b"))


def rarity(x: Sequence[int] | str, n: Optional[int] = None, tmax: Optional[int] = None) -> int:
    """d(x) = n - K(x | bin(n))."""
    x = to_bits(x)
    n = len(x) if n is None else n
    if len(x) != n:
        raise BadInput(f"|x| = {len(x)} distinto de n = {n}")
    if n > 12:
        raise BadInput(f"rarity limitada a n <= 12: {n}")
    k = k_bounded(x, bin_of(max(n, 1)), n + literal_cost(n), tmax)
    return n - k


def rarity_table(n: int, tmax: Optional[int] = None) -> Dict[Bits, int]:
    """Rareza de todos los x de n bits con una sola enumeración."""
    if n > 10:
        raise BadInput(f"El censo exhaustivo está limitado a n <= 10: {n}")
    table = complexity_table(bin_of(max(n, 1)), n + literal_cost(n), tmax, max_out=n)
    out = {}
    for i in range(1 << n):
        x = int_to_bits(i, n)
        # LITERAL siempre está en la tabla
        out[x] = n - table[x]
    return out


def census(n: int, i: int, tmax: Optional[int] = None, table: Optional[Dict[Bits, int]] = None) -> int:
    """Número de x de n bits con d(x) > i; nunca llega a 2^(n-i)."""
    table = rarity_table(n, tmax) if table is None else table
    count = sum(1 for d in table.values() if d > i)
    if count >= 2 ** (n - i):
        raise AssertionError(f"census({n}, {i}) = {count} viola la cota 2^{n - i}")
    return count
