"""
Teselas con una letra en cada esquina y la reducción cómputo -> teselado.

Una tesela encaja a la derecha de otra si coinciden las dos letras del lado
compartido; igual por debajo. Resolver una instancia = extender la primera
fila dada a `height` filas.

Reducción (tiles_from_run): la tabla espacio-tiempo de la máquina tiene una
columna de borde a cada lado, dos filas de inicio idénticas (v, ranuras '?' para
el testigo w, blancos) y debajo las configuraciones. Cada celda se corta en
cuatro cuartos con su contenido y cada tesela junta los cuatro cuartos que
comparten una esquina, es decir, una ventana 2x2 de la tabla. Sólo se generan
las ventanas permitidas por las reglas de la máquina.
"""

from __future__ import annotations

import itertools
import logging
import math
import string
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from src.core.errors import BadInput, BudgetExceeded, HeightTooLarge
from src.core.settings.workbench_service import get_workbench_settings
from src.services.machine_core import BinaryTM, HaltMode, initial_tape, tm_step
from src.utils.utils import Bits, to_bits

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tile:
    nw: str
    ne: str
    sw: str
    se: str

    def __str__(self) -> str:
        return f"{self.nw} {self.ne} {self.sw} {self.se}"


def sides_match(t1: Tile, t2: Tile, direction: str) -> bool:
    """direction='right': t2 a la derecha de t1; 'below': t2 debajo de t1."""
    if direction == "right":
        return (t1.ne, t1.se) == (t2.nw, t2.sw)
    if direction == "below":
        return (t1.sw, t1.se) == (t2.nw, t2.ne)
    raise BadInput(f"Dirección desconocida: {direction!r}")


@dataclass(frozen=True)
class TilingInstance:
    tiles: Tuple[Tile, ...]
    first_row: Tuple[Tile, ...]
    height: int
    alphabet: FrozenSet[str] = field(default=frozenset())

    def __post_init__(self) -> None:
        if self.height < 1:
            raise BadInput(f"La altura debe ser >= 1: {self.height}")
        if not self.first_row:
            raise BadInput("La primera fila está vacía")
        if not self.alphabet:
            letters = {c for t in self.tiles + self.first_row for c in (t.nw, t.ne, t.sw, t.se)}
            object.__setattr__(self, "alphabet", frozenset(letters))

    @property
    def width(self) -> int:
        return len(self.first_row)

    @property
    def first_row_consistent(self) -> bool:
        return all(sides_match(a, b, "right") for a, b in zip(self.first_row, self.first_row[1:]))


@dataclass(frozen=True)
class TilingResult:
    ok: bool
    rows: Optional[Tuple[Tuple[Tile, ...], ...]] = None
    nodes: int = 0


# ------------------------
# Solvers
# ------------------------
def _index_by_top(tiles: Iterable[Tile]) -> Dict[Tuple[str, str], List[Tile]]:
    index: Dict[Tuple[str, str], List[Tile]] = {}
    for t in dict.fromkeys(tiles):
        index.setdefault((t.nw, t.ne), []).append(t)
    return index


def solve_backtrack(inst: TilingInstance, budget: Optional[int] = None) -> TilingResult:
    """Búsqueda exhaustiva fila a fila, de izquierda a derecha."""
    budget = get_workbench_settings().budget if budget is None else budget
    if not inst.first_row_consistent:
        return TilingResult(False)
    if inst.height == 1:
        return TilingResult(True, (inst.first_row,))

    by_top = _index_by_top(inst.tiles)
    width = inst.width
    rows: List[List[Optional[Tile]]] = [list(inst.first_row)] + [[None] * width for _ in range(inst.height - 1)]
    nodes = 0

    def place(r: int, c: int) -> bool:
        nonlocal nodes
        if r == inst.height:
            return True
        above = rows[r - 1][c]
        for t in by_top.get((above.sw, above.se), ()):
            if c > 0 and not sides_match(rows[r][c - 1], t, "right"):
                continue
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded(f"Búsqueda de teselado supera {budget} nodos")
            rows[r][c] = t
            nxt = (r, c + 1) if c + 1 < width else (r + 1, 0)
            if place(*nxt):
                return True
        rows[r][c] = None
        return False

    ok = place(1, 0)
    logger.debug("Backtracking: %d nodos, resultado %s", nodes, ok)
    if not ok:
        return TilingResult(False, None, nodes)
    return TilingResult(True, tuple(tuple(row) for row in rows), nodes)


def _column_stacks(top: Tile, by_top: Dict[Tuple[str, str], List[Tile]], height: int) -> List[Tuple[Tile, ...]]:
    stacks: List[Tuple[Tile, ...]] = [(top,)]
    for _ in range(height - 1):
        stacks = [s + (t,) for s in stacks for t in by_top.get((s[-1].sw, s[-1].se), ())]
    return stacks


def solve_narrow_dp(inst: TilingInstance, slack: Optional[int] = None, budget: Optional[int] = None) -> bool:
    """
    Programación dinámica por columnas: el estado es una columna completa de
    teselas. Polinómica si height = O(log width).
    """
    settings = get_workbench_settings()
    slack = settings.dp_height_slack if slack is None else slack
    budget = settings.budget if budget is None else budget
    limit = slack * math.log2(inst.width) + slack
    if inst.height > limit:
        raise HeightTooLarge(f"Altura {inst.height} > {limit:.2f} para anchura {inst.width}")
    if not inst.first_row_consistent:
        return False

    by_top = _index_by_top(inst.tiles)
    reachable: Optional[set] = None
    explored = 0
    for top in inst.first_row:
        stacks = _column_stacks(top, by_top, inst.height)
        explored += len(stacks)
        if explored > budget:
            raise BudgetExceeded(f"Programación dinámica supera {budget} columnas")
        nxt = set()
        for s in stacks:
            left = tuple((t.nw, t.sw) for t in s)
            if reachable is None or left in reachable:
                nxt.add(tuple((t.ne, t.se) for t in s))
        if not nxt:
            return False
        reachable = nxt
    return True


# ------------------------
# Reducción cómputo -> teselado
# ------------------------
# Símbolos de celda (antes de traducirlos a letras):
#   ("|",)                          borde
#   ("I", layer, kind, first)       fila de inicio; kind in {"0","1","?","#"}
#   ("C", bit, state|-1, tag)       configuración; tag in {"", "S", "L", "R"}
Cell = Tuple


def _config(bit: int, state: int = -1, tag: str = "") -> Cell:
    return ("C", bit, state, tag)


class _RunTable:
    """Ventanas 2x2 permitidas para una máquina dada."""

    def __init__(self, tm: BinaryTM):
        self.tm = tm
        banned = tm.halt_states if tm.halt_mode is HaltMode.EXPLICIT_HALT_STATE else frozenset()
        self.live_states = [q for q in range(tm.state_count) if q not in banned]

    def alphabet(self) -> List[Cell]:
        cells: List[Cell] = [("|",)]
        cells += [("I", layer, kind, first) for layer in (0, 1) for kind in "01?#" for first in (False, True)]
        for bit in (0, 1):
            cells.append(_config(bit))
            cells += [_config(bit, q, tag) for q in self.live_states for tag in "SLR"]
        return cells

    def _rule(self, cell: Cell) -> Optional[Tuple[int, int, str]]:
        if cell[0] != "C" or cell[2] < 0:
            return None
        return self.tm.rules.get((cell[2], cell[1]))

    def below(self, cell: Cell) -> List[Cell]:
        """Sucesores de una celda en su columna, sin mirar vecinos."""
        if cell[0] == "|":
            return [cell]
        if cell[0] == "I":
            _, layer, kind, first = cell
            if layer == 0:
                return [("I", 1, kind, first)]
            bits = {"0": (0,), "1": (1,), "#": (0,), "?": (0, 1)}[kind]
            start = self.tm.start
            if first and start not in self.live_states:
                return []
            return [_config(b, start, "S") if first else _config(b) for b in bits]
        _, bit, state, _ = cell
        if state >= 0:
            rule = self._rule(cell)
            return [] if rule is None else [_config(rule[1])]
        return [_config(bit)] + [_config(bit, q, tag) for q in self.live_states for tag in "LR"]

    def window_ok(self, tl: Cell, tr: Cell, bl: Cell, br: Cell) -> bool:
        if bl not in self.below(tl) or br not in self.below(tr):
            return False
        rl, rr = self._rule(tl), self._rule(tr)
        if br[0] == "C" and br[3] == "L":
            if rl is None or rl[2] != "R" or rl[0] != br[2]:
                return False
        if bl[0] == "C" and bl[3] == "R":
            if rr is None or rr[2] != "L" or rr[0] != bl[2]:
                return False
        if rl is not None and rl[2] == "R":
            if br[0] != "C" or br[3] != "L" or br[2] != rl[0]:
                return False
        if rr is not None and rr[2] == "L":
            if bl[0] != "C" or bl[3] != "R" or bl[2] != rr[0]:
                return False
        return True

    def windows(self) -> List[Tuple[Cell, Cell, Cell, Cell]]:
        out = []
        cells = self.alphabet()
        for tl, tr in itertools.product(cells, repeat=2):
            if tl[0] == tr[0] == "|":
                continue
            for bl in self.below(tl):
                for br in self.below(tr):
                    if self.window_ok(tl, tr, bl, br):
                        out.append((tl, tr, bl, br))
        return out


def _letter_names(symbols: Sequence[Cell]) -> Dict[Cell, str]:
    letters = string.ascii_lowercase
    if len(symbols) <= len(letters):
        return {s: letters[i] for i, s in enumerate(symbols)}
    if len(symbols) > len(letters) ** 2:
        raise BadInput(f"Demasiados símbolos de celda: {len(symbols)}")
    return {s: letters[i // 26] + letters[i % 26] for i, s in enumerate(symbols)}


def initial_row(v: Sequence[int], witness_len: int, blank: int) -> List[Cell]:
    kinds = [str(b) for b in v] + ["?"] * witness_len + ["#"] * blank
    return [("I", 0, k, i == 0) for i, k in enumerate(kinds)]


def tiles_from_run(
    tm: BinaryTM,
    v: Sequence[int] | str,
    height: int,
    witness_len: int = 2,
    blank: int = 1,
) -> TilingInstance:
    """
    Instancia extensible a `height` filas sii existe un testigo w de longitud
    witness_len con el que la máquina corre height-2 pasos sin parar ni salirse
    de la cinta de |v| + witness_len + blank celdas.
    """
    v = to_bits(v)
    if height < 1:
        raise BadInput(f"La altura debe ser >= 1: {height}")
    if len(v) + witness_len + blank < 1:
        raise BadInput("La cinta de la reducción está vacía")
    table = _RunTable(tm)
    symbols = table.alphabet()
    names = _letter_names(symbols)
    tiles = tuple(
        Tile(names[tl], names[tr], names[bl], names[br]) for tl, tr, bl, br in table.windows()
    )
    edge = ("|",)
    top = [edge] + initial_row(v, witness_len, blank) + [edge]
    second = [table.below(c)[0] for c in top]
    first_row = tuple(
        Tile(names[top[i]], names[top[i + 1]], names[second[i]], names[second[i + 1]])
        for i in range(len(top) - 1)
    )
    logger.info("Reducción: %d teselas, %d letras, anchura %d", len(tiles), len(symbols), len(first_row))
    return TilingInstance(tiles, first_row, height, frozenset(names.values()))


def run_is_legal(tm: BinaryTM, tape: Sequence[int], steps: int) -> bool:
    """La máquina hace `steps` pasos sin parar ni salirse de la cinta finita."""
    width = len(tape)
    cfg = initial_tape(tm, tape)
    if cfg.halted:
        return False
    for _ in range(steps):
        cfg = tm_step(tm, cfg)
        if cfg.halted or cfg.head >= width:
            return False
    return True


def brute_force_extendable(
    tm: BinaryTM,
    v: Sequence[int] | str,
    height: int,
    witness_len: int = 2,
    blank: int = 1,
) -> bool:
    """Oráculo: prueba todos los testigos w directamente sobre la máquina."""
    v = to_bits(v)
    if height == 1:
        return True
    for w in itertools.product((0, 1), repeat=witness_len):
        tape: Bits = v + tuple(w) + (0,) * blank
        if run_is_legal(tm, tape, height - 2):
            return True
    return False
