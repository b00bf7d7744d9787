"""
Autómatas celulares 1D, Juego de la Vida y el reconocedor de ww como CA.

Métodos principales:
    - ca_step(ca, row) / ca_run(ca, row, steps)
    - elementary_rule(number)
    - life_step(grid) / life_run(grid, steps)
    - ww_ca_recognizer(x) / ww_ca_batch(words)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np

from src.core.errors import SymbolOutOfAlphabet

logger = logging.getLogger(__name__)

Row = Tuple[str, ...]
LocalRule = Union[Callable[[str, str, str], str], Mapping[Tuple[str, str, str], str]]


# ------------------------
# CA 1D genérico
# ------------------------
@dataclass(frozen=True)
class CA1D:
    """Radio 1. Los extremos de la fila ven la celda quiescente como vecina fija."""

    alphabet: FrozenSet[str]
    rule: LocalRule
    quiescent: str

    def __post_init__(self) -> None:
        if self.quiescent not in self.alphabet:
            raise SymbolOutOfAlphabet(f"Símbolo quiescente fuera del alfabeto: {self.quiescent!r}")
        q = self.quiescent
        if self.apply(q, q, q) != q:
            raise ValueError("La regla debe fijar (q,q,q) -> q")

    def apply(self, left: str, me: str, right: str) -> str:
        if isinstance(self.rule, Mapping):
            try:
                out = self.rule[(left, me, right)]
            except KeyError:
                raise SymbolOutOfAlphabet(f"Regla no definida para {(left, me, right)}") from None
        else:
            out = self.rule(left, me, right)
        if out not in self.alphabet:
            raise SymbolOutOfAlphabet(f"La regla produce {out!r} fuera del alfabeto")
        return out


def _as_row(ca: CA1D, row: Union[str, Sequence[str]]) -> Row:
    cells = tuple(row)
    for sym in cells:
        if sym not in ca.alphabet:
            raise SymbolOutOfAlphabet(f"Símbolo {sym!r} fuera del alfabeto {sorted(ca.alphabet)}")
    return cells


def ca_step(ca: CA1D, row: Union[str, Sequence[str]]) -> Row:
    cells = _as_row(ca, row)
    padded = (ca.quiescent,) + cells + (ca.quiescent,)
    return tuple(ca.apply(padded[i - 1], padded[i], padded[i + 1]) for i in range(1, len(padded) - 1))


def ca_run(ca: CA1D, row: Union[str, Sequence[str]], steps: int) -> List[Row]:
    cells = _as_row(ca, row)
    if not cells:
        raise ValueError("La fila no puede estar vacía")
    rows = [cells]
    for _ in range(steps):
        rows.append(ca_step(ca, rows[-1]))
    return rows


def elementary_rule(number: int) -> CA1D:
    """CA binario de radio 1 con la numeración de Wolfram (0..255)."""
    if not 0 <= number <= 255:
        raise ValueError(f"Número de regla fuera de rango: {number}")
    table: Dict[Tuple[str, str, str], str] = {}
    for pattern in range(8):
        l, s, r = (pattern >> 2) & 1, (pattern >> 1) & 1, pattern & 1
        table[(str(l), str(s), str(r))] = str((number >> pattern) & 1)
    if table[("0", "0", "0")] != "0":
        raise ValueError("Con extremos fijos a 0 la regla debe cumplir 000 -> 0")
    return CA1D(frozenset({"0", "1"}), table, "0")


def identity_rule(alphabet: Iterable[str], quiescent: str) -> CA1D:
    return CA1D(frozenset(alphabet), lambda l, s, r: s, quiescent)


# ------------------------
# Juego de la Vida
# ------------------------
class Boundary(Enum):
    TORUS = "torus"
    DEAD_EDGE = "dead"


@dataclass(frozen=True)
class LifeGrid:
    cells: np.ndarray
    boundary: Boundary = Boundary.TORUS

    def __post_init__(self) -> None:
        if self.cells.ndim != 2 or min(self.cells.shape) < 1:
            raise ValueError("La rejilla debe ser 2D y no vacía")
        object.__setattr__(self, "cells", self.cells.astype(bool))

    @property
    def height(self) -> int:
        return int(self.cells.shape[0])

    @property
    def width(self) -> int:
        return int(self.cells.shape[1])

    def population(self) -> int:
        return int(self.cells.sum())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LifeGrid):
            return NotImplemented
        return self.boundary is other.boundary and np.array_equal(self.cells, other.cells)

    def __hash__(self) -> int:
        return hash((self.boundary, self.cells.tobytes(), self.cells.shape))


def empty_grid(height: int, width: int, boundary: Boundary = Boundary.TORUS) -> LifeGrid:
    return LifeGrid(np.zeros((height, width), dtype=bool), boundary)


def _neighbours(grid: LifeGrid) -> np.ndarray:
    cells = grid.cells.astype(np.int8)
    if grid.boundary is Boundary.TORUS:
        total = np.zeros_like(cells)
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dy or dx:
                    total += np.roll(np.roll(cells, dy, axis=0), dx, axis=1)
        return total
    padded = np.pad(cells, 1)
    h, w = cells.shape
    total = np.zeros_like(cells)
    for dy in (0, 1, 2):
        for dx in (0, 1, 2):
            if dy != 1 or dx != 1:
                total += padded[dy:dy + h, dx:dx + w]
    return total


def life_step(grid: LifeGrid) -> LifeGrid:
    """Vive con 3 vecinos; sobrevive con 2 si ya estaba viva."""
    n = _neighbours(grid)
    alive = (n == 3) | (grid.cells & (n == 2))
    return LifeGrid(alive, grid.boundary)


def life_run(grid: LifeGrid, steps: int) -> List[LifeGrid]:
    out = [grid]
    for _ in range(steps):
        out.append(life_step(out[-1]))
    return out


def place(grid: LifeGrid, pattern: Sequence[Tuple[int, int]], top: int = 0, left: int = 0) -> LifeGrid:
    cells = grid.cells.copy()
    for y, x in pattern:
        cells[(top + y) % grid.height, (left + x) % grid.width] = True
    return LifeGrid(cells, grid.boundary)


BLINKER_VERTICAL = ((0, 1), (1, 1), (2, 1))
BLINKER_HORIZONTAL = ((1, 0), (1, 1), (1, 2))
BLOCK = ((0, 0), (0, 1), (1, 0), (1, 1))
GLIDER = ((0, 1), (1, 2), (2, 0), (2, 1), (2, 2))


# ------------------------
# Reconocedor de ww
# ------------------------
# Campos por celda: entrada i, coche c (copia), marcas first/settled, señal
# rápida F (derecha con paridad, o izquierda), señal lenta S con fase 0..2,
# marca de arranque y resultado que viaja a la izquierda.
_NONE, _A, _B = 0, 1, 2
_ACC, _REJ = 1, 2


@dataclass
class WwField:
    i: np.ndarray
    c: np.ndarray
    first: np.ndarray
    settled: np.ndarray
    f_right: np.ndarray
    parity: np.ndarray
    f_left: np.ndarray
    s: np.ndarray
    phase: np.ndarray
    start: np.ndarray
    result: np.ndarray = field(default=None)  # type: ignore[assignment]


def _from_left(arr: np.ndarray, fill: int = 0) -> np.ndarray:
    out = np.empty_like(arr)
    out[:, 0] = fill
    out[:, 1:] = arr[:, :-1]
    return out


def _from_right(arr: np.ndarray, fill: int = 0) -> np.ndarray:
    out = np.empty_like(arr)
    out[:, -1] = fill
    out[:, :-1] = arr[:, 1:]
    return out


def _initial_field(words: Sequence[str]) -> WwField:
    batch, n = len(words), len(words[0])
    i = np.array([[_A if ch == "a" else _B for ch in w] for w in words], dtype=np.int8).reshape(batch, n)
    zeros = np.zeros((batch, n), dtype=np.int8)
    false = np.zeros((batch, n), dtype=bool)
    start = false.copy()
    start[:, 0] = True
    return WwField(
        i=i, c=zeros.copy(), first=false.copy(), settled=false.copy(),
        f_right=false.copy(), parity=zeros.copy(), f_left=false.copy(),
        s=false.copy(), phase=zeros.copy(), start=start, result=zeros.copy(),
    )


def ww_step(cur: WwField) -> WwField:
    """Un paso síncrono: cada celda depende sólo de sí misma y de sus dos vecinas."""
    batch, n = cur.i.shape
    edge = np.zeros((batch, n), dtype=bool)
    edge[:, -1] = True
    spawn = cur.start

    # Señal rápida hacia la derecha con paridad de celdas recorridas.
    arrive_r = _from_left(cur.f_right, False) | spawn
    par = np.where(spawn, 1, 1 - _from_left(cur.parity, 0)).astype(np.int8)
    at_edge = arrive_r & edge
    f_rej = at_edge & (par == 1)
    born_left = at_edge & (par == 0)
    f_right = arrive_r & ~edge
    parity = np.where(f_right, par, 0).astype(np.int8)

    # Señal lenta: tres pasos por celda.
    stay = cur.s & (cur.phase < 2)
    arrive_s = _from_left(cur.s & (cur.phase == 2), False) | spawn
    s = stay | arrive_s
    phase = np.where(stay, cur.phase + 1, 0).astype(np.int8)

    f_left = _from_right(cur.f_left, False) | born_left
    clash = s & f_left
    s &= ~clash
    f_left &= ~clash
    phase = np.where(s, phase, 0).astype(np.int8)

    # Coches (regla 184) bloqueados por S en su propia celda.
    car = cur.c != _NONE
    can_move = car & ~cur.settled & ~edge & ~_from_right(car, True) & ~cur.s
    incoming = _from_left(can_move, False)
    c = np.where(incoming, _from_left(cur.c, 0), np.where(can_move, _NONE, cur.c)).astype(np.int8)
    first = np.where(incoming, _from_left(cur.first, False), np.where(can_move, False, cur.first))
    c = np.where(arrive_s, cur.i, c).astype(np.int8)
    first = np.where(arrive_s, spawn, first)

    newly = car & ~cur.settled & (edge | _from_right(cur.settled, False))
    settled = cur.settled | newly
    emit = np.where(newly & (cur.c != cur.i), _REJ, np.where(newly & cur.first, _ACC, 0))
    emit = np.maximum(emit, np.where(f_rej, _REJ, 0))
    result = np.maximum(_from_right(cur.result, 0), emit).astype(np.int8)

    return WwField(
        i=cur.i, c=c, first=first, settled=settled, f_right=f_right, parity=parity,
        f_left=f_left, s=s, phase=phase, start=np.zeros_like(cur.start), result=result,
    )


def ww_ca_batch(words: Sequence[str]) -> List[Tuple[bool, int]]:
    """Ejecuta en bloque palabras de la misma longitud; (acepta, profundidad) por palabra."""
    if not words:
        return []
    n = len(words[0])
    if any(len(w) != n for w in words):
        raise ValueError("Todas las palabras del bloque deben tener la misma longitud")
    if any(ch not in "ab" for w in words for ch in w):
        raise SymbolOutOfAlphabet("Sólo se admiten palabras sobre {a, b}")
    if n == 0:
        return [(True, 0)] * len(words)
    cur = _initial_field(words)
    verdict = np.zeros(len(words), dtype=np.int8)
    depth = np.zeros(len(words), dtype=np.int64)
    limit = 8 * n + 8
    for t in range(1, limit + 1):
        cur = ww_step(cur)
        landed = (cur.result[:, 0] != 0) & (verdict == 0)
        verdict[landed] = cur.result[landed, 0]
        depth[landed] = t
        if (verdict != 0).all():
            break
    if (verdict == 0).any():
        logger.warning("Quedaron %d palabras sin veredicto tras %d pasos", int((verdict == 0).sum()), limit)
    return [(bool(v == _ACC), int(d)) for v, d in zip(verdict, depth)]


def ww_ca_recognizer(x: str) -> Tuple[bool, int]:
    return ww_ca_batch([x])[0]
