"""
Juegos de información completa y suma cero.

Un juego lo describe un GameRule: quién mueve (a(x) = +1 / -1), qué movimientos
tiene, la transición r(x, m), las posiciones terminales y su valor. El valor
V(x) siempre se expresa desde el punto de vista del jugador +1.

Resolución:
    - solve_retrograde: grafo de posiciones alcanzables + barridos hasta punto fijo.
    - solve_dfs: búsqueda en profundidad sin memoria (sólo la pila).

Juegos incluidos:
    - match_game (3 cajas de cerillas)
    - linear_chess / one_d_chess
    - halting_game (BHP como juego entre L y S)
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

from src.core.errors import (
    BadInput,
    DepthOverflow,
    MalformedTable,
    MalformedTriple,
    NotBinary,
    StateSpaceOverflow,
)
from src.core.settings.workbench_service import get_workbench_settings
from src.services.machine_core import BinaryTM, HaltMode

logger = logging.getLogger(__name__)

Position = Tuple[int, ...]
Move = Hashable


# ------------------------
# Formalismo
# ------------------------
def _pack(values: Sequence[int]) -> int:
    out = len(values)
    for v in values:
        if not 0 <= v < 1 << 16:
            raise ValueError(f"Componente de posición fuera de rango: {v}")
        out = (out << 16) | v
    return out


class GameRule:
    """
    Reglas de un juego. Las posiciones son tuplas de enteros pequeños.

    Las subclases implementan active, moves, play, terminal y value.
    El presupuesto de movimientos va dentro de la posición y decrece en cada jugada.
    """

    namespace: int = 0
    name: str = "game"

    def encode(self, x: Position) -> int:
        """Clave entera con signo = jugador activo."""
        return self.active(x) * (1 + _pack((self.namespace,) + tuple(x)))

    def active(self, x: Position) -> int:
        raise NotImplementedError

    def moves(self, x: Position) -> List[Move]:
        raise NotImplementedError

    def play(self, x: Position, m: Move) -> Position:
        raise NotImplementedError

    def terminal(self, x: Position) -> bool:
        return False

    def value(self, x: Position) -> int:
        raise NotImplementedError

    def describe(self, x: Position) -> str:
        return str(x)


@dataclass
class ValueTable:
    values: Dict[int, int] = field(default_factory=dict)
    positions: Dict[int, Position] = field(default_factory=dict)

    def value_of(self, game: GameRule, x: Position) -> int:
        return self.values[game.encode(x)]

    @property
    def unresolved(self) -> int:
        return sum(1 for v in self.values.values() if v == 0)

    def __len__(self) -> int:
        return len(self.values)


EvaluationCallback = Callable[[int, Dict[Position, int]], None]


def solve_retrograde(
    g: GameRule,
    seeds: Iterable[Position],
    cap: Optional[int] = None,
    on_cycle: Optional[EvaluationCallback] = None,
) -> ValueTable:
    """
    Evalúa todas las posiciones alcanzables desde seeds.

    V = 0 en todas; V = v en las terminales; se repite
    V(x) = a(x) * sup_m { a(x) * V(r(x, m)) } (sup{} = -1) mientras algo cambie.
    on_cycle recibe (ciclo, posiciones evaluadas en ese ciclo).
    """
    cap = get_workbench_settings().state_cap if cap is None else cap
    children: Dict[Position, List[Position]] = {}
    frontier = list(dict.fromkeys(seeds))
    seen = set(frontier)
    while frontier:
        x = frontier.pop()
        if g.terminal(x):
            children[x] = []
            continue
        kids = [g.play(x, m) for m in g.moves(x)]
        children[x] = kids
        for y in kids:
            if y not in seen:
                seen.add(y)
                if len(seen) > cap:
                    raise StateSpaceOverflow(f"Más de {cap} posiciones alcanzables en {g.name}")
                frontier.append(y)
    logger.info("%s: %d posiciones alcanzables", g.name, len(children))

    value: Dict[Position, int] = {x: 0 for x in children}
    initial = {}
    for x in children:
        if g.terminal(x):
            value[x] = g.value(x)
            initial[x] = value[x]
    if on_cycle is not None:
        on_cycle(0, initial)

    pending = [x for x in children if value[x] == 0]
    cycle = 0
    while pending:
        cycle += 1
        resolved: Dict[Position, int] = {}
        still: List[Position] = []
        for x in pending:
            a = g.active(x)
            kids = children[x]
            if any(value[y] == a for y in kids):
                resolved[x] = a
            elif all(value[y] == -a for y in kids):
                resolved[x] = -a
            else:
                still.append(x)
        if not resolved:
            logger.warning("%s: %d posiciones sin valor (ciclos en el grafo)", g.name, len(still))
            break
        value.update(resolved)
        logger.debug("%s ciclo %d: %d posiciones evaluadas", g.name, cycle, len(resolved))
        if on_cycle is not None:
            on_cycle(cycle, resolved)
        pending = still

    table = ValueTable()
    for x, v in value.items():
        key = g.encode(x)
        table.values[key] = v
        table.positions[key] = x
    return table


def solve_dfs(g: GameRule, x: Position, depth_cap: Optional[int] = None) -> int:
    """Valor de x por búsqueda en profundidad; sólo guarda la rama actual."""
    depth_cap = get_workbench_settings().depth_cap if depth_cap is None else depth_cap

    def search(y: Position, depth: int) -> int:
        if depth > depth_cap:
            raise DepthOverflow(f"Profundidad {depth} > {depth_cap} en {g.name}")
        if g.terminal(y):
            return g.value(y)
        a = g.active(y)
        for m in g.moves(y):
            if search(g.play(y, m), depth + 1) == a:
                return a
        return -a

    try:
        return search(x, 0)
    except RecursionError as exc:
        raise DepthOverflow(f"Recursión agotada en {g.name}") from exc


def solve_position(g: GameRule, x: Position) -> int:
    return solve_retrograde(g, [x]).value_of(g, x)


# ------------------------
# Juego de las cerillas
# ------------------------
class MatchGame(GameRule):
    """
    Posición (jugador, a, b, c): jugador 0 es +1. Se quita k >= 1 cerillas de
    una caja; no se puede dejar la mesa vacía. Sin movimientos legales se pierde.
    """

    namespace = 1
    name = "match"

    def active(self, x: Position) -> int:
        return 1 if x[0] == 0 else -1

    def moves(self, x: Position) -> List[Move]:
        boxes = x[1:]
        total = sum(boxes)
        return [(i, k) for i, n in enumerate(boxes) for k in range(1, n + 1) if total - k > 0]

    def play(self, x: Position, m: Move) -> Position:
        i, k = m
        boxes = list(x[1:])
        boxes[i] -= k
        return (1 - x[0],) + tuple(boxes)

    def terminal(self, x: Position) -> bool:
        return not self.moves(x)

    def value(self, x: Position) -> int:
        return -self.active(x)

    def start(self, boxes: Sequence[int] = (3, 3, 3), player: int = 0) -> Position:
        if any(n < 0 for n in boxes):
            raise BadInput(f"Número de cerillas negativo: {boxes}")
        return (player,) + tuple(boxes)

    def describe(self, x: Position) -> str:
        return f"{'+' if x[0] == 0 else '-'}({','.join(str(n) for n in x[1:])})"


def match_game() -> MatchGame:
    return MatchGame()


# ------------------------
# Ajedrez lineal y 1d-Chess
# ------------------------
SIDE_W = 0
SIDE_S = 1


def loyalty(piece: int) -> int:
    return (piece >> 7) & 1


def gender(piece: int) -> int:
    return (piece >> 6) & 1


def rank(piece: int) -> int:
    return piece & 0x3F


def make_piece(side: int, sex: int, piece_rank: int) -> int:
    if side not in (0, 1) or sex not in (0, 1) or not 0 <= piece_rank < 64:
        raise BadInput(f"Pieza inválida: lealtad={side} sexo={sex} rango={piece_rank}")
    return (side << 7) | (sex << 6) | piece_rank


def gender_winner(w_piece: int, s_piece: int) -> int:
    """Mismo sexo: pierde W. Distinto sexo: pierde S."""
    return SIDE_S if gender(w_piece) == gender(s_piece) else SIDE_W


Outcome = Tuple[int, int]  # (nueva pieza izquierda, nueva pieza derecha)
Resolver = Callable[[int, int], Tuple[int, List[Outcome]]]


class BorderGame(GameRule):
    """
    Tablero = (presupuesto, piezas...). Todas las W a la izquierda de las S; se
    lucha en la frontera y el bando ganador elige el resultado.
    """

    def __init__(self, resolver: Resolver, namespace: int, name: str):
        self._resolver = resolver
        self.namespace = namespace
        self.name = name

    @staticmethod
    def border(x: Position) -> Optional[int]:
        board = x[1:]
        for i in range(len(board) - 1):
            if loyalty(board[i]) == SIDE_W and loyalty(board[i + 1]) == SIDE_S:
                return i
        return None

    def check_board(self, x: Position) -> None:
        sides = [loyalty(p) for p in x[1:]]
        if sides != sorted(sides):
            raise BadInput(f"Hay una pieza W a la derecha de una S: {x[1:]}")

    def _fight(self, x: Position) -> Tuple[int, List[Outcome]]:
        i = self.border(x)
        return self._resolver(x[1 + i], x[2 + i])

    def active(self, x: Position) -> int:
        i = self.border(x)
        if i is None:
            return 1
        winner, _ = self._fight(x)
        return 1 if winner == SIDE_W else -1

    def terminal(self, x: Position) -> bool:
        return self.border(x) is None or x[0] == 0

    def value(self, x: Position) -> int:
        if self.border(x) is None:
            return 1 if all(loyalty(p) == SIDE_W for p in x[1:]) else -1
        # presupuesto agotado: pierde el que mueve
        return -self.active(x)

    def moves(self, x: Position) -> List[Move]:
        _, outcomes = self._fight(x)
        return sorted(set(outcomes))

    def play(self, x: Position, m: Move) -> Position:
        i = self.border(x)
        board = list(x[1:])
        board[i], board[i + 1] = m
        return (x[0] - 1,) + tuple(board)

    def start(self, board: Sequence[int], budget: int) -> Position:
        x = (budget,) + tuple(board)
        self.check_board(x)
        return x

    def describe(self, x: Position) -> str:
        return f"[{x[0]}] " + " ".join(f"{'WS'[loyalty(p)]}{'MF'[gender(p)]}{rank(p)}" for p in x[1:])


Triple = Tuple[int, int, int]


def _check_triples(types: Iterable[int], triples: Iterable[Triple]) -> List[Triple]:
    known = set(types)
    out = []
    for a, b, c in triples:
        for piece in (a, b, c):
            if piece not in known:
                raise MalformedTriple(f"La pieza {piece} de {(a, b, c)} no está en el conjunto de tipos")
        if loyalty(a) == loyalty(b):
            raise MalformedTriple(f"A y B son del mismo bando en {(a, b, c)}")
        w, s = (a, b) if loyalty(a) == SIDE_W else (b, a)
        if gender_winner(w, s) != loyalty(a):
            raise MalformedTriple(f"A no gana el combate según las reglas de género en {(a, b, c)}")
        if loyalty(c) != loyalty(a):
            raise MalformedTriple(f"C no es del bando ganador en {(a, b, c)}")
        out.append((a, b, c))
    return out


def linear_chess_table(types: Iterable[int], triples: Iterable[Triple]) -> Dict[Tuple[int, int], Tuple[int, List[Outcome]]]:
    """Tabla de 1d-Chess equivalente a un juego de ajedrez lineal (sin promoción)."""
    types = sorted(set(types))
    checked = _check_triples(types, triples)
    table: Dict[Tuple[int, int], Tuple[int, List[Outcome]]] = {}
    for w in (p for p in types if loyalty(p) == SIDE_W):
        for s in (p for p in types if loyalty(p) == SIDE_S):
            winner = gender_winner(w, s)
            if winner == SIDE_W:
                outcomes = [(w, c) for a, b, c in checked if a == w and b == s]
            else:
                outcomes = [(c, s) for a, b, c in checked if a == s and b == w]
            table[(w, s)] = (winner, outcomes)
    return table


def linear_chess(types: Iterable[int], triples: Iterable[Triple]) -> BorderGame:
    table = linear_chess_table(types, triples)

    def resolve(left: int, right: int) -> Tuple[int, List[Outcome]]:
        if (left, right) not in table:
            raise MalformedTriple(f"Piezas fuera del conjunto de tipos: {(left, right)}")
        return table[(left, right)]

    return BorderGame(resolve, namespace=2, name="linchess")


def one_d_chess(table: Mapping[Tuple[int, int], Tuple[int, Sequence[Outcome]]]) -> BorderGame:
    """
    table[(L, R)] = (bando ganador, [(L', R'), ...]). El perdedor se sustituye y
    el ganador puede ser promovido; ambas piezas nuevas son del bando ganador.
    """
    checked: Dict[Tuple[int, int], Tuple[int, List[Outcome]]] = {}
    for (left, right), (winner, outcomes) in table.items():
        if loyalty(left) != SIDE_W or loyalty(right) != SIDE_S:
            raise MalformedTable(f"Entrada {(left, right)} no es un par frontera W|S")
        if winner not in (SIDE_W, SIDE_S):
            raise MalformedTable(f"Bando ganador inválido {winner} en {(left, right)}")
        for new_left, new_right in outcomes:
            if loyalty(new_left) != winner or loyalty(new_right) != winner:
                raise MalformedTable(f"Resultado {(new_left, new_right)} no es del bando ganador en {(left, right)}")
        checked[(left, right)] = (winner, list(outcomes))

    def resolve(left: int, right: int) -> Tuple[int, List[Outcome]]:
        if (left, right) not in checked:
            raise MalformedTable(f"La tabla no cubre el par activo {(left, right)}")
        return checked[(left, right)]

    return BorderGame(resolve, namespace=3, name="1dchess")


# ------------------------
# Juego de la parada
# ------------------------
# Códigos de celda: fuera del tablero, borde izquierdo, borde con la cabeza
# ya caída (máquina parada), '?' y celdas de cinta (bit, estado|None).
OUT = 0
EDGE = 1
HALTED = 2
QMARK = 3
_TAPE0 = 4

PHASE_L = 0
PHASE_S = 1


class HaltingGame(GameRule):
    """
    L afirma que tm(x) para en 2^|x| pasos; S lo pone a prueba.

    Posición (fase, p, t, A, B-1, B0, B+1). El índice 0 del diagrama es el borde
    izquierdo; la celda i >= 1 es la celda i-1 de la cinta. A es el estado de la
    celda p en t+1, B_s el de la celda p+s en t.
    """

    namespace = 4
    name = "halting"

    def __init__(self, tm: BinaryTM, x: Sequence[int]):
        if tm.halt_mode is not HaltMode.LEFT_ROLL_OFF:
            raise NotBinary("El juego de la parada requiere una máquina LeftRollOff")
        limit = get_workbench_settings().halting_max_input
        if len(x) > limit:
            raise BadInput(f"|x| = {len(x)} supera el máximo configurado {limit}")
        self.tm = tm
        self.x = tuple(x)
        self.horizon = 2 ** len(self.x)

    # celdas
    def tape_cell(self, bit: int, head: Optional[int]) -> int:
        return _TAPE0 + bit * (self.tm.state_count + 1) + (0 if head is None else head + 1)

    def decode_cell(self, code: int) -> Tuple[int, Optional[int]]:
        bit, h = divmod(code - _TAPE0, self.tm.state_count + 1)
        return bit, (None if h == 0 else h - 1)

    def _candidates(self, index: int) -> List[int]:
        if index < 0:
            return [OUT]
        if index == 0:
            return [EDGE, HALTED]
        return [self.tape_cell(b, h) for b in (0, 1) for h in [None] + list(range(self.tm.state_count))]

    def initial_cell(self, index: int) -> int:
        if index < 0:
            return OUT
        if index == 0:
            return EDGE
        i = index - 1
        bit = self.x[i] if i < len(self.x) else 0
        return self.tape_cell(bit, self.tm.start if i == 0 else None)

    def _has_head(self, code: int) -> bool:
        if code == HALTED:
            return True
        return code >= _TAPE0 and self.decode_cell(code)[1] is not None

    def _pushes(self, code: int, direction: str) -> Optional[int]:
        """Nuevo estado si la cabeza de esta celda se mueve hacia direction."""
        if code < _TAPE0:
            return None
        bit, head = self.decode_cell(code)
        if head is None:
            return None
        q2, _, d = self.tm.rules[(head, bit)]
        return q2 if d == direction else None

    def transition(self, p: int, left: int, mid: int, right: int) -> int:
        """Celda p en t+1 a partir de las celdas p-1, p, p+1 en t."""
        if p == 0:
            if mid == HALTED or self._pushes(right, "L") is not None:
                return HALTED
            return EDGE
        bit, head = self.decode_cell(mid)
        if head is not None:
            _, b2, _ = self.tm.rules[(head, bit)]
            return self.tape_cell(b2, None)
        q = self._pushes(left, "R")
        if q is None:
            q = self._pushes(right, "L")
        return self.tape_cell(bit, q)

    def legal_fills(self, p: int, t: int, a: int) -> List[Tuple[int, int, int]]:
        fills = []
        for triple in itertools.product(*(self._candidates(p + s) for s in (-1, 0, 1))):
            if sum(self._has_head(c) for c in triple) > 1:
                continue
            if self.transition(p, *triple) != a:
                continue
            if t == 1 and triple != tuple(self.initial_cell(p + s) for s in (-1, 0, 1)):
                continue
            fills.append(triple)
        return fills

    def start(self) -> Position:
        return (PHASE_L, 0, self.horizon, HALTED, QMARK, QMARK, QMARK)

    def active(self, x: Position) -> int:
        return 1 if x[0] == PHASE_L else -1

    def terminal(self, x: Position) -> bool:
        # tablero completo y legal en t = 1: gana L
        return x[0] == PHASE_S and x[2] == 1

    def value(self, x: Position) -> int:
        return 1

    def moves(self, x: Position) -> List[Move]:
        phase, p, t, a = x[:4]
        if phase == PHASE_L:
            return self.legal_fills(p, t, a)
        return [s for s in (-1, 0, 1) if p + s >= 0]

    def play(self, x: Position, m: Move) -> Position:
        phase, p, t, a = x[:4]
        if phase == PHASE_L:
            return (PHASE_S, p, t, a) + tuple(m)
        chosen = x[4 + m + 1]
        return (PHASE_L, p + m, t - 1, chosen, QMARK, QMARK, QMARK)

    def describe_cell(self, code: int) -> str:
        if code == OUT:
            return "#"
        if code == EDGE:
            return "|"
        if code == HALTED:
            return "<"
        if code == QMARK:
            return "?"
        bit, head = self.decode_cell(code)
        return f"{bit}" if head is None else f"{bit}{self.tm.name(head)}"

    def describe(self, x: Position) -> str:
        phase, p, t, a, *bs = x
        return f"{'LS'[phase]} p={p} t={t} A={self.describe_cell(a)} B={' '.join(self.describe_cell(c) for c in bs)}"


def halting_game(tm: BinaryTM, x: Sequence[int]) -> HaltingGame:
    return HaltingGame(tm, x)
