"""
Ficheros de descripción en texto plano, una directiva por línea.

Tipos admitidos (kind):
    tm     states: / start: / halt: left|right|<estados> / accept: / rule q b -> q' b' L|R
    ca     quiescent: s / rule lsr -> s'
    life   boundary: torus|dead y filas de '.' y 'O'
    tiles  tile nw ne sw se / firstrow: ids (desde 0) / height: H
    game   game: match|linchess|1dchess y sus directivas
    keys   n / p / q como enteros decimales

`#` abre un comentario hasta el final de línea (salvo en las rejillas de life).
print_spec produce la forma canónica: parse_spec(print_spec(s)) == s.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.core.errors import SpecSyntaxError, UsageError, WorkbenchError
from src.db.key_store import parse_key_text
from src.services.cellular import CA1D, Boundary, LifeGrid
from src.services.games import (
    SIDE_S,
    SIDE_W,
    BorderGame,
    GameRule,
    Position,
    gender,
    linear_chess,
    loyalty,
    make_piece,
    match_game,
    one_d_chess,
    rank,
)
from src.services.machine_core import BinaryTM, HaltMode
from src.services.tiling import Tile, TilingInstance

logger = logging.getLogger(__name__)

KINDS = ("tm", "ca", "life", "tiles", "game", "keys")

Token = Tuple[str, int]
_TOKEN = re.compile(r"\S+")


@dataclass(frozen=True)
class SpecFile:
    kind: str
    payload: Any
    # directiva -> línea donde apareció; no interviene en la igualdad
    locations: Dict[str, int] = field(default_factory=dict, compare=False)


def _lines(text: str, comments: bool = True) -> Iterator[Tuple[int, List[Token]]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0] if comments else raw
        tokens = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(body)]
        if tokens:
            yield lineno, tokens


def _expect_args(lineno: int, tokens: List[Token], count: Optional[int] = None) -> List[Token]:
    args = tokens[1:]
    if count is not None and len(args) != count:
        raise SpecSyntaxError(lineno, tokens[0][1], f"{tokens[0][0]} espera {count} argumento(s), hay {len(args)}")
    if not args:
        raise SpecSyntaxError(lineno, tokens[0][1], f"{tokens[0][0]} sin argumentos")
    return args


def _int_token(lineno: int, tok: Token) -> int:
    try:
        return int(tok[0])
    except ValueError:
        raise SpecSyntaxError(lineno, tok[1], f"No es un entero: {tok[0]!r}") from None


# ------------------------
# Máquinas de Turing
# ------------------------
def _parse_tm(text: str) -> Tuple[BinaryTM, Dict[str, int]]:
    locations: Dict[str, int] = {}
    declared: Optional[List[str]] = None
    seen: List[str] = []
    start: Optional[Token] = None
    halt: Optional[List[Token]] = None
    accept: List[Token] = []
    rules: List[Tuple[int, Token, int, Token, int, str]] = []
    last = 1

    def note(name: str) -> None:
        if name not in seen:
            seen.append(name)

    for lineno, tokens in _lines(text):
        last = lineno
        head, col = tokens[0]
        if head == "states:":
            declared = [t for t, _ in _expect_args(lineno, tokens)]
            if len(set(declared)) != len(declared):
                raise SpecSyntaxError(lineno, col, "Estados repetidos en states:")
        elif head == "start:":
            start = _expect_args(lineno, tokens, 1)[0]
            note(start[0])
        elif head == "halt:":
            halt = _expect_args(lineno, tokens)
        elif head == "accept:":
            accept = _expect_args(lineno, tokens)
        elif head == "rule":
            if len(tokens) != 7 or tokens[3][0] != "->":
                raise SpecSyntaxError(lineno, col, "Se esperaba `rule <estado> <bit> -> <estado'> <bit'> <L|R>`")
            for idx in (2, 5):
                if tokens[idx][0] not in ("0", "1"):
                    raise SpecSyntaxError(lineno, tokens[idx][1], f"Bit inválido: {tokens[idx][0]!r}")
            if tokens[6][0] not in ("L", "R"):
                raise SpecSyntaxError(lineno, tokens[6][1], f"Dirección inválida: {tokens[6][0]!r}")
            note(tokens[1][0])
            note(tokens[4][0])
            rules.append((lineno, tokens[1], int(tokens[2][0]), tokens[4], int(tokens[5][0]), tokens[6][0]))
        else:
            raise SpecSyntaxError(lineno, col, f"Directiva desconocida: {head!r}")
        locations.setdefault(head.rstrip(":"), lineno)

    mode = HaltMode.LEFT_ROLL_OFF
    halt_names: List[Token] = []
    if halt is not None:
        if len(halt) == 1 and halt[0][0] in ("left", "right"):
            mode = HaltMode.LEFT_ROLL_OFF if halt[0][0] == "left" else HaltMode.RIGHT_ROLL_OFF
        else:
            mode = HaltMode.EXPLICIT_HALT_STATE
            halt_names = halt
    for tok in halt_names + accept:
        note(tok[0])

    names = declared if declared is not None else seen
    if not names:
        raise SpecSyntaxError(last, 1, "La máquina no tiene estados")
    index = {name: i for i, name in enumerate(names)}
    line_of = {"start": locations.get("start", last), "halt": locations.get("halt", last), "accept": locations.get("accept", last)}

    def resolve(tok: Token, lineno: int) -> int:
        if tok[0] not in index:
            raise SpecSyntaxError(lineno, tok[1], f"Estado no declarado: {tok[0]!r}")
        return index[tok[0]]

    table: Dict[Tuple[int, int], Tuple[int, int, str]] = {}
    for lineno, q_tok, b, q2_tok, b2, d in rules:
        q = resolve(q_tok, lineno)
        if (q, b) in table:
            raise SpecSyntaxError(lineno, q_tok[1], f"Regla repetida para ({q_tok[0]}, {b})")
        table[(q, b)] = (resolve(q2_tok, lineno), b2, d)
    start_q = resolve(start, line_of["start"]) if start is not None else 0
    try:
        tm = BinaryTM(
            state_count=len(names),
            start=start_q,
            rules=table,
            halt_mode=mode,
            halt_states=frozenset(resolve(t, line_of["halt"]) for t in halt_names),
            accept_states=frozenset(resolve(t, line_of["accept"]) for t in accept),
            state_names=tuple(names),
        )
    except ValueError as exc:
        raise SpecSyntaxError(last, 1, str(exc)) from exc
    return tm, locations


def _print_tm(tm: BinaryTM) -> str:
    names = [tm.name(q) for q in range(tm.state_count)]
    out = [f"states: {' '.join(names)}", f"start: {names[tm.start]}"]
    if tm.halt_mode is HaltMode.EXPLICIT_HALT_STATE:
        out.append("halt: " + " ".join(names[q] for q in sorted(tm.halt_states)))
    else:
        out.append("halt: " + ("left" if tm.halt_mode is HaltMode.LEFT_ROLL_OFF else "right"))
    if tm.accept_states:
        out.append("accept: " + " ".join(names[q] for q in sorted(tm.accept_states)))
    for (q, b), (q2, b2, d) in sorted(tm.rules.items()):
        out.append(f"rule {names[q]} {b} -> {names[q2]} {b2} {d}")
    return "\n".join(out) + "\n"


# ------------------------
# Autómatas celulares
# ------------------------
def _parse_ca(text: str) -> Tuple[CA1D, Dict[str, int]]:
    locations: Dict[str, int] = {}
    quiescent: Optional[str] = None
    table: Dict[Tuple[str, str, str], str] = {}
    last = 1
    for lineno, tokens in _lines(text):
        last = lineno
        head, col = tokens[0]
        if head == "quiescent:":
            arg = _expect_args(lineno, tokens, 1)[0]
            if len(arg[0]) != 1:
                raise SpecSyntaxError(lineno, arg[1], f"El símbolo quiescente debe ser un carácter: {arg[0]!r}")
            quiescent = arg[0]
        elif head == "rule":
            if len(tokens) != 4 or tokens[2][0] != "->":
                raise SpecSyntaxError(lineno, col, "Se esperaba `rule <l><s><r> -> <s'>`")
            if len(tokens[1][0]) != 3:
                raise SpecSyntaxError(lineno, tokens[1][1], f"La vecindad tiene 3 símbolos: {tokens[1][0]!r}")
            if len(tokens[3][0]) != 1:
                raise SpecSyntaxError(lineno, tokens[3][1], f"El resultado es un símbolo: {tokens[3][0]!r}")
            key = tuple(tokens[1][0])
            if key in table:
                raise SpecSyntaxError(lineno, tokens[1][1], f"Regla repetida: {tokens[1][0]}")
            table[key] = tokens[3][0]  # type: ignore[index]
        else:
            raise SpecSyntaxError(lineno, col, f"Directiva desconocida: {head!r}")
        locations.setdefault(head.rstrip(":"), lineno)
    alphabet = {s for key, out in table.items() for s in key + (out,)}
    if quiescent is None:
        if "0" not in alphabet:
            raise SpecSyntaxError(last, 1, "Falta quiescent: y el alfabeto no contiene 0")
        quiescent = "0"
    alphabet.add(quiescent)
    try:
        ca = CA1D(frozenset(alphabet), table, quiescent)
    except (WorkbenchError, ValueError) as exc:
        raise SpecSyntaxError(locations.get("quiescent", last), 1, str(exc)) from exc
    return ca, locations


def _print_ca(ca: CA1D) -> str:
    if not isinstance(ca.rule, dict):
        raise UsageError("Sólo se imprimen autómatas definidos por tabla")
    out = [f"quiescent: {ca.quiescent}"]
    for key, value in sorted(ca.rule.items()):
        out.append(f"rule {''.join(key)} -> {value}")
    return "\n".join(out) + "\n"


# ------------------------
# Juego de la Vida
# ------------------------
def _parse_life(text: str) -> Tuple[LifeGrid, Dict[str, int]]:
    locations: Dict[str, int] = {}
    boundary = Boundary.TORUS
    rows: List[List[bool]] = []
    for lineno, tokens in _lines(text, comments=False):
        head, col = tokens[0]
        if head == "boundary:":
            if rows:
                raise SpecSyntaxError(lineno, col, "boundary: debe ir antes de la rejilla")
            arg = _expect_args(lineno, tokens, 1)[0]
            try:
                boundary = Boundary(arg[0])
            except ValueError:
                raise SpecSyntaxError(lineno, arg[1], f"Frontera desconocida: {arg[0]!r}") from None
            locations["boundary"] = lineno
            continue
        if len(tokens) != 1:
            raise SpecSyntaxError(lineno, tokens[1][1], "Una fila no puede contener espacios")
        for offset, ch in enumerate(head):
            if ch not in ".O":
                raise SpecSyntaxError(lineno, col + offset, f"Carácter de rejilla inválido: {ch!r}")
        if rows and len(head) != len(rows[0]):
            raise SpecSyntaxError(lineno, col, f"Fila de anchura {len(head)}, se esperaba {len(rows[0])}")
        locations.setdefault("grid", lineno)
        rows.append([ch == "O" for ch in head])
    if not rows:
        raise SpecSyntaxError(1, 1, "La rejilla está vacía")
    return LifeGrid(np.array(rows, dtype=bool), boundary), locations


def _print_life(grid: LifeGrid) -> str:
    out = [f"boundary: {grid.boundary.value}"]
    out.extend("".join("O" if c else "." for c in row) for row in grid.cells)
    return "\n".join(out) + "\n"


# ------------------------
# Teselas
# ------------------------
def _parse_tiles(text: str) -> Tuple[TilingInstance, Dict[str, int]]:
    locations: Dict[str, int] = {}
    tiles: List[Tile] = []
    first: List[Token] = []
    first_line = 1
    height = 1
    for lineno, tokens in _lines(text):
        head, col = tokens[0]
        if head == "tile":
            args = _expect_args(lineno, tokens, 4)
            tiles.append(Tile(*(t for t, _ in args)))
        elif head == "firstrow:":
            first = _expect_args(lineno, tokens)
            first_line = lineno
        elif head == "height:":
            arg = _expect_args(lineno, tokens, 1)[0]
            height = _int_token(lineno, arg)
            if height < 1:
                raise SpecSyntaxError(lineno, arg[1], f"La altura debe ser >= 1: {height}")
        else:
            raise SpecSyntaxError(lineno, col, f"Directiva desconocida: {head!r}")
        locations.setdefault(head.rstrip(":"), lineno)
    if not first:
        raise SpecSyntaxError(first_line, 1, "Falta firstrow:")
    row: List[Tile] = []
    for tok in first:
        idx = _int_token(first_line, tok)
        if not 0 <= idx < len(tiles):
            raise SpecSyntaxError(first_line, tok[1], f"Tesela inexistente: {idx}")
        row.append(tiles[idx])
    return TilingInstance(tuple(tiles), tuple(row), height), locations


def _print_tiles(inst: TilingInstance) -> str:
    out = [f"tile {t}" for t in inst.tiles]
    ids = []
    for t in inst.first_row:
        if t not in inst.tiles:
            raise UsageError(f"La tesela {t} de la primera fila no está en el conjunto")
        ids.append(str(inst.tiles.index(t)))
    out.append("firstrow: " + " ".join(ids))
    out.append(f"height: {inst.height}")
    return "\n".join(out) + "\n"


# ------------------------
# Juegos
# ------------------------
_PIECE = re.compile(r"^([WS])([MF])(\d+)$")

Table1d = Tuple[Tuple[int, int, int, Tuple[Tuple[int, int], ...]], ...]


@dataclass(frozen=True)
class GameSpec:
    """Descripción de un juego tal como viene en el fichero."""

    game: str
    boxes: Tuple[int, ...] = (3, 3, 3)
    player: int = 0
    budget: int = 0
    board: Tuple[int, ...] = ()
    types: Tuple[int, ...] = ()
    triples: Tuple[Tuple[int, int, int], ...] = ()
    entries: Table1d = ()

    def build(self) -> Tuple[GameRule, Position]:
        if self.game == "match":
            g = match_game()
            return g, g.start(self.boxes, self.player)
        if self.game == "linchess":
            types = set(self.types) | set(self.board) | {p for t in self.triples for p in t}
            chess: BorderGame = linear_chess(types, self.triples)
        else:
            chess = one_d_chess({(left, right): (winner, list(outs)) for left, right, winner, outs in self.entries})
        return chess, chess.start(self.board, self.budget)


def parse_piece(text: str) -> int:
    m = _PIECE.match(text)
    if not m:
        raise ValueError(f"Pieza inválida {text!r}; formato [W|S][M|F]<rango>")
    return make_piece(SIDE_W if m.group(1) == "W" else SIDE_S, 0 if m.group(2) == "M" else 1, int(m.group(3)))


def piece_name(piece: int) -> str:
    return f"{'WS'[loyalty(piece)]}{'MF'[gender(piece)]}{rank(piece)}"


def _pieces(lineno: int, tokens: Sequence[Token]) -> Tuple[int, ...]:
    out = []
    for tok in tokens:
        try:
            out.append(parse_piece(tok[0]))
        except (ValueError, WorkbenchError) as exc:
            raise SpecSyntaxError(lineno, tok[1], str(exc)) from None
    return tuple(out)


def _parse_game(text: str) -> Tuple[GameSpec, Dict[str, int]]:
    locations: Dict[str, int] = {}
    fields: Dict[str, Any] = {}
    triples: List[Tuple[int, int, int]] = []
    entries: List[Tuple[int, int, int, Tuple[Tuple[int, int], ...]]] = []
    game: Optional[str] = None
    for lineno, tokens in _lines(text):
        head, col = tokens[0]
        if head == "game:":
            arg = _expect_args(lineno, tokens, 1)[0]
            if arg[0] not in ("match", "linchess", "1dchess"):
                raise SpecSyntaxError(lineno, arg[1], f"Juego desconocido: {arg[0]!r}")
            game = arg[0]
        elif head == "boxes:":
            fields["boxes"] = tuple(_int_token(lineno, t) for t in _expect_args(lineno, tokens))
        elif head == "player:":
            arg = _expect_args(lineno, tokens, 1)[0]
            fields["player"] = _int_token(lineno, arg)
            if fields["player"] not in (0, 1):
                raise SpecSyntaxError(lineno, arg[1], "El jugador es 0 o 1")
        elif head == "budget:":
            fields["budget"] = _int_token(lineno, _expect_args(lineno, tokens, 1)[0])
        elif head == "board:":
            fields["board"] = _pieces(lineno, _expect_args(lineno, tokens))
        elif head == "types:":
            fields["types"] = _pieces(lineno, _expect_args(lineno, tokens))
        elif head == "triple":
            a, b, c = _pieces(lineno, _expect_args(lineno, tokens, 3))
            triples.append((a, b, c))
        elif head == "entry":
            # entry L R -> W|S [: L' R' [, L' R' ...]]
            if len(tokens) < 5 or tokens[3][0] != "->" or tokens[4][0] not in ("W", "S"):
                raise SpecSyntaxError(lineno, col, "Se esperaba `entry <L> <R> -> <W|S> [: <L'> <R'>, ...]`")
            left, right = _pieces(lineno, tokens[1:3])
            winner = SIDE_W if tokens[4][0] == "W" else SIDE_S
            rest = tokens[5:]
            outcomes: List[Tuple[int, int]] = []
            if rest:
                if rest[0][0] != ":":
                    raise SpecSyntaxError(lineno, rest[0][1], "Se esperaba ':' antes de los resultados")
                pairs = [(t.strip(","), c) for t, c in rest[1:] if t.strip(",")]
                if len(pairs) % 2:
                    raise SpecSyntaxError(lineno, rest[-1][1], "Resultado incompleto")
                pieces = _pieces(lineno, pairs)
                outcomes = [(pieces[i], pieces[i + 1]) for i in range(0, len(pieces), 2)]
            entries.append((left, right, winner, tuple(outcomes)))
        else:
            raise SpecSyntaxError(lineno, col, f"Directiva desconocida: {head!r}")
        locations.setdefault(head.rstrip(":"), lineno)
    if game is None:
        raise SpecSyntaxError(1, 1, "Falta game:")
    if game != "match" and "board" not in fields:
        raise SpecSyntaxError(locations["game"], 1, f"{game} necesita board:")
    return GameSpec(game, triples=tuple(triples), entries=tuple(entries), **fields), locations


def _print_game(spec: GameSpec) -> str:
    out = [f"game: {spec.game}"]
    if spec.game == "match":
        out.append("boxes: " + " ".join(str(n) for n in spec.boxes))
        out.append(f"player: {spec.player}")
        return "\n".join(out) + "\n"
    out.append(f"budget: {spec.budget}")
    out.append("board: " + " ".join(piece_name(p) for p in spec.board))
    if spec.types:
        out.append("types: " + " ".join(piece_name(p) for p in spec.types))
    for a, b, c in spec.triples:
        out.append(f"triple {piece_name(a)} {piece_name(b)} {piece_name(c)}")
    for left, right, winner, outcomes in spec.entries:
        line = f"entry {piece_name(left)} {piece_name(right)} -> {'WS'[winner]}"
        if outcomes:
            line += " : " + " , ".join(f"{piece_name(a)} {piece_name(b)}" for a, b in outcomes)
        out.append(line)
    return "\n".join(out) + "\n"


# ------------------------
# Claves
# ------------------------
def _parse_keys(text: str) -> Tuple[Dict[str, int], Dict[str, int]]:
    fields = parse_key_text(text)
    locations = {}
    for lineno, tokens in _lines(text):
        locations.setdefault(tokens[0][0], lineno)
    return fields, locations


def _print_keys(fields: Dict[str, int]) -> str:
    return "".join(f"{name} {fields[name]}\n" for name in ("n", "p", "q") if name in fields)


# ------------------------
# API
# ------------------------
_PARSERS: Dict[str, Callable[[str], Tuple[Any, Dict[str, int]]]] = {
    "tm": _parse_tm,
    "ca": _parse_ca,
    "life": _parse_life,
    "tiles": _parse_tiles,
    "game": _parse_game,
    "keys": _parse_keys,
}

_PRINTERS: Dict[str, Callable[[Any], str]] = {
    "tm": _print_tm,
    "ca": _print_ca,
    "life": _print_life,
    "tiles": _print_tiles,
    "game": _print_game,
    "keys": _print_keys,
}


def parse_spec(text: str, kind: str) -> SpecFile:
    if kind not in _PARSERS:
        raise UsageError(f"Tipo de fichero desconocido: {kind!r}; use uno de {', '.join(KINDS)}")
    payload, locations = _PARSERS[kind](text)
    logger.debug("Fichero %s leído: %s", kind, sorted(locations))
    return SpecFile(kind, payload, locations)


def print_spec(spec: SpecFile) -> str:
    return _PRINTERS[spec.kind](spec.payload)


def load_spec(path: str | Path, kind: str) -> SpecFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"No se puede leer {path}: {exc}") from exc
    return parse_spec(text, kind)
