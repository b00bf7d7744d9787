"""
Subcomandos del workbench y su despacho.

Códigos de salida:
    0  éxito
    1  veredicto de dominio negativo (reject, no para, NotFound, ...)
    2  error (WorkbenchError, uso incorrecto)

Con --json cada línea de stdout es un objeto JSON; el log va siempre a stderr.
Con la misma semilla y los mismos argumentos la salida es idéntica.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import random
import sys
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, TextIO, Tuple

from src.cli.parsers import GameSpec, SpecFile, load_spec, print_spec
from src.core.errors import BadInput, UsageError, WorkbenchError
from src.core.settings.crypto_service import get_crypto_settings
from src.core.settings.workbench_service import get_workbench_settings
from src.db.key_store import KeyStore, format_ciphertext
from src.services import (
    batcher,
    cellular,
    crypto,
    games,
    ikeno_utm,
    kolmogorov,
    machine_core,
    numtheory,
    randomized,
    sumcheck,
    tiling,
)
from src.utils.utils import bits_str, derive_rng, derive_seed, json_default, to_bits

logger = logging.getLogger(__name__)

TOY_BANNER = "AVISO: criptografía de juguete con fines educativos; no usar en producción."

OK, FALSE, ERROR = 0, 1, 2


# ------------------------
# Infraestructura
# ------------------------
class Output:
    def __init__(self, as_json: bool, stream: TextIO):
        self.as_json = as_json
        self.stream = stream

    def line(self, text: str, event: str, /, **data: Any) -> None:
        if self.as_json:
            record = {"event": event, **data}
            self.stream.write(json.dumps(record, default=json_default, sort_keys=True) + "\n")
        else:
            self.stream.write(text + "\n")


@dataclass
class Context:
    args: argparse.Namespace
    out: Output
    seed: int
    rng: random.Random


Argument = Tuple[Tuple[str, ...], Dict[str, Any]]


@dataclass(frozen=True)
class Command:
    name: str
    module: str
    help: str
    arguments: Tuple[Argument, ...]
    run: Callable[[Context], int]
    toy: bool = False


COMMANDS: Dict[str, Command] = {}


def arg(*flags: str, **kwargs: Any) -> Argument:
    return flags, kwargs


def command(name: str, module: str, help: str, *arguments: Argument, toy: bool = False):
    def wrap(fn: Callable[[Context], int]) -> Callable[[Context], int]:
        COMMANDS[name] = Command(name, module, help, arguments, fn, toy)
        return fn

    return wrap


def _load_machine(path: Optional[str]) -> machine_core.BinaryTM:
    if not path:
        raise UsageError("Falta el fichero de la máquina")
    return load_spec(path, "tm").payload


def _verdict(ok: bool) -> str:
    return "accept" if ok else "reject"


# ------------------------
# machine-core
# ------------------------
@command(
    "run-tm",
    "machine_core",
    "Ejecuta una máquina de Turing binaria",
    arg("machine", nargs="?", help="fichero .tm"),
    arg("--builtin", choices=["ww"], help="máquina incluida (reconocedor de ww)"),
    arg("--input", default="", help="bits de entrada; palabra sobre {a,b} con --builtin ww"),
    arg("--steps", type=int, default=None),
    arg("--trace", action="store_true"),
)
def run_tm(ctx: Context) -> int:
    a = ctx.args
    if a.builtin == "ww":
        tm = machine_core.tm_ww_recognizer()
        bits = machine_core.encode_ww_input(a.input)
    else:
        tm = _load_machine(a.machine)
        bits = to_bits(a.input)
    steps = get_workbench_settings().tmax if a.steps is None else a.steps
    if a.trace:
        cfg = machine_core.initial_tape(tm, bits)
        for i in range(steps + 1):
            ctx.out.line(
                f"paso {i}: estado {tm.name(cfg.state)} cabeza {cfg.head} cinta {bits_str(cfg.cells)}",
                "config", step=i, state=tm.name(cfg.state), head=cfg.head, tape=bits_str(cfg.cells),
            )
            if cfg.halted or i == steps:
                break
            cfg = machine_core.tm_step(tm, cfg)
    result = machine_core.tm_run(tm, bits, machine_core.RunLimits(steps=steps))
    meters = result.meters._asdict()
    if not result.halted:
        ctx.out.line(f"sin parada en {steps} pasos", "result", halted=False, **meters)
        return FALSE
    if tm.accept_states:
        accepted = machine_core.tm_accepts(tm, bits, steps)
        ctx.out.line(
            f"{_verdict(accepted)} en {result.meters.steps} pasos (volumen {result.meters.volume}, espacio {result.meters.space})",
            "result", halted=True, accepted=accepted, **meters,
        )
        return OK if accepted else FALSE
    ctx.out.line(
        f"parada en {result.meters.steps} pasos, cinta {bits_str(result.tape.cells)}",
        "result", halted=True, tape=bits_str(result.tape.cells), **meters,
    )
    return OK


# ------------------------
# ikeno-utm
# ------------------------
@command(
    "encode-utm",
    "ikeno_utm",
    "Codifica una máquina en la cinta de la máquina universal",
    arg("machine", help="fichero .tm (parada por la izquierda)"),
    arg("--input", default=""),
    arg("--decode", action="store_true", help="muestra también las reglas decodificadas"),
)
def encode_utm(ctx: Context) -> int:
    a = ctx.args
    image = ikeno_utm.encode_program(_load_machine(a.machine))
    tape = ikeno_utm.utm_initial_tape(image, to_bits(a.input))
    ctx.out.line(tape.render(), "tape", tape=tape.render(), head=tape.head, segments=len(image.segments))
    if a.decode:
        for (q, b), (q2, b2, d) in sorted(ikeno_utm.decode_program(image).items()):
            ctx.out.line(f"rule q{q} {b} -> q{q2} {b2} {d}", "rule", state=q, bit=b, next=q2, write=b2, move=d)
    return OK


@command(
    "run-utm",
    "ikeno_utm",
    "Ejecuta una máquina a través de la máquina universal",
    arg("machine"),
    arg("--input", default=""),
    arg("--cycles", type=int, default=32),
    arg("--choice", choices=["A", "B"], default="A"),
    arg("--trace", action="store_true", help="una línea por ciclo"),
    arg("--check", action="store_true", help="compara ciclo a ciclo con la simulación directa"),
)
def run_utm(ctx: Context) -> int:
    a = ctx.args
    tm = _load_machine(a.machine)
    bits = to_bits(a.input)
    if a.check:
        report = ikeno_utm.cycle_correspondence(tm, bits, a.cycles)
        ctx.out.line(
            f"correspondencia {'exacta' if report.exact else 'rota'} tras {report.cycles_checked} ciclos: {report.detail}",
            "check", **dataclasses.asdict(report),
        )
        return OK if report.exact else FALSE
    image = ikeno_utm.encode_program(tm)
    cycles, halted = 0, False
    for tape, halted in ikeno_utm.iter_cycles(image, bits, choice=a.choice):
        cycles += 1
        if a.trace:
            ctx.out.line(
                f"ciclo {cycles}: cinta {bits_str(tape.simulated_tape())} cabeza {tape.simulated_head()}",
                "cycle", cycle=cycles, tape=bits_str(tape.simulated_tape()), head=tape.simulated_head(), halted=halted,
            )
        if halted or cycles >= a.cycles:
            break
    text = f"parada tras {cycles} ciclos" if halted else f"sin parada en {cycles} ciclos"
    ctx.out.line(text, "result", cycles=cycles, halted=halted)
    return OK if halted else FALSE


# ------------------------
# cellular
# ------------------------
@command(
    "run-ca",
    "cellular",
    "Ejecuta un autómata celular 1D",
    arg("rules", nargs="?", help="fichero de reglas"),
    arg("--rule", type=int, help="regla elemental por su número (0..255)"),
    arg("--row", required=True),
    arg("--steps", type=int, default=8),
)
def run_ca(ctx: Context) -> int:
    a = ctx.args
    if a.rule is not None:
        ca = cellular.elementary_rule(a.rule)
    elif a.rules:
        ca = load_spec(a.rules, "ca").payload
    else:
        raise UsageError("Indique un fichero de reglas o --rule")
    for t, row in enumerate(cellular.ca_run(ca, a.row, a.steps)):
        ctx.out.line("".join(row), "row", t=t, row="".join(row))
    return OK


_PATTERNS = {"glider": cellular.GLIDER, "blinker": cellular.BLINKER_HORIZONTAL, "block": cellular.BLOCK}


@command(
    "life",
    "cellular",
    "Juego de la Vida",
    arg("grid", nargs="?", help="rejilla de '.' y 'O'"),
    arg("--pattern", choices=sorted(_PATTERNS)),
    arg("--size", type=int, default=8),
    arg("--steps", type=int, default=4),
    arg("--all", action="store_true", help="muestra todas las generaciones"),
)
def life(ctx: Context) -> int:
    a = ctx.args
    if a.grid:
        grid = load_spec(a.grid, "life").payload
    elif a.pattern:
        grid = cellular.place(cellular.empty_grid(a.size, a.size), _PATTERNS[a.pattern], 1, 1)
    else:
        raise UsageError("Indique una rejilla o --pattern")
    generations = cellular.life_run(grid, a.steps)
    shown = list(enumerate(generations)) if a.all else [(a.steps, generations[-1])]
    for t, g in shown:
        rows = ["".join("O" if c else "." for c in row) for row in g.cells]
        if ctx.out.as_json:
            ctx.out.line("", "generation", t=t, population=g.population(), rows=rows)
        else:
            ctx.out.line(f"generación {t} (población {g.population()})", "generation")
            for row in rows:
                ctx.out.line(row, "row")
    return OK


@command(
    "ww-ca",
    "cellular",
    "Reconoce ww con el autómata celular",
    arg("word"),
    arg("--compare", action="store_true", help="ejecuta también la máquina de Turing"),
)
def ww_ca(ctx: Context) -> int:
    a = ctx.args
    accepted, depth = cellular.ww_ca_recognizer(a.word)
    ctx.out.line(f"{_verdict(accepted)} (profundidad {depth})", "verdict", accepted=accepted, depth=depth)
    if a.compare:
        tm = machine_core.tm_ww_recognizer()
        bits = machine_core.encode_ww_input(a.word)
        budget = max(get_workbench_settings().tmax, 64 * (len(a.word) + 2) ** 2)
        result = machine_core.tm_run(tm, bits, machine_core.RunLimits(steps=budget))
        tm_ok = machine_core.tm_accepts(tm, bits, budget)
        ctx.out.line(
            f"máquina de Turing: {_verdict(tm_ok)} en {result.meters.steps} pasos",
            "tm", accepted=tm_ok, steps=result.meters.steps,
        )
    return OK if accepted else FALSE


# ------------------------
# batcher
# ------------------------
def _number(text: str) -> Any:
    try:
        return int(text)
    except ValueError:
        try:
            return float(text)
        except ValueError:
            raise BadInput(f"No es un número: {text!r}") from None


@command(
    "batcher",
    "batcher",
    "Red de ordenación bitónica",
    arg("--sort", metavar="FICHERO", help="números separados por espacios"),
    arg("--pad", action="store_true", help="rellena con +inf hasta potencia de dos"),
    arg("--emit-schedule", type=int, metavar="K", help="imprime las capas de la red de 2^K entradas"),
    arg("--merge", action="store_true", help="con --emit-schedule: sólo la red de mezcla"),
)
def batcher_cmd(ctx: Context) -> int:
    a = ctx.args
    if a.emit_schedule is not None:
        schedule = batcher.merge_schedule(a.emit_schedule) if a.merge else batcher.sort_schedule(a.emit_schedule)
        for depth, layer in enumerate(schedule.layers, start=1):
            ctx.out.line(" ".join(f"{lo}:{hi}" for lo, hi in layer), "layer", depth=depth, pairs=list(layer))
        return OK
    if not a.sort:
        raise UsageError("Indique --sort o --emit-schedule")
    try:
        with open(a.sort, encoding="utf-8") as fh:
            values = [_number(tok) for tok in fh.read().split()]
    except OSError as exc:
        raise UsageError(f"No se puede leer {a.sort}: {exc}") from exc
    if not values:
        raise BadInput("No hay números que ordenar")
    padded = list(values)
    if a.pad:
        padded += [math.inf] * ((1 << (len(values) - 1).bit_length()) - len(values))
    ordered, depth = batcher.batcher_sort(padded)
    ordered = ordered[: len(values)]
    ctx.out.line(" ".join(str(v) for v in ordered), "sorted", values=ordered, depth=depth)
    ctx.out.line(f"profundidad {depth}", "depth", depth=depth)
    return OK


# ------------------------
# games
# ------------------------
@command(
    "solve-game",
    "games",
    "Resuelve un juego de información completa",
    arg("--game", choices=["match", "1dchess", "linchess", "halting"], required=True),
    arg("--file", help="fichero de juego"),
    arg("--boxes", type=int, nargs="+", help="cerillas por caja (match)"),
    arg("--player", type=int, default=0),
    arg("--machine", help="fichero .tm (halting)"),
    arg("--input", default="", help="x (halting)"),
    arg("--method", choices=["retro", "dfs"], default="retro"),
    arg("--dump-values", action="store_true"),
    arg("--trace", action="store_true", help="lista de evaluación por ciclos"),
)
def solve_game(ctx: Context) -> int:
    a = ctx.args
    g: games.GameRule
    if a.game == "halting":
        g = games.halting_game(_load_machine(a.machine), to_bits(a.input))
        start = g.start()
    elif a.file:
        spec: GameSpec = load_spec(a.file, "game").payload
        if spec.game != a.game:
            raise UsageError(f"El fichero describe {spec.game}, no {a.game}")
        g, start = spec.build()
    elif a.game == "match":
        g = games.match_game()
        start = g.start(tuple(a.boxes or (3, 3, 3)), a.player)
    else:
        raise UsageError(f"{a.game} necesita --file")

    def trace(cycle: int, resolved: Dict[games.Position, int]) -> None:
        ctx.out.line(f"ciclo {cycle}: {len(resolved)} posiciones", "cycle", cycle=cycle, resolved=len(resolved))
        for x, v in sorted(resolved.items()):
            ctx.out.line(f"  {g.describe(x)} = {v:+d}", "evaluation", cycle=cycle, position=g.describe(x), value=v)

    if a.method == "dfs":
        value = games.solve_dfs(g, start)
    else:
        table = games.solve_retrograde(g, [start], on_cycle=trace if a.trace else None)
        value = table.value_of(g, start)
        if a.dump_values:
            for key in sorted(table.values):
                pos = table.positions[key]
                ctx.out.line(f"{key} {g.describe(pos)} {table.values[key]:+d}", "value",
                             key=key, position=g.describe(pos), value=table.values[key])
    ctx.out.line(f"{g.describe(start)}: valor {value:+d}", "result", game=a.game, value=value)
    if a.game == "halting":
        return OK if value == 1 else FALSE
    return OK


# ------------------------
# tiling
# ------------------------
def _solve_tiles(ctx: Context, inst: tiling.TilingInstance) -> bool:
    if ctx.args.method == "dp":
        return tiling.solve_narrow_dp(inst)
    result = tiling.solve_backtrack(inst)
    if result.ok and result.rows:
        for r, row in enumerate(result.rows):
            ids = [inst.tiles.index(t) for t in row]
            ctx.out.line(" ".join(str(i) for i in ids), "row", row=r, tiles=ids)
    logger.info("Backtracking: %d nodos", result.nodes)
    return result.ok


@command(
    "tiling",
    "tiling",
    "Extensión de teselados y reducción desde una máquina",
    arg("action", choices=["solve", "reduce"]),
    arg("file", help="fichero de teselas (solve) o de máquina (reduce)"),
    arg("--height", type=int),
    arg("--method", choices=["bt", "dp"], default="bt"),
    arg("--input", default="", help="v (reduce)"),
    arg("--witness", type=int, default=2),
    arg("--blank", type=int, default=1),
    arg("--emit", action="store_true", help="imprime el fichero de teselas generado"),
    arg("--check", action="store_true", help="contrasta con la búsqueda directa de testigos"),
)
def tiling_cmd(ctx: Context) -> int:
    a = ctx.args
    if a.action == "solve":
        inst = load_spec(a.file, "tiles").payload
        if a.height is not None:
            inst = dataclasses.replace(inst, height=a.height)
        ok = _solve_tiles(ctx, inst)
    else:
        tm = _load_machine(a.file)
        inst = tiling.tiles_from_run(tm, to_bits(a.input), a.height or 2, a.witness, a.blank)
        if a.emit:
            for line in print_spec(SpecFile("tiles", inst)).splitlines():
                ctx.out.line(line, "tiles", line=line)
        ok = _solve_tiles(ctx, inst)
        if a.check:
            direct = tiling.brute_force_extendable(tm, to_bits(a.input), inst.height, a.witness, a.blank)
            ctx.out.line(
                f"búsqueda directa: {'extensible' if direct else 'no extensible'} ({'coincide' if direct == ok else 'DISCREPA'})",
                "check", direct=direct, agrees=direct == ok,
            )
            if direct != ok:
                return FALSE
    ctx.out.line("extensible" if ok else "no extensible", "result", extendable=ok, height=inst.height, width=inst.width)
    return OK if ok else FALSE


# ------------------------
# sumcheck
# ------------------------
@command(
    "ip-demo",
    "sumcheck",
    "Completitud y solidez del protocolo aritmetizado",
    arg("--s", type=int, default=4),
    arg("--c", type=int, default=3),
    arg("--trials", type=int, default=1000),
    arg("--x", help="posición inicial (s bits); al azar si se omite"),
    arg("--p", type=int, help="primo del campo"),
)
def ip_demo(ctx: Context) -> int:
    a = ctx.args
    g = sumcheck.shift_register_game(a.s, a.c)
    x = to_bits(a.x) if a.x else tuple(ctx.rng.getrandbits(1) for _ in range(a.s))
    p = a.p or sumcheck.choose_prime(g, derive_rng(ctx.seed, "prime"))
    oracle = sumcheck.FieldOracle(g, p)
    v = sumcheck.v_brute(g, a.c, x)
    start = sumcheck.initial_state(g, x, v)
    accepted = sum(
        sumcheck.run_protocol(oracle, start, sumcheck.honest_prover, derive_rng(ctx.seed, "honest", i)).accepted
        for i in range(a.trials)
    )
    rounds = sumcheck.total_rounds(g)
    ctx.out.line(f"x = {bits_str(x)}, V = {v}, p = {p}, rondas = {rounds}", "setup", x=bits_str(x), v=v, p=p, rounds=rounds)
    ctx.out.line(f"completitud: {accepted}/{a.trials} aceptadas", "completeness", accepted=accepted, trials=a.trials)
    bound = 6 * rounds / p
    for name, strategy in (("shifted", sumcheck.shifted_prover), ("best-response", sumcheck.best_response_prover)):
        rate = sumcheck.soundness_rate(g, x, 1 - v, strategy, a.trials, derive_seed(ctx.seed, name), p)
        ctx.out.line(f"solidez ({name}): tasa {rate:.6f} (cota {bound:.6f})", "soundness",
                     strategy=name, rate=rate, bound=bound)
    return OK if accepted == a.trials else FALSE


# ------------------------
# numtheory
# ------------------------
@command(
    "prime",
    "numtheory",
    "Test de Miller-Rabin y generación de primos",
    arg("action", choices=["test", "gen"]),
    arg("number", nargs="?", type=int),
    arg("--rounds", type=int),
    arg("--base", type=int, help="una sola base, mostrando la cadena de cuadrados"),
    arg("--bits", type=int, default=32),
    arg("--blum", action="store_true", help="primo = 3 (mod 4)"),
    arg("--samples", type=int, default=0, help="cuenta candidatos hasta primo en S muestras"),
)
def prime(ctx: Context) -> int:
    a = ctx.args
    if a.action == "gen":
        p = numtheory.gen_prime(a.bits, ctx.rng, blum=a.blum)
        ctx.out.line(str(p), "prime", prime=p, bits=a.bits)
        if a.samples:
            counts = numtheory.count_candidates(a.bits, ctx.rng, a.samples)
            mean = sum(counts) / len(counts)
            expected = a.bits * math.log(2) / 2
            ctx.out.line(f"candidatos medios {mean:.2f} (esperado ~{expected:.2f})", "candidates",
                         mean=mean, expected=expected, samples=a.samples)
        return OK
    n = a.number
    if n is None:
        raise UsageError("prime test necesita un número")
    if n < 2:
        raise BadInput(f"{n} no es ni primo ni compuesto")
    if n in (2, 3):
        ctx.out.line("primo", "verdict", number=n, prime=True)
        return OK
    if n % 2 == 0:
        ctx.out.line("compuesto: Factor(2)", "verdict", number=n, prime=False, factor=2)
        return FALSE
    if a.base is not None:
        verdict = numtheory.miller_rabin(a.base, n, n - 1)
        ctx.out.line(f"cadena {' '.join(str(c) for c in verdict.chain)}", "chain", chain=list(verdict.chain))
        ctx.out.line(str(verdict), "verdict", number=n, tag=verdict.tag, factor=verdict.factor)
        return OK if verdict.tag is numtheory.MRTag.NO_INFO else FALSE
    rounds = a.rounds or get_crypto_settings().prime_rounds
    for _ in range(rounds):
        x = ctx.rng.randrange(1, n)
        verdict = numtheory.miller_rabin(x, n, n - 1)
        if verdict.tag is not numtheory.MRTag.NO_INFO:
            ctx.out.line(f"compuesto: {verdict} (base {x})", "verdict", number=n, prime=False,
                         tag=verdict.tag, factor=verdict.factor, base=x)
            return FALSE
    ctx.out.line(f"probablemente primo ({rounds} rondas)", "verdict", number=n, prime=True, rounds=rounds)
    return OK


# ------------------------
# crypto
# ------------------------
@command(
    "keygen",
    "crypto",
    "Genera una clave de Blum",
    arg("--bits", type=int, help="bits por primo"),
    arg("--out", metavar="NOMBRE", help="guarda NOMBRE.key y NOMBRE.pub"),
    arg("--dir", help="directorio de claves"),
    toy=True,
)
def keygen(ctx: Context) -> int:
    a = ctx.args
    key = crypto.blum_keygen(a.bits, ctx.rng)
    ctx.out.line(f"n = {key.n} ({key.bits} bits)", "key", n=key.n, bits=key.bits)
    if a.out:
        path = KeyStore(a.dir).save(a.out, key)
        ctx.out.line(f"clave guardada en {path}", "saved", path=str(path))
    return OK


@command(
    "encrypt",
    "crypto",
    "Cifra con Blum-Goldwasser",
    arg("--key", required=True, help="fichero de clave pública o privada"),
    arg("--message", required=True, help="bits del mensaje"),
    arg("--out", help="fichero donde guardar el mensaje cifrado"),
    toy=True,
)
def encrypt(ctx: Context) -> int:
    a = ctx.args
    n = KeyStore().load_modulus(a.key)
    m = to_bits(a.message)
    if not m:
        raise BadInput("El mensaje está vacío")
    ct = crypto.bg_encrypt(m, n, ctx.rng)
    if a.out:
        KeyStore.save_ciphertext(a.out, ct)
    if ctx.out.as_json:
        ctx.out.line("", "ciphertext", n=ct.n, x=bits_str(ct.x), s=ct.s_k, c=bits_str(ct.c))
    else:
        ctx.out.stream.write(format_ciphertext(ct))
    return OK


@command(
    "decrypt",
    "crypto",
    "Descifra un mensaje Blum-Goldwasser",
    arg("--key", required=True, help="fichero de clave privada"),
    arg("--in", dest="ciphertext", required=True, help="fichero del mensaje cifrado"),
    toy=True,
)
def decrypt(ctx: Context) -> int:
    a = ctx.args
    store = KeyStore()
    m = crypto.bg_decrypt(store.load_ciphertext(a.ciphertext), store.load_private(a.key))
    ctx.out.line(bits_str(m), "plaintext", message=bits_str(m))
    return OK


def _key_or_fresh(ctx: Context) -> crypto.BlumKey:
    if ctx.args.key:
        return KeyStore().load_private(ctx.args.key)
    return crypto.blum_keygen(ctx.args.bits, derive_rng(ctx.seed, "key"))


@command(
    "prg",
    "crypto",
    "Generador pseudoaleatorio x -> x^2 mod n con bit duro",
    arg("--len", dest="length", type=int, default=64),
    arg("--key", help="clave privada; si se omite se genera una"),
    arg("--bits", type=int, default=16, help="bits por primo de la clave generada"),
    toy=True,
)
def prg(ctx: Context) -> int:
    a = ctx.args
    key = _key_or_fresh(ctx)
    x0 = ctx.rng.randrange(2, key.n - 1)
    while math.gcd(x0, key.n) != 1:
        x0 = ctx.rng.randrange(2, key.n - 1)
    pvec = tuple(ctx.rng.getrandbits(1) for _ in range(key.bits))
    stream = crypto.prg_stream(x0, pvec, key.n, a.length, key)
    ctx.out.line(bits_str(stream), "stream", bits=bits_str(stream), n=key.n)
    return OK


@command(
    "gl-demo",
    "crypto",
    "Recupera x a partir de un oráculo del bit duro",
    arg("--k", type=int, default=12),
    arg("--eps", type=float, default=0.2),
    arg("--trials", type=int, default=50),
    arg("--negative", action="store_true", help="control negativo con un oráculo constante"),
    toy=True,
)
def gl_demo(ctx: Context) -> int:
    a = ctx.args
    hits = 0
    for i in range(a.trials):
        trng = derive_rng(ctx.seed, "gl", i)
        x = tuple(trng.getrandbits(1) for _ in range(a.k))
        if a.negative:
            oracle = crypto.constant_oracle(1)
        elif a.eps >= 1:
            oracle = crypto.parity_oracle(x)
        else:
            oracle = crypto.noisy_oracle(x, a.eps, derive_seed(ctx.seed, "noise", i))
        hits += x in crypto.gl_invert(oracle, a.k, a.eps, trng)
    ctx.out.line(f"recuperados {hits}/{a.trials} (k={a.k}, eps={a.eps})", "recovery",
                 hits=hits, trials=a.trials, k=a.k, eps=a.eps)
    return OK


@command(
    "extract",
    "crypto",
    "Extractor de Toeplitz sobre una fuente plana",
    arg("--m", type=int, default=8),
    arg("--i", type=int, default=2),
    arg("--n", type=int, default=64, help="filas de la fuente plegada"),
    arg("--entropy", type=int, default=6, help="min-entropía de cada fila (bits)"),
    arg("--draws", type=int, default=1000),
    toy=True,
)
def extract(ctx: Context) -> int:
    a = ctx.args
    if not 0 <= a.entropy <= a.m:
        raise BadInput(f"La min-entropía {a.entropy} debe estar en [0, m={a.m}]")
    support = ctx.rng.sample(range(1 << a.m), 1 << a.entropy)
    X = crypto.flat_source_sample(support, a.m, a.n, ctx.rng)
    sample = crypto.toeplitz_extract(X, crypto.random_toeplitz(a.m, a.i, ctx.rng))
    bits = "".join(str(b) for b in sample.flatten())
    ctx.out.line(f"muestra {bits}", "sample", bits=bits)
    distance = crypto.extractor_distance(support, a.m, a.i, a.n, a.draws, ctx.rng)
    bound = 4 * math.sqrt(a.n * a.i / 2 ** a.entropy)
    ctx.out.line(f"distancia a la uniforme {distance:.4f} (cota {bound:.4f})", "distance",
                 distance=distance, bound=bound)
    return OK if distance <= bound else FALSE


@command(
    "nextbit",
    "crypto",
    "Argumento híbrido: localiza el bit predecible",
    arg("--n", type=int, default=8),
    arg("--trials", type=int, default=2000),
    arg("--generator", choices=["alternating", "bbs"], default="alternating"),
    arg("--machine", help="aceptador .tm; por defecto b1 != b2"),
    arg("--bits", type=int, default=16, help="bits por primo para bbs"),
    toy=True,
)
def nextbit(ctx: Context) -> int:
    a = ctx.args
    if a.n < 2:
        raise BadInput(f"Se necesitan al menos 2 bits: {a.n}")
    if a.generator == "bbs":
        gen = crypto.bbs_generator(crypto.blum_keygen(a.bits, derive_rng(ctx.seed, "key")), a.n)
    else:
        def gen(rng: random.Random) -> Tuple[int, ...]:
            b = rng.getrandbits(1)
            return tuple((b + i) % 2 for i in range(a.n))
    test = crypto.tm_acceptor(_load_machine(a.machine)) if a.machine else (lambda bits: bits[0] != bits[1])
    report = crypto.nextbit_hybrid(gen, test, a.n, a.trials, ctx.rng)
    ctx.out.line("p_i: " + " ".join(f"{p:.3f}" for p in report.p), "hybrids", p=list(report.p))
    ctx.out.line(f"bit {report.position} predecible (salto {report.gaps[report.position - 1]:+.3f}, correlación {report.correlation:.4f})",
                 "position", position=report.position, gaps=list(report.gaps), correlation=report.correlation)
    return OK


# ------------------------
# randomized
# ------------------------
@command(
    "qsort-bench",
    "randomized",
    "Comparaciones de Quick-Sort aleatorizado",
    arg("--n", type=int, default=128),
    arg("--trials", type=int, default=1000),
    arg("--exhaustive", action="store_true", help="media exacta por enumeración (n <= 7)"),
)
def qsort_bench(ctx: Context) -> int:
    a = ctx.args
    if a.exhaustive:
        if a.n > 7:
            raise BadInput(f"La enumeración exhaustiva está limitada a n <= 7: {a.n}")
        mean = randomized.quicksort_mean_exhaustive(a.n)
        ctx.out.line(f"media exacta {mean}", "exact", n=a.n, mean=mean)
        return OK
    total = 0
    for i in range(a.trials):
        arr = list(range(a.n))
        derive_rng(ctx.seed, "perm", i).shuffle(arr)
        total += randomized.quicksort_count(arr, derive_rng(ctx.seed, "pivot", i))[1]
    mean = total / a.trials
    expected = float(randomized.expected_comparisons_exact(a.n))
    error = abs(mean - expected) / expected if expected else 0.0
    ctx.out.line(f"media {mean:.2f}, esperado {expected:.2f}, error relativo {error:.4f}", "bench",
                 n=a.n, trials=a.trials, mean=mean, expected=expected, error=error)
    return OK


@command(
    "hc-demo",
    "randomized",
    "Heurística del nodo aislado en G(n, d/n)",
    arg("--n", type=int, default=10),
    arg("--d", type=float, default=2.0),
    arg("--trials", type=int, default=200),
    arg("--exact", action="store_true", help="contrasta con la búsqueda exhaustiva (n <= 10)"),
)
def hc_demo(ctx: Context) -> int:
    a = ctx.args
    p = min(1.0, a.d / a.n)
    rejected = cycles = unsound = 0
    for _ in range(a.trials):
        g = randomized.random_graph(a.n, p, ctx.rng)
        verdict = randomized.hc_heuristic(g)
        rejected += verdict is randomized.HcVerdict.NO_HAMILTONIAN_CYCLE
        if a.exact:
            has = randomized.has_hamiltonian_cycle(g)
            cycles += has
            unsound += has and verdict is randomized.HcVerdict.NO_HAMILTONIAN_CYCLE
    rate = rejected / a.trials
    predicted = randomized.isolation_probability(a.n, a.d)
    ctx.out.line(f"NoHamiltonianCycle en {rejected}/{a.trials} ({rate:.3f}); predicho {predicted:.3f}", "heuristic",
                 rejected=rejected, trials=a.trials, rate=rate, predicted=predicted,
                 expected_isolated=randomized.expected_isolated_nodes(a.n, a.d))
    if a.exact:
        ctx.out.line(f"con ciclo hamiltoniano: {cycles}/{a.trials}", "exact", cycles=cycles, unsound=unsound)
        return OK if unsound == 0 else FALSE
    return OK


@command(
    "philosophers",
    "randomized",
    "Filósofos comensales con monedas",
    arg("--n", type=int, default=10),
    arg("--rounds", type=int, default=200),
    arg("--trace", action="store_true"),
)
def philosophers(ctx: Context) -> int:
    a = ctx.args
    run = randomized.philosophers_sim(a.n, a.rounds, ctx.rng)
    if a.trace:
        for st in run.rounds:
            ctx.out.line(f"ronda {st.round}: intentan {list(st.tried)} comen {list(st.ate)}", "round",
                         round=st.round, tried=list(st.tried), ate=list(st.ate))
    if run.timed_out:
        ctx.out.line(f"tiempo agotado tras {a.rounds} rondas", "result", all_ate_by=None)
        return FALSE
    ctx.out.line(f"todos han comido en la ronda {run.all_ate_by}", "result", all_ate_by=run.all_ate_by)
    return OK


# ------------------------
# kolmogorov
# ------------------------
@command(
    "kolmogorov",
    "kolmogorov",
    "Complejidad de Kolmogorov acotada",
    arg("--x", help="cadena de bits"),
    arg("--cond", default="", help="condición y"),
    arg("--maxlen", type=int, default=12),
    arg("--tmax", type=int),
    arg("--rarity", action="store_true", help="rareza n - K(x | bin(n))"),
    arg("--census", type=int, metavar="N", help="censo de rareza para n = N"),
)
def kolmogorov_cmd(ctx: Context) -> int:
    a = ctx.args
    if a.census is not None:
        table = kolmogorov.rarity_table(a.census, a.tmax)
        for i in range(a.census + 1):
            count = kolmogorov.census(a.census, i, a.tmax, table)
            ctx.out.line(f"d > {i}: {count} (cota {2 ** (a.census - i)})", "census",
                         n=a.census, i=i, count=count, bound=2 ** (a.census - i))
        return OK
    if a.x is None:
        raise UsageError("Indique --x o --census")
    k = kolmogorov.k_bounded(a.x, a.cond, a.maxlen, a.tmax)
    if isinstance(k, kolmogorov.NotFound):
        ctx.out.line("NotFound", "complexity", x=a.x, k=None)
        return FALSE
    ctx.out.line(f"K = {k}", "complexity", x=a.x, k=k)
    if a.rarity:
        d = kolmogorov.rarity(a.x, tmax=a.tmax)
        ctx.out.line(f"rareza {d}", "rarity", x=a.x, rarity=d)
    return OK


# ------------------------
# Despacho
# ------------------------
def build_parser() -> Tuple[argparse.ArgumentParser, Dict[str, argparse.ArgumentParser]]:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="semilla raíz de 64 bits")
    common.add_argument("--json", action="store_true", help="un objeto JSON por línea")
    common.add_argument("--verbose", action="store_true", help="log DEBUG en stderr")

    parser = argparse.ArgumentParser(prog="workbench", description="Workbench de máquinas, juegos y criptografía de juguete")
    sub = parser.add_subparsers(dest="command", metavar="<subcomando>")
    subparsers: Dict[str, argparse.ArgumentParser] = {}
    for cmd in COMMANDS.values():
        p = sub.add_parser(cmd.name, parents=[common], help=cmd.help, description=cmd.help)
        for flags, kwargs in cmd.arguments:
            p.add_argument(*flags, **kwargs)
        subparsers[cmd.name] = p
    return parser, subparsers


def _configure_logging(verbose: bool) -> None:
    level = "DEBUG" if verbose else get_workbench_settings().log_level.upper()
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def dispatch(argv: Sequence[str], stream: Optional[TextIO] = None) -> int:
    stream = stream or sys.stdout
    parser, subparsers = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return OK if exc.code in (0, None) else ERROR
    if args.command is None:
        parser.print_usage(sys.stderr)
        return ERROR
    _configure_logging(args.verbose)

    cmd = COMMANDS[args.command]
    seed = get_workbench_settings().seed if args.seed is None else args.seed
    out = Output(args.json, stream)
    ctx = Context(args, out, seed, derive_rng(seed, cmd.name))
    if cmd.toy:
        out.line(TOY_BANNER, "banner", text=TOY_BANNER)
    try:
        return cmd.run(ctx)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        subparsers[cmd.name].print_usage(sys.stderr)
        return ERROR
    except (WorkbenchError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR


def command_modules() -> List[str]:
    """Módulos de servicio alcanzables desde algún subcomando."""
    return sorted({cmd.module for cmd in COMMANDS.values()})
