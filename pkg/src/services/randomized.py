"""
Algoritmos aleatorizados: Quick-Sort con pivote al azar, la heurística del nodo
aislado para ciclos hamiltonianos y los filósofos comensales.
"""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Any, List, Optional, Sequence, Tuple

from src.core.errors import BadInput

logger = logging.getLogger(__name__)


# ------------------------
# Quick-Sort
# ------------------------
def quicksort_count(arr: Sequence[Any], rng: random.Random) -> Tuple[List[Any], int]:
    """Ordena con pivote al azar; cada elemento se compara una vez con el pivote de su partición."""
    comparisons = 0
    out: List[Any] = []
    # pila explícita de particiones pendientes, procesadas de izquierda a derecha
    stack: List[Tuple[bool, List[Any]]] = [(False, list(arr))]
    while stack:
        done, part = stack.pop()
        if done or len(part) <= 1:
            out.extend(part)
            continue
        k = rng.randrange(len(part))
        pivot = part[k]
        less, equal, greater = [], [pivot], []
        for idx, v in enumerate(part):
            if idx == k:
                continue
            comparisons += 1
            if v < pivot:
                less.append(v)
            elif v > pivot:
                greater.append(v)
            else:
                equal.append(v)
        stack.append((False, greater))
        stack.append((True, equal))
        stack.append((False, less))
    return out, comparisons


def expected_comparisons_exact(n: int) -> Fraction:
    """Suma sobre i < j de 2 / (1 + j - i)."""
    if n < 1:
        raise BadInput(f"n debe ser >= 1: {n}")
    return sum((Fraction(2 * (n - d), d + 1) for d in range(1, n)), Fraction(0))


@lru_cache(maxsize=None)
def expected_comparisons_recurrence(n: int) -> Fraction:
    """C(n) = n - 1 + (1/n) suma_k (C(k) + C(n - 1 - k))."""
    if n <= 1:
        return Fraction(0)
    c = expected_comparisons_recurrence
    return (n - 1) + sum((c(k) + c(n - 1 - k) for k in range(n)), Fraction(0)) / n


def quicksort_mean_exhaustive(n: int) -> Fraction:
    """Media exacta sobre todas las permutaciones de n claves distintas y todas las secuencias de pivotes."""
    if n < 1:
        raise BadInput(f"n debe ser >= 1: {n}")

    def mean(part: Tuple[int, ...]) -> Fraction:
        if len(part) <= 1:
            return Fraction(0)
        total = Fraction(0)
        for pivot in part:
            less = tuple(v for v in part if v < pivot)
            greater = tuple(v for v in part if v > pivot)
            total += mean(less) + mean(greater)
        return (len(part) - 1) + total / len(part)

    perms = list(itertools.permutations(range(n)))
    result = sum((mean(p) for p in perms), Fraction(0)) / len(perms)
    return result


# ------------------------
# Grafos aleatorios y ciclos hamiltonianos
# ------------------------
@dataclass(frozen=True)
class UGraph:
    n: int
    edges: Tuple[Tuple[int, int], ...]

    def __post_init__(self) -> None:
        norm = sorted({(min(a, b), max(a, b)) for a, b in self.edges})
        for a, b in norm:
            if a == b:
                raise BadInput(f"Lazo en el nodo {a}")
            if not 0 <= a < b < self.n:
                raise BadInput(f"Arista fuera de rango: {(a, b)}")
        if len(norm) != len(self.edges):
            raise BadInput("Aristas duplicadas")
        object.__setattr__(self, "edges", tuple(norm))

    def degrees(self) -> List[int]:
        deg = [0] * self.n
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def neighbours(self) -> List[List[int]]:
        adj: List[List[int]] = [[] for _ in range(self.n)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj


def random_graph(n: int, p: float, rng: random.Random) -> UGraph:
    """G(n, p): cada arista con probabilidad p, independientes."""
    if not 0 <= p <= 1:
        raise BadInput(f"p fuera de [0, 1]: {p}")
    return UGraph(n, tuple((a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < p))


def complete_graph(n: int) -> UGraph:
    return UGraph(n, tuple(itertools.combinations(range(n), 2)))


class HcVerdict(Enum):
    NO_HAMILTONIAN_CYCLE = "NoHamiltonianCycle"
    PASS = "Pass"


def hc_heuristic(g: UGraph) -> HcVerdict:
    if any(d == 0 for d in g.degrees()):
        return HcVerdict.NO_HAMILTONIAN_CYCLE
    return HcVerdict.PASS


def has_hamiltonian_cycle(g: UGraph) -> bool:
    """Búsqueda exhaustiva; sólo para n <= 10. Con n < 3 no hay ciclo."""
    if g.n > 10:
        raise BadInput(f"Búsqueda exhaustiva limitada a n <= 10: {g.n}")
    if g.n < 3:
        return False
    adj = [set(a) for a in g.neighbours()]
    path = [0]
    used = {0}

    def extend() -> bool:
        if len(path) == g.n:
            return 0 in adj[path[-1]]
        for nxt in sorted(adj[path[-1]]):
            if nxt not in used:
                path.append(nxt)
                used.add(nxt)
                if extend():
                    return True
                path.pop()
                used.discard(nxt)
        return False

    return extend()


def isolation_probability(n: int, d: float) -> float:
    """1 - (1 - (1 - p)^(n-1))^n con p = d/n, tratando los nodos como independientes."""
    if n < 2:
        raise BadInput(f"n debe ser >= 2: {n}")
    p = d / n
    isolated = (1 - p) ** (n - 1)
    return 1 - (1 - isolated) ** n


# ------------------------
# Filósofos comensales
# ------------------------
@dataclass(frozen=True)
class RoundStats:
    round: int
    tried: Tuple[int, ...]
    ate: Tuple[int, ...]


@dataclass(frozen=True)
class PhilosophersRun:
    all_ate_by: Optional[int]
    rounds: Tuple[RoundStats, ...]

    @property
    def timed_out(self) -> bool:
        return self.all_ate_by is None


def philosophers_sim(n: int, max_rounds: int, rng: random.Random) -> PhilosophersRun:
    """
    Rondas síncronas: cada comensal que aún no ha comido lanza una moneda; con
    cruz intenta coger los dos cubiertos y come sólo si ningún vecino lo intenta.
    """
    if n < 2:
        raise BadInput(f"Se necesitan al menos 2 comensales: {n}")
    hungry = set(range(n))
    stats: List[RoundStats] = []
    for r in range(1, max_rounds + 1):
        tried = {i for i in sorted(hungry) if rng.random() < 0.5}
        ate = {i for i in tried if (i - 1) % n not in tried and (i + 1) % n not in tried}
        stats.append(RoundStats(r, tuple(sorted(tried)), tuple(sorted(ate))))
        hungry -= ate
        if not hungry:
            logger.debug("Filósofos: todos han comido en la ronda %d", r)
            return PhilosophersRun(r, tuple(stats))
    return PhilosophersRun(None, tuple(stats))


def expected_isolated_nodes(n: int, d: float) -> float:
    return n * (1 - d / n) ** (n - 1)


def mean_degree_isolation_estimate(n: int, d: float) -> float:
    """Variante con (1 - 1/n)^(dn) por nodo."""
    return 1 - (1 - (1 - 1 / n) ** (d * n)) ** n

