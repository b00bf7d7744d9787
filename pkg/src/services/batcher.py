from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, List, Sequence, Tuple

from src.core.errors import InputUnsorted, SizeNotPow2
from src.utils.utils import is_pow2

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]


@dataclass(frozen=True)
class CompareSchedule:
    size: int
    layers: Tuple[Tuple[Pair, ...], ...]

    def __post_init__(self) -> None:
        for layer in self.layers:
            used = set()
            for lo, hi in layer:
                if not 0 <= lo < hi < self.size:
                    raise ValueError(f"Par fuera de rango: {(lo, hi)}")
                if lo in used or hi in used:
                    raise ValueError(f"Capa con pares no disjuntos: {layer}")
                used.update((lo, hi))

    @property
    def depth(self) -> int:
        return len(self.layers)


def flip(i: int, k: int) -> int:
    """Invierte el bit de dirección más alto de i en un array de 2^k."""
    return i ^ (1 << (k - 1))


def shift(i: int, k: int) -> int:
    """Rotación cíclica a la izquierda de los k bits de dirección (shuffle)."""
    top = (i >> (k - 1)) & 1
    return ((i << 1) & ((1 << k) - 1)) | top


def _rotate(i: int, k: int, times: int) -> int:
    for _ in range(times % k):
        i = shift(i, k)
    return i


def _flip_layer(k: int, level: int) -> Tuple[Pair, ...]:
    """Tras `level` shifts el bit k-1-level queda arriba: se compara con su flip y se deshace el shift."""
    pairs = []
    for i in range(1 << k):
        j = _rotate(i, k, level)
        if not j >> (k - 1) & 1:
            pairs.append((i, _rotate(flip(j, k), k, k - level)))
    return tuple(pairs)


def merge_schedule(k: int) -> CompareSchedule:
    """Mezcla bitónica de 2^k: cada entrada contra su flip, y luego recursión en mitades."""
    if k < 1:
        raise ValueError("k debe ser >= 1")
    return CompareSchedule(1 << k, tuple(_flip_layer(k, level) for level in range(k)))


def sort_schedule(k: int) -> CompareSchedule:
    """Merge-sort en red: bloques de 2^j ordenados se mezclan comparando i con su espejo."""
    size = 1 << k
    layers: List[Tuple[Pair, ...]] = []
    for j in range(1, k + 1):
        block = 1 << j
        layers.append(tuple(
            (start + i, start + block - 1 - i)
            for start in range(0, size, block)
            for i in range(block // 2)
        ))
        # medio limpiador a distancia 2^b
        for b in range(j - 2, -1, -1):
            layers.append(_flip_layer(k, k - 1 - b))
    return CompareSchedule(size, tuple(layers))


def apply_schedule(schedule: CompareSchedule, values: Sequence[Any]) -> List[Any]:
    if len(values) != schedule.size:
        raise SizeNotPow2(f"El array tiene {len(values)} entradas y la red espera {schedule.size}")
    out = list(values)
    for layer in schedule.layers:
        for lo, hi in layer:
            if out[lo] > out[hi]:
                out[lo], out[hi] = out[hi], out[lo]
    return out


def _check_sorted(name: str, seq: Sequence[Any]) -> None:
    if any(seq[i] > seq[i + 1] for i in range(len(seq) - 1)):
        raise InputUnsorted(f"La lista {name} no está ordenada")


def bitonic_merge(a: Sequence[Any], b: Sequence[Any], pad: bool = False) -> List[Any]:
    """
    Mezcla dos listas ordenadas colocando a y b invertida (ciclo bitónico).
    Con pad=True se rellena con +inf hasta la siguiente potencia de dos.
    """
    _check_sorted("a", a)
    _check_sorted("b", b)
    total = len(a) + len(b)
    if total == 0:
        return []
    values = list(a) + list(reversed(b))
    sentinels = 0
    if not is_pow2(total):
        if not pad:
            raise SizeNotPow2(f"|a|+|b| = {total} no es potencia de dos")
        target = 1 << math.ceil(math.log2(max(total, 1)))
        sentinels = target - total
        # +inf en medio mantiene la forma bitónica
        values = list(a) + [math.inf] * sentinels + list(reversed(b))
    if len(values) == 1:
        return values
    k = len(values).bit_length() - 1
    merged = apply_schedule(merge_schedule(k), values)
    return merged[: len(merged) - sentinels]


def batcher_sort(arr: Sequence[Any]) -> Tuple[List[Any], int]:
    if not is_pow2(len(arr)):
        raise SizeNotPow2(f"La longitud {len(arr)} no es potencia de dos")
    k = len(arr).bit_length() - 1
    if k == 0:
        return list(arr), 0
    schedule = sort_schedule(k)
    return apply_schedule(schedule, arr), schedule.depth
