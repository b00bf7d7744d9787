from __future__ import annotations

import dataclasses
import enum
import hashlib
import random
from fractions import Fraction
from typing import Any, Iterable, Sequence, Tuple

import numpy as np


Bits = Tuple[int, ...]


def to_bits(value: str | Iterable[int]) -> Bits:
    """Acepta '0101' o cualquier iterable de 0/1 y devuelve una tupla de bits."""
    if isinstance(value, str):
        out = []
        for ch in value.strip():
            if ch not in "01":
                raise ValueError(f"Carácter no binario: {ch!r}")
            out.append(int(ch))
        return tuple(out)
    bits = tuple(int(b) for b in value)
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"Secuencia no binaria: {bits}")
    return bits


def bits_str(bits: Iterable[int]) -> str:
    return "".join(str(int(b)) for b in bits)


def int_to_bits(value: int, width: int) -> Bits:
    """Big-endian, ancho fijo."""
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


def bits_to_int(bits: Sequence[int]) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def derive_seed(root_seed: int, *labels: Any) -> int:
    """
    Semilla de 64 bits derivada de la raíz y un contador/etiqueta.

    seed = primeros 8 bytes (big-endian) de blake2b("root|label1|label2...").
    """
    material = "|".join([str(root_seed & 0xFFFFFFFFFFFFFFFF)] + [str(x) for x in labels])
    digest = hashlib.blake2b(material.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def derive_rng(root_seed: int, *labels: Any) -> random.Random:
    return random.Random(derive_seed(root_seed, *labels))


def json_default(value: Any) -> Any:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, enum.Enum):
        return value.name
    if isinstance(value, (set, frozenset)):
        return sorted(value, key=repr)
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return dataclasses.asdict(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def is_pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0
