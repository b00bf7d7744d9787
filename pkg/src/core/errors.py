"""
Jerarquía de errores del workbench.

Todas las excepciones de dominio heredan de WorkbenchError; la CLI las
traduce a código de salida 2. Los veredictos (reject, NotFound, ...) NO son
excepciones: se devuelven como valores.
"""

from __future__ import annotations


class WorkbenchError(Exception):
    """Error base de dominio."""


# ------------------------
# Máquinas
# ------------------------
class StepOnHalted(WorkbenchError):
    pass


class UnreachableEntry(WorkbenchError):
    """Celda '--' de la tabla universal: la cinta está corrupta."""


class NotBinary(WorkbenchError):
    pass


class SymbolOutOfAlphabet(WorkbenchError):
    pass


# ------------------------
# Ordenación
# ------------------------
class SizeNotPow2(WorkbenchError):
    pass


class InputUnsorted(WorkbenchError):
    pass


# ------------------------
# Juegos y búsqueda
# ------------------------
class StateSpaceOverflow(WorkbenchError):
    pass


class DepthOverflow(WorkbenchError):
    pass


class MalformedTriple(WorkbenchError):
    pass


class MalformedTable(WorkbenchError):
    pass


class BudgetExceeded(WorkbenchError):
    pass


class HeightTooLarge(WorkbenchError):
    pass


# ------------------------
# Protocolo aritmetizado
# ------------------------
class CapExceeded(WorkbenchError):
    pass


class FalseClaim(WorkbenchError):
    """El probador honesto se niega a defender un valor falso."""


# ------------------------
# Teoría de números y cripto
# ------------------------
class BadInput(WorkbenchError):
    pass


class GenerationTimeout(WorkbenchError):
    pass


class NotCoprime(WorkbenchError):
    pass


class NotResidue(WorkbenchError):
    pass


class KeyMismatch(WorkbenchError):
    pass


class LengthMismatch(WorkbenchError):
    pass


class ShapeMismatch(WorkbenchError):
    pass


class NotToeplitz(WorkbenchError):
    pass


# ------------------------
# CLI
# ------------------------
class SpecSyntaxError(WorkbenchError):
    def __init__(self, line: int, col: int, message: str) -> None:
        self.line = line
        self.col = col
        self.message = message
        super().__init__(f"línea {line}, columna {col}: {message}")


class UsageError(WorkbenchError):
    pass
