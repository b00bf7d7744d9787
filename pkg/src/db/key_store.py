from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, Optional

from src.core.errors import BadInput, SpecSyntaxError
from src.core.settings.crypto_service import get_crypto_settings
from src.services.crypto import BlumKey, Ciphertext
from src.utils.utils import bits_str, to_bits

logger = logging.getLogger(__name__)


def format_key(key: BlumKey, public: bool = False) -> str:
    if public:
        return f"n {key.n}\n"
    return f"n {key.n}\np {key.p}\nq {key.q}\n"


def parse_key_text(text: str) -> Dict[str, int]:
    """Líneas `<campo> <entero>`; se admiten comentarios con #."""
    fields: Dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or parts[0] not in ("n", "p", "q"):
            raise SpecSyntaxError(lineno, 1, f"Línea de clave inválida: {raw!r}")
        if parts[0] in fields:
            raise SpecSyntaxError(lineno, 1, f"Campo repetido: {parts[0]}")
        try:
            fields[parts[0]] = int(parts[1])
        except ValueError:
            raise SpecSyntaxError(lineno, raw.index(parts[1]) + 1, f"No es un entero decimal: {parts[1]!r}")
    if "n" not in fields:
        raise SpecSyntaxError(1, 1, "Falta el campo n")
    return fields


class KeyStore:
    key_dir: Path

    def __init__(self, key_dir: Optional[str] = None):
        self.key_dir = Path(key_dir or get_crypto_settings().key_dir)

    def _path(self, name: str, public: bool) -> Path:
        return self.key_dir / (f"{name}.pub" if public else f"{name}.key")

    def save(self, name: str, key: BlumKey) -> Path:
        self.key_dir.mkdir(parents=True, exist_ok=True)
        private = self._path(name, public=False)
        private.write_text(format_key(key), encoding="utf-8")
        self._path(name, public=True).write_text(format_key(key, public=True), encoding="utf-8")
        logger.info("Clave %s guardada en %s", name, self.key_dir)
        return private

    @staticmethod
    def read_file(path: str | Path) -> Dict[str, int]:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise BadInput(f"No se puede leer el fichero de clave {path}: {exc}") from exc
        return parse_key_text(text)

    def load_private(self, path: str | Path) -> BlumKey:
        fields = self.read_file(path)
        if "p" not in fields or "q" not in fields:
            raise BadInput(f"{path} no contiene la clave privada (faltan p y q)")
        try:
            return BlumKey(**fields)
        except ValueError as exc:
            raise BadInput(f"Clave inválida en {path}: {exc}") from exc

    def load_modulus(self, path: str | Path) -> int:
        return self.read_file(path)["n"]

    # ------------------------
    # Mensajes cifrados
    # ------------------------
    @staticmethod
    def save_ciphertext(path: str | Path, ct: Ciphertext) -> None:
        Path(path).write_text(format_ciphertext(ct), encoding="utf-8")

    @staticmethod
    def load_ciphertext(path: str | Path) -> Ciphertext:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise BadInput(f"No se puede leer el mensaje cifrado {path}: {exc}") from exc
        return parse_ciphertext(text)


def format_ciphertext(ct: Ciphertext) -> str:
    return f"n {ct.n}\nx {bits_str(ct.x)}\ns {ct.s_k}\nc {bits_str(ct.c)}\n"


def parse_ciphertext(text: str) -> Ciphertext:
    fields: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or parts[0] not in ("n", "x", "s", "c") or parts[0] in fields:
            raise SpecSyntaxError(lineno, 1, f"Línea de mensaje cifrado inválida: {raw!r}")
        fields[parts[0]] = parts[1]
    missing = [k for k in ("n", "x", "s", "c") if k not in fields]
    if missing:
        raise SpecSyntaxError(1, 1, f"Faltan campos del mensaje cifrado: {', '.join(missing)}")
    try:
        return Ciphertext(int(fields["n"]), to_bits(fields["x"]), int(fields["s"]), to_bits(fields["c"]))
    except ValueError as exc:
        raise SpecSyntaxError(1, 1, f"Mensaje cifrado mal formado: {exc}") from exc
