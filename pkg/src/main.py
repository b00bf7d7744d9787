"""
Punto de entrada: python -m src.main <subcomando> [opciones]

Ejemplos:
    python -m src.main ww-ca abab
    python -m src.main prime test 561 --seed 1
    python -m src.main solve-game --game match --trace
"""

import sys

from src.cli.commands import dispatch


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
