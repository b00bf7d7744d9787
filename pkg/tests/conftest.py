import random

import pytest

from src.services.crypto import BlumKey
from src.services.machine_core import HaltMode
from tests.helpers import make_tm


@pytest.fixture
def rng():
    return random.Random(12345)


@pytest.fixture
def flip_right():
    """Invierte todos los bits y para al salir por la derecha."""
    return make_tm({(0, 0): (0, 1, "R"), (0, 1): (0, 0, "R")}, halt_mode=HaltMode.RIGHT_ROLL_OFF)


@pytest.fixture
def increment():
    """Suma 1 con el bit menos significativo a la izquierda y vuelve al inicio."""
    return make_tm({
        (0, 0): (1, 1, "L"),
        (0, 1): (0, 0, "R"),
        (1, 0): (1, 0, "L"),
        (1, 1): (1, 1, "L"),
    })


@pytest.fixture
def looper():
    """Rebota entre las celdas 0 y 1 para siempre."""
    return make_tm({
        (0, 0): (1, 0, "R"),
        (0, 1): (1, 1, "R"),
        (1, 0): (0, 0, "L"),
        (1, 1): (0, 1, "L"),
    })


@pytest.fixture
def eraser():
    """Borra los unos iniciales y sale por la izquierda."""
    return make_tm({(0, 0): (0, 0, "L"), (0, 1): (0, 0, "R")})


@pytest.fixture
def suite_machines(increment, looper, eraser):
    return {"increment": increment, "looper": looper, "eraser": eraser}


@pytest.fixture
def blum21():
    return BlumKey(n=21, p=3, q=7)
