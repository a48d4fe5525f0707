"""Fixtures compartidas: trayectorias de referencia y pares de renovación pequeños."""
import pytest

from src.paths.cadlag import HOLD, LINEAR, CadlagPath
from src.sim.ctrw import RenewalPair


@pytest.fixture
def p1():
    """Escalonada con nodos (0,0), (1,5), (3,2) y horizonte 4."""
    return CadlagPath([(0, 0, HOLD), (1, 5, HOLD), (3, 2, HOLD)], 4)


@pytest.fixture
def indicator():
    """1_{[1, 2]} en [0, 2]."""
    return CadlagPath([(0, 0, HOLD), (1, 1, HOLD)], 2)


@pytest.fixture
def doubling_floor():
    """y(s) = 2⌊s⌋ en [0, 3.5]."""
    return CadlagPath([(0, 0, HOLD), (1, 2, HOLD), (2, 4, HOLD), (3, 6, HOLD)], 3.5)


@pytest.fixture
def small_pair():
    """n = 1, Y = (1, -2), J = (0.5, 1.5)."""
    return RenewalPair.from_increments([1.0, -2.0], [0.5, 1.5], n=1)


@pytest.fixture
def ramp():
    """Rampa continua de (0, 0) a (2, 1)."""
    return CadlagPath([(0, 0, LINEAR, 1)], 2)
