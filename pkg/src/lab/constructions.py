#!/usr/bin/env python3
"""
Sucesiones deterministas de trayectorias para las pruebas de M1.

- El contraejemplo: x_n -> x en M1, f(x_n) -> x pero f(x) es la identidad.
- Tres sucesiones en las que las escaleras de x_n se acercan a las de x
  (extremos y salto de cierre), de modo que f(x_n) -> f(x).
"""
import logging
from dataclasses import dataclass
from typing import Callable

from src.paths.cadlag import HOLD, LINEAR, CadlagPath, PathDomainError
from src.paths.transforms import identity_path

logger = logging.getLogger(__name__)

COUNTEREXAMPLE_HORIZON = 3.0


def counterexample_limit(horizon: float = COUNTEREXAMPLE_HORIZON) -> CadlagPath:
    """x(t) = t fuera de [1, 2) y x(t) = 1 en [1, 2): una escalera cerrada por un salto de 1 en t = 2."""
    return CadlagPath(
        [(0.0, 0.0, LINEAR), (1.0, 1.0, HOLD), (2.0, 2.0, LINEAR, horizon)],
        horizon,
    )


def counterexample_term(n: int, horizon: float = COUNTEREXAMPLE_HORIZON) -> CadlagPath:
    """
    x_n = t fuera de [1, 2), 1 en [1, 2 - 1/n) y 1 + 1/n en [2 - 1/n, 2).

    La escalera [1, 2) de x se parte en dos: la primera cierra con un salto
    de 1/n y la segunda con uno de 1 - 1/n.
    """
    if n < 2:
        raise PathDomainError(f"el término x_n necesita n >= 2 (n={n})")
    return CadlagPath(
        [
            (0.0, 0.0, LINEAR),
            (1.0, 1.0, HOLD),
            (2.0 - 1.0 / n, 1.0 + 1.0 / n, HOLD),
            (2.0, 2.0, LINEAR, horizon),
        ],
        horizon,
    )


def counterexample_identity(horizon: float = COUNTEREXAMPLE_HORIZON) -> CadlagPath:
    """e(t) = t, que es f(x) para el x del contraejemplo."""
    return identity_path(horizon)


# ----------------------------------------------------------------------
# Sucesiones que cumplen las hipótesis de conservación
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class PreservingSequence:
    """
    Sucesión x_n -> x cuyas escaleras convergen a las de x.

    probe: instante dentro de una escalera de x para comparar η, θ y el salto.
    """
    name: str
    limit: CadlagPath
    term: Callable[[int], CadlagPath]
    probe: float


def _shifted_closure_limit() -> CadlagPath:
    return CadlagPath([(0.0, 0.0, HOLD), (1.0, 1.0, HOLD), (2.0, 3.0, HOLD)], COUNTEREXAMPLE_HORIZON)


def _shifted_closure_term(n: int) -> CadlagPath:
    # θ de la primera escalera se retrasa 1/n; el segundo salto se adelanta 1/(2n)
    return CadlagPath(
        [(0.0, 0.0, HOLD), (1.0 + 1.0 / n, 1.0, HOLD), (2.0 - 0.5 / n, 3.0, HOLD)],
        COUNTEREXAMPLE_HORIZON,
    )


def _lifted_levels_term(n: int) -> CadlagPath:
    # Mismos instantes; mesetas desplazadas 1/n, el salto final cambia en 1/n
    return CadlagPath(
        [(0.0, 1.0 / n, HOLD), (1.0, 1.0 + 1.0 / n, HOLD), (2.0, 3.0, HOLD)],
        COUNTEREXAMPLE_HORIZON,
    )


def _ramp_then_stair_limit() -> CadlagPath:
    return CadlagPath([(0.0, 0.0, LINEAR), (1.0, 1.0, HOLD), (2.0, 3.0, HOLD)], COUNTEREXAMPLE_HORIZON)


def _ramp_then_stair_term(n: int) -> CadlagPath:
    # Rampa con un pico de 1/n en 0.5; la escalera [1, 2) se alarga 1/n
    return CadlagPath(
        [
            (0.0, 0.0, LINEAR),
            (0.5, 0.5 + 1.0 / n, LINEAR),
            (1.0, 1.0, HOLD),
            (2.0 + 1.0 / n, 3.0, HOLD),
        ],
        COUNTEREXAMPLE_HORIZON,
    )


def preserving_sequences() -> list[PreservingSequence]:
    """Las tres sucesiones de referencia (válidas para n >= 2)."""
    return [
        PreservingSequence("shifted_closure", _shifted_closure_limit(), _shifted_closure_term, probe=0.5),
        PreservingSequence("lifted_levels", _shifted_closure_limit(), _lifted_levels_term, probe=0.5),
        PreservingSequence("ramp_then_stair", _ramp_then_stair_limit(), _ramp_then_stair_term, probe=1.5),
    ]
