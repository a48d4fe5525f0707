#!/usr/bin/env python3
"""Flujos aleatorios reproducibles basados en contador (Philox) con división por (semilla, propósito, índices)."""
import logging
from typing import Optional

import numpy as np

logger = logging.getLogger(__name__)

GENERATOR_ID = "numpy.random.Philox"
DEFAULT_SEED = 20240607

# Un espacio de claves por uso; evita que dos experimentos compartan flujo
PURPOSES = {
    "ctrw": 1,
    "limit": 2,
    "property": 3,
    "misc": 4,
}

_seed: Optional[int] = None


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < 2 ** 64:
        raise ValueError(f"la semilla debe ser un entero de 64 bits sin signo (seed={seed})")
    return seed


def stream(seed: int, purpose: str, *indices: int) -> np.random.Generator:
    """
    Generador independiente para (seed, purpose, indices).

    Args:
        seed: Semilla maestra de 64 bits
        purpose: Clave de PURPOSES
        indices: Índices adicionales (p. ej. n y réplica)

    Returns:
        numpy.random.Generator sobre Philox
    """
    if purpose not in PURPOSES:
        raise ValueError(f"propósito de flujo desconocido '{purpose}'")
    key = (PURPOSES[purpose], *(int(i) for i in indices))
    sequence = np.random.SeedSequence(entropy=_check_seed(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(sequence))


def set_seed(seed: int) -> int:
    """Fijar la semilla maestra por defecto del proceso."""
    global _seed
    _seed = _check_seed(seed)
    logger.debug(f"Semilla maestra: {_seed}")
    return _seed


def get_seed() -> int:
    """Semilla maestra actual (DEFAULT_SEED si no se ha fijado)."""
    return DEFAULT_SEED if _seed is None else _seed
