#!/usr/bin/env python3
"""Generadores de saltos y tiempos de espera: gaussiana, estable simétrica, estable positiva, Pareto."""
import logging
from typing import Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

JUMP_KINDS = ("gaussian", "stable", "deterministic", "table")
WAIT_KINDS = ("exponential", "pareto", "stable", "deterministic")


class ModelError(ValueError):
    """Se lanza cuando los parámetros de una distribución o de un modelo no son válidos."""
    pass


def symmetric_stable(
    rng: np.random.Generator,
    alpha: float,
    size,
    scale: float = 1.0,
) -> np.ndarray:
    """
    Variables estables simétricas con función característica exp(-|scale·θ|^alpha).

    Método de Chambers-Mallows-Stuck con phi ~ U(-π/2, π/2) y w ~ Exp(1).
    Para alpha = 2 se obtiene N(0, 2·scale²); para alpha = 1, Cauchy.
    """
    if not 0 < alpha <= 2:
        raise ModelError(f"alpha debe estar en (0, 2] (alpha={alpha})")
    phi = (rng.random(size) - 0.5) * np.pi
    if alpha == 1:
        return scale * np.tan(phi)
    w = rng.standard_exponential(size)
    if alpha == 2:
        return 2.0 * scale * np.sqrt(w) * np.sin(phi)
    return scale * (
        (np.cos((1.0 - alpha) * phi) / w) ** (1.0 / alpha - 1.0)
        * np.sin(alpha * phi) / np.cos(phi) ** (1.0 / alpha)
    )


def one_sided_stable(
    rng: np.random.Generator,
    beta: float,
    size,
    scale: float = 1.0,
) -> np.ndarray:
    """
    Variables estables positivas con transformada de Laplace exp(-(scale·s)^beta).

    Representación de Kanter: X = (A(U)/E)^((1-beta)/beta) con U ~ U(0, π),
    E ~ Exp(1) y A(u) = sin((1-beta)u)·sin(beta·u)^(beta/(1-beta)) / sin(u)^(1/(1-beta)).
    """
    if not 0 < beta < 1:
        raise ModelError(f"beta debe estar en (0, 1) para un subordinador estable (beta={beta})")
    u = np.pi * (1.0 - rng.random(size))
    e = rng.standard_exponential(size)
    a = (
        np.sin((1.0 - beta) * u)
        * np.sin(beta * u) ** (beta / (1.0 - beta))
        / np.sin(u) ** (1.0 / (1.0 - beta))
    )
    return scale * (a / e) ** ((1.0 - beta) / beta)


def pareto(rng: np.random.Generator, beta: float, size, scale: float = 1.0) -> np.ndarray:
    """Pareto con P(J > x) = (x/scale)^(-beta) para x >= scale (inversa de la FDA)."""
    if not beta > 0:
        raise ModelError(f"beta debe ser > 0 (beta={beta})")
    return scale * (1.0 - rng.random(size)) ** (-1.0 / beta)


def draw_jumps(
    rng: np.random.Generator,
    kind: str,
    count: int,
    dim: int,
    scale: float = 1.0,
    alpha: float = 2.0,
    table: Optional[Sequence] = None,
) -> np.ndarray:
    """
    Saltos Y_k sin escalar, array (count, dim) con componentes independientes.

    Raises:
        ModelError: Si el tipo es desconocido o faltan parámetros
    """
    shape = (count, dim)
    if kind == "gaussian":
        return rng.normal(0.0, scale, shape)
    if kind == "stable":
        return symmetric_stable(rng, alpha, shape, scale)
    if kind == "deterministic":
        return np.full(shape, float(scale))
    if kind == "table":
        if not table:
            raise ModelError("jump_dist='table' necesita una jump_table no vacía")
        values = np.asarray(table, dtype=np.float64)
        if values.ndim == 1:
            return rng.choice(values, size=shape)
        if values.shape[1] != dim:
            raise ModelError(f"las filas de jump_table deben tener dimensión {dim}")
        return values[rng.integers(0, len(values), count)]
    raise ModelError(f"jump_dist desconocida '{kind}' (opciones: {', '.join(JUMP_KINDS)})")


def draw_waits(
    rng: np.random.Generator,
    kind: str,
    count: int,
    scale: float = 1.0,
    beta: float = 1.0,
) -> np.ndarray:
    """
    Esperas J_k > 0 sin escalar.

    Raises:
        ModelError: Si el tipo es desconocido o alguna espera no es positiva
    """
    if kind == "exponential":
        waits = rng.exponential(scale, count)
    elif kind == "pareto":
        waits = pareto(rng, beta, count, scale)
    elif kind == "stable":
        waits = one_sided_stable(rng, beta, count, scale)
    elif kind == "deterministic":
        waits = np.full(count, float(scale))
    else:
        raise ModelError(f"wait_dist desconocida '{kind}' (opciones: {', '.join(WAIT_KINDS)})")
    # Exp puede devolver 0 exacto con probabilidad ínfima
    zero = waits <= 0
    while np.any(zero):
        waits[zero] = draw_waits(rng, kind, int(zero.sum()), scale, beta)
        zero = waits <= 0
    return waits
