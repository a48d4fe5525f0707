#!/usr/bin/env python3
"""Operadores trayectoria -> trayectoria: relleno de escaleras f, inversa generalizada, composición y Φ."""
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from src.paths.cadlag import (
    HOLD,
    INF,
    LINEAR,
    CadlagPath,
    MonotonePath,
    PathDomainError,
    graph_vertices,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Stair:
    """
    Escalera: intervalo máximo de constancia [eta, theta) cerrado por un salto en theta.

    first_knot y last_knot son los índices de los nodos que forman la meseta.
    """
    eta: float
    theta: float
    value: tuple
    closing_value: tuple
    first_knot: int
    last_knot: int

    @property
    def jump_magnitude(self) -> float:
        return float(np.max(np.abs(np.subtract(self.closing_value, self.value))))


def stairs(path: CadlagPath) -> list[Stair]:
    """Escaleras completas de la trayectoria, en orden temporal."""
    out = []
    k = path.n_knots
    i = 0
    while i < k:
        if not path._constant[i]:
            i += 1
            continue
        value = path.values[i]
        j = i
        while j + 1 < k and path._constant[j + 1] and np.array_equal(path.values[j + 1], value):
            j += 1
        if j + 1 < k and path._has_jump[j + 1]:
            out.append(Stair(
                eta=float(path.times[i]),
                theta=float(path.times[j + 1]),
                value=tuple(value.tolist()),
                closing_value=tuple(path.values[j + 1].tolist()),
                first_knot=i,
                last_knot=j,
            ))
        i = j + 1
    return out


def stair_fill(path: CadlagPath) -> CadlagPath:
    """
    Aplicar la transformación f: cada escalera se sustituye por el segmento
    lineal que une (eta, x(eta)) con (theta, x(theta)).

    Las mesetas que no terminan en salto (incluida una escalera final
    incompleta dentro del horizonte) no se modifican.

    Args:
        path: Trayectoria càdlàg de cualquier dimensión

    Returns:
        Nueva trayectoria; la entrada no se modifica
    """
    return fill_stairs(path, stairs(path))


def fill_stairs(path: CadlagPath, found: Sequence[Stair]) -> CadlagPath:
    """Rellenar solo las escaleras dadas (deben proceder de stairs(path))."""
    if not found:
        return CadlagPath.from_arrays(path.times, path.values, path.modes, path.horizon,
                                      ends=path.ends, open_right=path.open_right)

    keep = np.ones(path.n_knots, dtype=bool)
    modes = list(path.modes)
    ends = path.ends.copy()
    for stair in found:
        keep[stair.first_knot + 1:stair.last_knot + 1] = False
        modes[stair.first_knot] = LINEAR
        ends[stair.first_knot] = stair.closing_value
    logger.debug(f"stair_fill: {len(found)} escaleras rellenadas")
    return CadlagPath.from_arrays(
        path.times[keep],
        path.values[keep],
        tuple(m for m, kept in zip(modes, keep) if kept),
        path.horizon,
        ends=ends[keep],
        open_right=path.open_right,
    )


def stair_fill_pointwise(path: CadlagPath, t: float) -> np.ndarray:
    """
    f(x)(t) evaluado literalmente con eta/theta. Más lento que stair_fill;
    se usa como oráculo.
    """
    eta = path.eta(t)
    theta = path.theta(t)
    if eta < t < theta < INF and path.is_jump_time(theta) and path.is_constant_on(eta, theta):
        start = path.eval(eta)
        stop = path.eval(theta)
        return start + (stop - start) * ((t - eta) / (theta - eta))
    return path.eval(t)


# ----------------------------------------------------------------------
# Trayectorias laterales x⁻ / x⁺
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class SidedPath:
    """Versión lateral de una trayectoria: side='left' da x⁻, side='right' da x⁺."""
    path: CadlagPath
    side: str

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise PathDomainError(f"side debe ser 'left' o 'right' (recibido '{self.side}')")

    def eval_many(self, ts: Sequence[float]) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
        if self.side == "right":
            return self.path.eval_many(ts)
        out = np.empty((len(ts), self.path.dim))
        zero = ts == 0
        out[zero] = self.path.values[0]
        if np.any(~zero):
            out[~zero] = self.path.left_limits_many(ts[~zero])
        return out

    def eval(self, t: float) -> np.ndarray:
        return self.eval_many([t])[0]


def left_limit_path(path: CadlagPath) -> SidedPath:
    """x⁻(t) = x(t-), con x⁻(0) = x(0)."""
    return SidedPath(path, "left")


def right_limit_path(path: CadlagPath) -> SidedPath:
    """x⁺(t) = x(t+); para una trayectoria càdlàg coincide con x."""
    return SidedPath(path, "right")


# ----------------------------------------------------------------------
# Inversa generalizada, composición y Φ
# ----------------------------------------------------------------------
def right_inverse(y: CadlagPath) -> MonotonePath:
    """
    Inversa generalizada continua por la derecha y⁻¹(t) = inf{s > 0 : y(s) > t}.

    Se obtiene reflejando el grafo completado de y: en cada nivel t el valor
    es el mayor s del grafo reflejado. El resultado vive en [0, y(horizon))
    y es open_right.

    Args:
        y: Trayectoria unidimensional no decreciente con y(0) >= 0

    Returns:
        MonotonePath con horizonte y(horizon)

    Raises:
        PathDomainError: Si y no es monótona, y(0) < 0 o el rango es vacío
    """
    y = MonotonePath.from_path(y)
    verts = graph_vertices(y)
    levels, times = verts[:, 0], verts[:, 1]
    if levels[0] < 0:
        raise PathDomainError(f"right_inverse necesita y(0) >= 0 (y(0)={levels[0]})")
    if levels[0] > 0:
        levels = np.concatenate([[0.0], levels])
        times = np.concatenate([[0.0], times])

    starts = np.flatnonzero(np.concatenate([[True], levels[1:] != levels[:-1]]))
    stops = np.concatenate([starts[1:] - 1, [len(levels) - 1]])
    if len(starts) < 2:
        raise PathDomainError("rango de y vacío: la inversa no tiene dominio")

    knot_t = levels[starts[:-1]]
    knot_v = times[stops[:-1]]
    seg_end = times[starts[1:]]
    modes = tuple(HOLD if a == b else LINEAR for a, b in zip(knot_v, seg_end))
    return MonotonePath.from_arrays(knot_t, knot_v, modes, horizon=float(levels[starts[-1]]),
                                    ends=seg_end, open_right=True)


def _pull_back(x: CadlagPath, s_a: float, s_end: float, c_a: float, c_b: float) -> list[tuple]:
    """Nodos de x∘z sobre [c_a, c_b) cuando z es afín y estrictamente creciente de s_a a s_end."""
    scale = (c_b - c_a) / (s_end - s_a)
    inner = x.times[(x.times > s_a) & (x.times < s_end)]
    breaks = np.concatenate([[s_a], inner, [s_end]])
    starts = np.concatenate([[c_a], c_a + (inner - s_a) * scale])
    values = x.eval_many(breaks[:-1])
    lefts = x.left_limits_many(breaks[1:])
    segs = x._segment_of(breaks[:-1])
    rows = []
    last_t = None
    for t, value, end, k in zip(starts, values, lefts, segs):
        # Nodos colapsados por redondeo al reescalar
        if last_t is not None and not last_t < t < c_b:
            continue
        if x.modes[k] == LINEAR and not np.array_equal(value, end):
            rows.append((float(t), value, LINEAR, end))
        else:
            rows.append((float(t), value, HOLD))
        last_t = t
    return rows


def _subordinate(x: CadlagPath, z: MonotonePath, hold_side: str) -> CadlagPath:
    if max(z.values[:, 0].max(), z.ends[:, 0].max()) > x.horizon:
        raise PathDomainError(f"el cambio de tiempo sale del dominio de x (horizon={x.horizon})")
    holds = z._constant
    if hold_side == "left":
        plateau_values = left_limit_path(x).eval_many(z.values[:, 0])
    else:
        plateau_values = x.eval_many(z.values[:, 0])

    if np.all(holds):
        return CadlagPath.from_arrays(z.times, plateau_values, HOLD, z.horizon,
                                      open_right=z.open_right)

    rows = []
    k = z.n_knots
    for i in range(k):
        c_a = float(z.times[i])
        if holds[i]:
            rows.append((c_a, plateau_values[i], HOLD))
            continue
        c_b = float(z.times[i + 1]) if i + 1 < k else z.horizon
        rows.extend(_pull_back(x, float(z.values[i, 0]), float(z.ends[i, 0]), c_a, c_b))
    return CadlagPath(rows, z.horizon, open_right=z.open_right)


def phi(x: CadlagPath, y: CadlagPath) -> CadlagPath:
    """
    Φ(x, y) = (x⁻ ∘ (y⁻¹)⁻)⁺.

    Con z = y⁻¹: en las mesetas de z (saltos de y) vale x(z-), tomando
    x(0) si z = 0; en los tramos estrictamente crecientes de z vale x∘z.

    Args:
        x: Trayectoria a subordinar, con x.horizon >= y.horizon
        y: Trayectoria no decreciente (cambio de tiempo)

    Returns:
        Trayectoria en [0, y(horizon)), open_right
    """
    if x.horizon < y.horizon:
        raise PathDomainError(f"phi necesita x.horizon >= y.horizon ({x.horizon} < {y.horizon})")
    return _subordinate(x, right_inverse(y), hold_side="left")


def compose(x: CadlagPath, z: CadlagPath) -> CadlagPath:
    """Composición x∘z para z no decreciente con valores en el dominio de x."""
    return _subordinate(x, MonotonePath.from_path(z), hold_side="right")


def inverse_of_composed(y: CadlagPath) -> MonotonePath:
    """(y∘y⁻¹)⁻¹ calculado sin pasar por phi; lado izquierdo de la igualdad con Φ(y, y)."""
    return right_inverse(compose(y, right_inverse(y)))


def common_domain(*paths: CadlagPath) -> float:
    """Mayor T tal que todas las trayectorias están definidas en [0, T)."""
    return min(p.horizon for p in paths)


def monotone_step(times: Sequence[float], values: Sequence[float], horizon: float,
                  open_right: bool = False) -> MonotonePath:
    """Atajo para construir una MonotonePath escalonada."""
    return MonotonePath.from_arrays(times, np.asarray(values, dtype=np.float64), HOLD, horizon,
                                    open_right=open_right)


def identity_path(horizon: float) -> MonotonePath:
    """e(t) = t en [0, horizon]."""
    return MonotonePath([(0.0, 0.0, LINEAR, horizon)], horizon)


def inverse_identity_pair(y: CadlagPath) -> tuple[CadlagPath, CadlagPath, float]:
    """
    Devuelve ((y∘y⁻¹)⁻¹, Φ(y, y), dominio común).

    La igualdad solo vale para y(0) = 0, como en cualquier trayectoria de
    un subordinador: con y(0) > 0 ambos lados difieren en [0, y(0)).

    Raises:
        PathDomainError: Si y no es real o y(0) != 0
    """
    if y.dim != 1 or y.values[0, 0] != 0.0:
        raise PathDomainError(f"la identidad de inversas necesita y real con y(0) = 0 (y(0)={y.values[0].tolist()})")
    left = inverse_of_composed(y)
    right = phi(y, y)
    return left, right, common_domain(left, right)
