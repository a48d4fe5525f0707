#!/usr/bin/env python3
"""
Distancias entre trayectorias càdlàg: uniforme, Skorokhod M1 y J1.

Las distancias de Skorokhod se devuelven como horquillas (lower, upper):
la optimización sobre parametrizaciones o cambios de tiempo es de
dimensión infinita y solo se acota por ambos lados.
"""
import logging
import math
from typing import NamedTuple, Optional

import numpy as np
import pandas as pd
from scipy.spatial.distance import cdist

from src.paths.cadlag import HOLD, CadlagPath, PathDomainError
from src.metrics.graph import check_mesh, completed_graph, hausdorff_lower, sup_norm

logger = logging.getLogger(__name__)


class Bracket(NamedTuple):
    """Horquilla [lower, upper] que contiene la distancia exacta."""
    lower: float
    upper: float

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack


def uniform_distance(x1: CadlagPath, x2: CadlagPath, T: Optional[float] = None) -> float:
    """
    sup_{t <= T} ‖x1(t) - x2(t)‖, exacto.

    Entre nodos consecutivos (de ambas trayectorias) la diferencia es afín,
    así que basta con mirar valores y límites por la izquierda en los nodos
    y en T.
    """
    T = min(x1.horizon, x2.horizon) if T is None else float(T)
    ts = np.union1d(x1.times[x1.times <= T], x2.times[x2.times <= T])
    ts = np.union1d(ts, [T])
    open_at_T = (x1.open_right and T == x1.horizon) or (x2.open_right and T == x2.horizon)
    closed = ts[ts < T] if open_at_T else ts
    worst = 0.0
    if closed.size:
        worst = float(np.max(sup_norm(x1.eval_many(closed) - x2.eval_many(closed))))
    positive = ts[ts > 0]
    if positive.size:
        lefts = x1.left_limits_many(positive) - x2.left_limits_many(positive)
        worst = max(worst, float(np.max(sup_norm(lefts))))
    return worst


def admissible_horizon(x1: CadlagPath, x2: CadlagPath, T: Optional[float], mesh: float) -> float:
    """
    Sustituir T por el siguiente punto de la malla que no sea salto de x1 ni de x2.

    Si no hay ninguno antes del horizonte común se conserva T.
    """
    limit = min(x1.horizon, x2.horizon)
    T = limit if T is None else float(T)
    if T > limit:
        raise PathDomainError(f"T={T} fuera del horizonte común {limit}")
    candidate = T
    while x1.is_jump_time(candidate) or x2.is_jump_time(candidate):
        candidate = (math.floor(candidate / mesh) + 1) * mesh
        if candidate > limit:
            logger.warning(f"T={T} es un salto y no hay punto de malla admisible antes de {limit}")
            return T
    if candidate != T:
        logger.debug(f"T={T} es un instante de salto; se usa T={candidate}")
    return candidate


def bottleneck_dp(
    state: np.ndarray,
    step_i: Optional[np.ndarray] = None,
    step_j: Optional[np.ndarray] = None,
    step_ij: Optional[np.ndarray] = None,
) -> float:
    """
    Programación dinámica de cuello de botella sobre una rejilla P x Q.

    C[i, j] = max(state[i, j], min(C[i-1, j] ∨ step_i, C[i, j-1] ∨ step_j,
    C[i-1, j-1] ∨ step_ij)), recorriendo antidiagonales para vectorizar.
    Sin costes de paso es la recurrencia de la distancia de Fréchet discreta.
    """
    p, q = state.shape
    zeros = None
    if step_i is None or step_j is None or step_ij is None:
        zeros = np.zeros_like(state)
    step_i = zeros if step_i is None else step_i
    step_j = zeros if step_j is None else step_j
    step_ij = zeros if step_ij is None else step_ij

    cost = np.full((p, q), np.inf)
    cost[0, 0] = state[0, 0]
    for k in range(1, p + q - 1):
        i = np.arange(max(0, k - q + 1), min(k, p - 1) + 1)
        j = k - i
        best = np.full(i.shape, np.inf)
        has_i = i >= 1
        has_j = j >= 1
        both = has_i & has_j
        best[has_i] = np.maximum(cost[i[has_i] - 1, j[has_i]], step_i[i[has_i], j[has_i]])
        from_j = np.maximum(cost[i[has_j], j[has_j] - 1], step_j[i[has_j], j[has_j]])
        best[has_j] = np.minimum(best[has_j], from_j)
        from_ij = np.maximum(cost[i[both] - 1, j[both] - 1], step_ij[i[both], j[both]])
        best[both] = np.minimum(best[both], from_ij)
        cost[i, j] = np.maximum(state[i, j], best)
    return float(cost[-1, -1])


def discrete_frechet(P: np.ndarray, Q: np.ndarray) -> float:
    """Distancia de Fréchet discreta entre dos sucesiones de vértices, en norma del supremo."""
    if len(P) == 0 or len(Q) == 0:
        raise ValueError("las poligonales no pueden estar vacías")
    return bottleneck_dp(cdist(P, Q, metric="chebyshev"))


def m1_distance(
    x1: CadlagPath,
    x2: CadlagPath,
    T: Optional[float] = None,
    mesh: float = 0.01,
) -> Bracket:
    """
    Horquilla de la distancia M1 (fuerte) en [0, T].

    La cota superior es la distancia de Fréchet discreta entre los grafos
    completados refinados a paso `mesh`; la inferior es el máximo entre
    esa cantidad menos `mesh` y una cota inferior de Hausdorff.

    Args:
        x1, x2: Trayectorias de la misma dimensión
        T: Instante final; si es un salto se desplaza al siguiente punto de malla
        mesh: Longitud máxima de arista tras el refinado

    Returns:
        Bracket(lower, upper) con upper - lower <= mesh

    Raises:
        MeshError: Si mesh <= 0
    """
    mesh = check_mesh(mesh)
    if x1.dim != x2.dim:
        raise PathDomainError(f"dimensiones distintas: {x1.dim} y {x2.dim}")
    T = admissible_horizon(x1, x2, T, mesh)
    g1, g2 = completed_graph(x1, T), completed_graph(x2, T)
    if g1.n_vertices == g2.n_vertices and np.array_equal(g1.vertices, g2.vertices):
        return Bracket(0.0, 0.0)
    p1, _ = g1.refine(mesh)
    p2, _ = g2.refine(mesh)
    upper = discrete_frechet(p1, p2)
    lower = max(upper - mesh, hausdorff_lower(g1, g2, mesh), 0.0)
    logger.debug(f"m1_distance: {len(p1)}x{len(p2)} puntos, [{lower:.6g}, {upper:.6g}]")
    return Bracket(min(lower, upper), upper)


# ----------------------------------------------------------------------
# J1
# ----------------------------------------------------------------------
def _is_step(path: CadlagPath) -> bool:
    return bool(np.all(path._constant))


def step_approximation(path: CadlagPath, T: float, mesh: float) -> tuple[CadlagPath, float]:
    """
    Aproximar por una trayectoria escalonada en una malla que contiene los nodos.

    Cada celda se subdivide hasta que la variación de la trayectoria en ella
    no supera mesh/2.

    Returns:
        (trayectoria escalonada en [0, T], error uniforme exacto)
    """
    knots = path.times[path.times < T]
    bounds = np.append(knots, T)
    grid = [np.array([0.0])]
    for i in range(len(knots)):
        lo, hi = bounds[i], bounds[i + 1]
        if path._constant[i]:
            grid.append(np.array([hi]))
            continue
        var = float(sup_norm(path.left_limit(hi) - path.values[i]))
        pieces = max(1, math.ceil(var / (mesh / 2.0)))
        grid.append(np.linspace(lo, hi, pieces + 1)[1:])
    grid = np.unique(np.concatenate(grid))
    grid = grid[grid <= T]
    if path.open_right and T == path.horizon:
        values = np.vstack([path.eval_many(grid[:-1]), path.left_limit(T)[None, :]])
    else:
        values = path.eval_many(grid)
    steps = CadlagPath.from_arrays(grid, values, HOLD, T)
    if len(grid) > 1:
        cell_var = sup_norm(path.left_limits_many(grid[1:]) - values[:-1])
        error = float(np.max(cell_var))
    else:
        error = 0.0
    return steps, error


def _jump_data(path: CadlagPath, T: float) -> tuple[np.ndarray, np.ndarray]:
    """Tiempos de salto en (0, T] y valores de las mesetas."""
    keep = path.times <= T
    times = path.times[keep]
    values = path.values[keep]
    jumps = path._has_jump[keep]
    jumps[0] = True
    return times[jumps][1:], values[jumps]


def j1_step_distance(x1: CadlagPath, x2: CadlagPath, T: float) -> float:
    """
    Distancia J1 exacta entre trayectorias escalonadas en [0, T].

    Programación dinámica sobre los emparejamientos de saltos: el estado
    (i, j) muestra simultáneamente la meseta i de x1 y la j de x2. Un paso
    en i coloca el salto a_i de x1 entre b_j y b_{j+1}; un paso en j coloca
    b_j entre a_i y a_{i+1}; un paso diagonal empareja a_i con b_j.
    """
    a, v1 = _jump_data(x1, T)
    b, v2 = _jump_data(x2, T)
    state = cdist(v1, v2, metric="chebyshev")
    a_ext = np.concatenate([[0.0], a, [T]])
    b_ext = np.concatenate([[0.0], b, [T]])

    def interval_gap(points, lo, hi):
        return np.maximum(np.maximum(lo - points, points - hi), 0.0)

    ii, jj = np.meshgrid(np.arange(len(v1)), np.arange(len(v2)), indexing="ij")
    # Saltos de x1: a_i (i >= 1) cae en [b_j, b_{j+1}]
    step_i = interval_gap(a_ext[ii], b_ext[jj], b_ext[jj + 1])
    step_j = interval_gap(b_ext[jj], a_ext[ii], a_ext[ii + 1])
    step_ij = np.abs(a_ext[ii] - b_ext[jj])
    return bottleneck_dp(state, step_i, step_j, step_ij)


def j1_distance(
    x1: CadlagPath,
    x2: CadlagPath,
    T: Optional[float] = None,
    mesh: float = 0.01,
) -> Bracket:
    """
    Horquilla de la distancia J1 en [0, T].

    Para trayectorias escalonadas el valor es exacto. En otro caso se
    aproximan ambas por escalones con error uniforme e1, e2 y se usa
    |d(x1, x2) - d(s1, s2)| <= e1 + e2; la cota inferior se mejora con la
    de M1, que nunca supera a J1.

    Raises:
        MeshError: Si mesh <= 0
    """
    mesh = check_mesh(mesh)
    if x1.dim != x2.dim:
        raise PathDomainError(f"dimensiones distintas: {x1.dim} y {x2.dim}")
    T = admissible_horizon(x1, x2, T, mesh)
    if _is_step(x1) and _is_step(x2):
        value = j1_step_distance(x1, x2, T)
        return Bracket(value, value)

    s1, e1 = step_approximation(x1, T, mesh)
    s2, e2 = step_approximation(x2, T, mesh)
    core = j1_step_distance(s1, s2, T)
    m1 = m1_distance(x1, x2, T, mesh)
    lower = max(core - e1 - e2, m1.lower, 0.0)
    upper = core + e1 + e2
    logger.debug(f"j1_distance: errores de escalonado {e1:.3g}, {e2:.3g}")
    return Bracket(min(lower, upper), upper)


def distance_table(
    pairs: list[tuple[int, CadlagPath, CadlagPath]],
    metric: str = "m1",
    T: Optional[float] = None,
    mesh: float = 0.01,
) -> pd.DataFrame:
    """Tabla (n, lower, upper) para una sucesión de pares; se exporta a CSV."""
    funcs = {"m1": m1_distance, "j1": j1_distance}
    if metric not in funcs and metric != "uniform":
        raise ValueError(f"métrica desconocida '{metric}' (m1, j1, uniform)")
    rows = []
    for n, x1, x2 in pairs:
        if metric == "uniform":
            value = uniform_distance(x1, x2, T)
            rows.append({"n": n, "lower": value, "upper": value})
            continue
        bracket = funcs[metric](x1, x2, T, mesh)
        rows.append({"n": n, "lower": bracket.lower, "upper": bracket.upper})
    return pd.DataFrame(rows, columns=["n", "lower", "upper"])
