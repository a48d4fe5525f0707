#!/usr/bin/env python3
"""
Certificados de convergencia M1 mediante subconjuntos ordenados.

Un certificado para x_n -> x a nivel eps consiste en un subconjunto ordenado
A de Γ_x con d̂(A, Γ_x) < eps y subconjuntos A_n de Γ_{x_n} del mismo
cardinal tales que d̂(A_n, Γ_{x_n}) < eps y d*(A, A_n) < eps para todo
n >= n1. La construcción y la comprobación son independientes.
"""
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd

from src.paths.cadlag import CadlagPath, PathDomainError
from src.paths.transforms import stairs
from src.metrics.graph import (
    CompletedGraph,
    InvalidSubsetError,
    OrderedSubset,
    check_mesh,
    completed_graph,
    order_consistent_distance,
    ordered_subset,
    subset_distance,
    subset_from_positions,
    sup_norm,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class M1Certificate:
    """
    Certificado de convergencia M1.

    Atributos:
        epsilon: Nivel eps > 0
        T: Instante final del intervalo [0, T]
        A: Subconjunto ordenado de Γ_x
        subsets: A_n por índice (posición 0 para n = 1); None donde no se encontró
        n1: Primer índice (base 1) desde el que todos los A_n existen, o None
        jump_matches: Por índice, pares (τ, τ_n) de jump_correspondence
    """
    epsilon: float
    T: float
    A: OrderedSubset
    subsets: list = field(default_factory=list)
    n1: Optional[int] = None
    jump_matches: list = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.n1 is not None

    @property
    def m(self) -> int:
        return self.A.m

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "T": self.T,
            "found": self.found,
            "n1": self.n1,
            "m": self.m,
            "A": self.A.to_list(),
            "subsets": [None if s is None else s.to_list() for s in self.subsets],
            "jump_matches": [[list(pair) for pair in pairs] for pairs in self.jump_matches],
        }

    def save(self, file_path: Union[str, Path]) -> None:
        file_path = Path(file_path)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        with file_path.open("w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2)
        logger.info(f"Certificado guardado en {file_path}")


def common_horizon(paths: Sequence[CadlagPath], T: Optional[float], mesh: float) -> float:
    """T admisible para todas las trayectorias: no es salto de ninguna."""
    limit = min(p.horizon for p in paths)
    T = limit if T is None else float(T)
    if T > limit:
        raise PathDomainError(f"T={T} fuera del horizonte común {limit}")
    candidate = T
    while any(p.is_jump_time(candidate) for p in paths):
        candidate = (math.floor(candidate / mesh) + 1) * mesh
        if candidate > limit:
            logger.warning(f"No hay T admisible tras {T}; se mantiene T={T}")
            return T
    return candidate


def _window_limits(points: np.ndarray, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """
    far[j]: primer k > j con ‖Q_k - Q_j‖ >= eps (o len).
    back[j]: último k < j con ‖Q_k - Q_j‖ >= eps (o -1).
    """
    n = len(points)
    far = np.full(n, n)
    back = np.full(n, -1)
    for j in range(n):
        dist = sup_norm(points[j + 1:] - points[j])
        hit = np.flatnonzero(dist >= eps)
        if hit.size:
            far[j] = j + 1 + hit[0]
        dist = sup_norm(points[:j] - points[j])
        hit = np.flatnonzero(dist >= eps)
        if hit.size:
            back[j] = hit[-1]
    return far, back


def match_subset(
    A: OrderedSubset,
    graph: CompletedGraph,
    eps: float,
    candidate_mesh: float,
) -> Optional[OrderedSubset]:
    """
    Buscar A_n ⊂ Γ_{x_n} con el cardinal de A, d*(A, A_n) < eps y d̂(A_n, Γ_{x_n}) < eps.

    Programación dinámica monótona sobre los puntos refinados Q de Γ_{x_n}:
    a_i solo puede ir a un Q_j a distancia < eps, y el salto de Q_j a Q_j'
    solo se admite si todos los Q entre ambos están a distancia < eps de los
    dos extremos. Se permiten repeticiones (relleno). En empates se elige el
    candidato más temprano.

    Returns:
        El subconjunto encontrado o None
    """
    Q, positions = graph.refine(candidate_mesh)
    far, back = _window_limits(Q, eps)
    last = len(Q) - 1
    m = A.m

    allowed = [np.flatnonzero(sup_norm(Q - a) < eps) for a in A.points]
    if allowed[0].size == 0 or allowed[0][0] != 0 or last not in set(allowed[-1].tolist()):
        return None
    allowed[0] = np.array([0])
    allowed[-1] = np.array([last])

    reach = [np.zeros(len(Q), dtype=bool) for _ in range(m + 1)]
    reach[0][0] = True
    for i in range(m):
        prev = reach[i]
        for jp in allowed[i + 1]:
            lo = back[jp] + 1
            window = np.flatnonzero(prev[lo:jp + 1]) + lo
            if window.size and np.any(far[window] > jp):
                reach[i + 1][jp] = True
        if not reach[i + 1].any():
            return None
    if not reach[m][last]:
        return None

    chosen = np.empty(m + 1, dtype=int)
    chosen[m] = last
    for i in range(m - 1, -1, -1):
        jp = chosen[i + 1]
        lo = back[jp] + 1
        window = np.flatnonzero(reach[i][lo:jp + 1]) + lo
        window = window[far[window] > jp]
        chosen[i] = window[0]
    return subset_from_positions(graph, positions[chosen])


def jump_correspondence(
    x: CadlagPath,
    xn: CadlagPath,
    eps: float,
    T: Optional[float] = None,
) -> list[tuple[float, Optional[float]]]:
    """
    Emparejar cada salto de G(eps) de x con el salto de x_n más cercano en tiempo.

    Los candidatos son los saltos de x_n de magnitud >= eps/2 hasta T; solo
    se acepta uno a distancia temporal <= eps. Ante un empate gana el salto
    anterior.

    Returns:
        Lista (τ, τ_n) en orden de τ; τ_n es None si no hay candidato
    """
    eps = check_mesh(eps)
    T = min(x.horizon, xn.horizon) if T is None else float(T)
    candidates = np.array([j.time for j in xn.large_jumps(eps / 2.0, min(T, xn.horizon))])
    pairs = []
    for jump in x.large_jumps(eps, T):
        if candidates.size == 0:
            pairs.append((jump.time, None))
            continue
        gaps = np.abs(candidates - jump.time)
        # argmin devuelve la primera posición: el salto anterior en un empate
        best = int(np.argmin(gaps))
        pairs.append((jump.time, float(candidates[best]) if gaps[best] <= eps else None))
    return pairs


def build_m1_certificate(
    x: CadlagPath,
    xs: Sequence[CadlagPath],
    eps: float,
    T: Optional[float] = None,
    candidate_mesh: Optional[float] = None,
) -> M1Certificate:
    """
    Construir un certificado M1 para xs -> x a nivel eps.

    A se obtiene refinando Γ_x a paso eps/3; así contiene todos los vértices
    del grafo, en particular los extremos (x(τ-), τ), (x(τ), τ) de cada salto
    de G(eps) y los inicios de sus escaleras. El fallo se devuelve como
    valor (n1 = None).

    Cada A_n se busca con match_subset, una DP monótona sobre Γ_{x_n}
    refinado que entre los candidatos admisibles elige siempre el más
    temprano. Todo A_n encontrado sitúa la imagen de los extremos de cada
    salto τ de G(eps) a menos de eps en tiempo. La correspondencia de
    saltos (el más cercano en tiempo dentro de eps, empates al anterior) no
    restringe la DP: se calcula aparte con jump_correspondence y se guarda
    en jump_matches.

    Args:
        x: Trayectoria límite
        xs: Sucesión x_1, x_2, ...
        eps: Nivel del certificado
        T: Instante final
        candidate_mesh: Paso de refinado de los Γ_{x_n} (por defecto eps/8)

    Returns:
        M1Certificate
    """
    eps = check_mesh(eps)
    candidate_mesh = eps / 8.0 if candidate_mesh is None else check_mesh(candidate_mesh)
    T = common_horizon([x, *xs], T, eps / 3.0)
    graph = completed_graph(x, T)
    _, positions = graph.refine(eps / 3.0)
    A = subset_from_positions(graph, positions)

    subsets, jump_matches = [], []
    for n, xn in enumerate(xs, start=1):
        found = match_subset(A, completed_graph(xn, T), eps, candidate_mesh)
        subsets.append(found)
        jump_matches.append(jump_correspondence(x, xn, eps, T))
        logger.debug(f"certificado eps={eps}: n={n} {'ok' if found is not None else 'sin A_n'}")

    n1 = None
    for idx in range(len(subsets), 0, -1):
        if subsets[idx - 1] is None:
            break
        n1 = idx
    logger.info(f"Certificado M1 eps={eps}: m={A.m}, n1={n1}")
    return M1Certificate(epsilon=eps, T=T, A=A, subsets=subsets, n1=n1, jump_matches=jump_matches)


def check_certificate(cert: M1Certificate, x: CadlagPath, xs: Sequence[CadlagPath]) -> bool:
    """
    Verificar las tres desigualdades del certificado para todo n >= n1.

    Revalida cada subconjunto contra su grafo; no reutiliza nada de la
    construcción.

    Raises:
        InvalidSubsetError: Si A o algún A_n no es un subconjunto ordenado válido
    """
    if cert.n1 is None:
        return False
    eps = cert.epsilon
    graph = completed_graph(x, cert.T)
    A = ordered_subset(graph, cert.A.points)
    if not order_consistent_distance(A, graph) < eps:
        return False
    if len(cert.subsets) < len(xs):
        return False
    for n in range(cert.n1, len(xs) + 1):
        given = cert.subsets[n - 1]
        if given is None:
            return False
        graph_n = completed_graph(xs[n - 1], cert.T)
        An = ordered_subset(graph_n, given.points)
        if len(An) != len(A):
            raise InvalidSubsetError(f"A_{n} tiene {len(An)} puntos y A {len(A)}")
        if not order_consistent_distance(An, graph_n) < eps:
            return False
        if not subset_distance(A, An) < eps:
            return False
    return True


def stair_hypotheses(
    x: CadlagPath,
    xs: Sequence[CadlagPath],
    t: float,
) -> pd.DataFrame:
    """
    Para la escalera de x que contiene t, comparar con la escalera más cercana de cada x_n.

    Columnas: n, eta_gap, theta_gap, jump_gap. Las tres deben tender a 0 para
    que la transformación f conserve la convergencia.

    Raises:
        PathDomainError: Si t no está en el interior de una escalera de x
    """
    target = next((s for s in stairs(x) if s.eta < t < s.theta), None)
    if target is None:
        raise PathDomainError(f"t={t} no está dentro de una escalera de x")
    jump = np.subtract(target.closing_value, target.value)
    rows = []
    for n, xn in enumerate(xs, start=1):
        candidates = stairs(xn)
        if not candidates:
            rows.append({"n": n, "eta_gap": np.nan, "theta_gap": np.nan, "jump_gap": np.nan})
            continue
        best = min(candidates, key=lambda s: (max(abs(s.eta - target.eta), abs(s.theta - target.theta)), s.eta))
        jump_n = np.subtract(best.closing_value, best.value)
        rows.append({
            "n": n,
            "eta_gap": abs(best.eta - target.eta),
            "theta_gap": abs(best.theta - target.theta),
            "jump_gap": float(np.max(np.abs(jump_n - jump))),
        })
    return pd.DataFrame(rows, columns=["n", "eta_gap", "theta_gap", "jump_gap"])
