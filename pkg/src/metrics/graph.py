#!/usr/bin/env python3
"""Grafo completado Γ_x, su orden total y subconjuntos ordenados (d̂, d*)."""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.paths.cadlag import CadlagPath, graph_vertices

logger = logging.getLogger(__name__)

# Tolerancia relativa para decidir si un punto está sobre la poligonal
LOCATE_TOL = 1e-12


class InvalidSubsetError(ValueError):
    """Se lanza cuando un punto no está en el grafo completado o el subconjunto no está ordenado."""
    pass


class SubsetSizeError(ValueError):
    """Se lanza cuando dos subconjuntos ordenados tienen distinto cardinal."""
    pass


class MeshError(ValueError):
    """Se lanza cuando el paso de discretización no es positivo."""
    pass


def sup_norm(a: np.ndarray, axis: int = -1) -> np.ndarray:
    return np.max(np.abs(a), axis=axis)


def check_mesh(mesh: float) -> float:
    if not mesh > 0:
        raise MeshError(f"mesh debe ser > 0 (mesh={mesh})")
    return float(mesh)


@dataclass(frozen=True, eq=False)
class CompletedGraph:
    """
    Poligonal del grafo completado en el espacio (valor, tiempo).

    Los vértices están en el orden del grafo: primero por tiempo y, a igual
    tiempo (segmento vertical de un salto), por distancia a x(t-). Un punto
    de la poligonal se identifica por su posición de arco k + s, con s en
    [0, 1] sobre la arista k, lo que reproduce ese mismo orden.
    """
    path: CadlagPath
    T: float
    vertices: np.ndarray

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1] - 1

    @property
    def start(self) -> np.ndarray:
        return self.vertices[0]

    @property
    def end(self) -> np.ndarray:
        return self.vertices[-1]

    def vertical_segments(self) -> int:
        return int(np.sum(np.diff(self.vertices[:, -1]) == 0))

    def edge_lengths(self) -> np.ndarray:
        return sup_norm(np.diff(self.vertices, axis=0))

    def point_at(self, positions: np.ndarray) -> np.ndarray:
        """Punto(s) de la poligonal en las posiciones de arco dadas."""
        positions = np.atleast_1d(np.asarray(positions, dtype=np.float64))
        last = self.n_vertices - 1
        k = np.clip(np.floor(positions).astype(int), 0, max(last - 1, 0))
        s = positions - k
        if last == 0:
            return np.repeat(self.vertices[:1], len(positions), axis=0)
        a, b = self.vertices[k], self.vertices[k + 1]
        out = a + (b - a) * s[:, None]
        # Exactitud en los vértices
        return np.where((s == 0)[:, None], a, np.where((s == 1)[:, None], b, out))

    def locate(self, points: np.ndarray) -> np.ndarray:
        """
        Posición de arco de cada punto (la menor si está en un vértice).

        Raises:
            InvalidSubsetError: Si algún punto no está sobre la poligonal
        """
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if points.shape[1] != self.vertices.shape[1]:
            raise InvalidSubsetError(
                f"los puntos tienen {points.shape[1]} coordenadas, el grafo {self.vertices.shape[1]}"
            )
        scale = max(1.0, float(np.max(np.abs(self.vertices))))
        tol = LOCATE_TOL * scale
        out = np.empty(len(points))
        if self.n_vertices == 1:
            ok = sup_norm(points - self.vertices[0]) <= tol
            if not np.all(ok):
                raise InvalidSubsetError("punto fuera del grafo completado")
            out[:] = 0.0
            return out

        a = self.vertices[:-1]
        delta = np.diff(self.vertices, axis=0)
        axis = np.argmax(np.abs(delta), axis=1)
        rows = np.arange(len(a))
        pivot = delta[rows, axis]
        for idx, p in enumerate(points):
            s = (p[axis] - a[rows, axis]) / pivot
            s = np.clip(s, 0.0, 1.0)
            residual = sup_norm(a + delta * s[:, None] - p)
            hits = np.flatnonzero(residual <= tol)
            if hits.size == 0:
                raise InvalidSubsetError(
                    f"el punto {p.tolist()} no está en el grafo completado "
                    f"(distancia {residual.min():.3e})"
                )
            out[idx] = np.min(hits + s[hits])
        return out

    def refine(self, mesh: float) -> tuple[np.ndarray, np.ndarray]:
        """
        Subdividir las aristas para que ninguna supere `mesh` en norma del supremo.

        Returns:
            (puntos, posiciones de arco)
        """
        mesh = check_mesh(mesh)
        if self.n_vertices == 1:
            return self.vertices.copy(), np.zeros(1)
        pieces = np.maximum(np.ceil(self.edge_lengths() / mesh).astype(int), 1)
        edge = np.repeat(np.arange(len(pieces)), pieces)
        first = np.concatenate([[0], np.cumsum(pieces)[:-1]])
        step = np.arange(edge.size) - first[edge]
        positions = np.concatenate([edge + step / pieces[edge], [self.n_vertices - 1.0]])
        return self.point_at(positions), positions


def completed_graph(path: CadlagPath, T: Optional[float] = None) -> CompletedGraph:
    """
    Construir Γ_x restringido a [0, T].

    Args:
        path: Trayectoria càdlàg
        T: Instante final (por defecto el horizonte)

    Returns:
        CompletedGraph con vértices (z..., t)
    """
    T = path.horizon if T is None else float(T)
    verts = graph_vertices(path, T)
    keep = np.concatenate([[True], np.any(verts[1:] != verts[:-1], axis=1)])
    return CompletedGraph(path=path, T=T, vertices=verts[keep])


# ----------------------------------------------------------------------
# Subconjuntos ordenados
# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class OrderedSubset:
    """Subconjunto ordenado A = {(z_i, t_i), i = 0..m} de un grafo completado."""
    points: np.ndarray
    positions: np.ndarray

    @property
    def m(self) -> int:
        return len(self.points) - 1

    def __len__(self) -> int:
        return len(self.points)

    def to_list(self) -> list[list[float]]:
        return self.points.tolist()


def ordered_subset(graph: CompletedGraph, points: np.ndarray) -> OrderedSubset:
    """
    Validar y construir un subconjunto ordenado de Γ_x.

    Raises:
        InvalidSubsetError: Si un punto está fuera del grafo, el orden no es
            monótono o los extremos no son (x(0), 0) y (x(T), T)
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if len(points) < 2 and graph.n_vertices > 1:
        raise InvalidSubsetError("un subconjunto ordenado necesita al menos dos puntos")
    positions = graph.locate(points)
    if np.any(np.diff(positions) < -1e-9):
        bad = int(np.flatnonzero(np.diff(positions) < -1e-9)[0])
        raise InvalidSubsetError(f"puntos {bad} y {bad + 1} fuera del orden del grafo")
    if positions[0] != 0.0:
        raise InvalidSubsetError("el subconjunto debe empezar en (x(0), 0)")
    if positions[-1] != graph.n_vertices - 1:
        raise InvalidSubsetError("el subconjunto debe terminar en (x(T), T)")
    return OrderedSubset(points=points, positions=np.maximum.accumulate(positions))


def subset_from_positions(graph: CompletedGraph, positions: np.ndarray) -> OrderedSubset:
    positions = np.asarray(positions, dtype=np.float64)
    return OrderedSubset(points=graph.point_at(positions), positions=positions)


def vertex_subset(graph: CompletedGraph) -> OrderedSubset:
    """Todos los vértices de Γ_x como subconjunto ordenado."""
    return subset_from_positions(graph, np.arange(graph.n_vertices, dtype=np.float64))


def order_consistent_distance(A: OrderedSubset, graph: CompletedGraph) -> float:
    """
    d̂(A, Γ_x): para cada par consecutivo, el supremo sobre los puntos del
    grafo entre ambos de la mayor distancia a los dos extremos.

    La función q -> max(‖q - a‖, ‖q - b‖) es convexa, así que el supremo
    sobre la poligonal se alcanza en a_i o en los vértices intermedios.
    """
    if A.positions[0] != 0.0 or A.positions[-1] != graph.n_vertices - 1:
        raise InvalidSubsetError("A no cubre el grafo de extremo a extremo")
    worst = 0.0
    for i in range(A.m):
        a, b = A.points[i], A.points[i + 1]
        pa, pb = A.positions[i], A.positions[i + 1]
        if pb <= pa:
            continue
        gap = float(sup_norm(a - b))
        lo, hi = int(np.floor(pa)) + 1, int(np.ceil(pb))
        if hi > lo:
            inner = graph.vertices[lo:hi]
            gap = max(gap, float(np.max(np.maximum(sup_norm(inner - a), sup_norm(inner - b)))))
        worst = max(worst, gap)
    return worst


def subset_distance(A: OrderedSubset, B: OrderedSubset) -> float:
    """d*(A, B) = max_i ‖a_i - b_i‖, con i de 0 a m."""
    if len(A) != len(B):
        raise SubsetSizeError(f"cardinales distintos: {len(A)} y {len(B)}")
    if A.points.shape[1] != B.points.shape[1]:
        raise SubsetSizeError("los subconjuntos viven en espacios de distinta dimensión")
    return float(np.max(sup_norm(A.points - B.points)))


# ----------------------------------------------------------------------
# Distancias punto-poligonal en norma del supremo
# ----------------------------------------------------------------------
def point_to_polyline(points: np.ndarray, vertices: np.ndarray, chunk: int = 512) -> np.ndarray:
    """
    Distancia exacta (norma del supremo) de cada punto a la poligonal.

    Sobre una arista a + s·Δ la distancia es convexa y lineal a trozos en s;
    el mínimo está en s = 0, s = 1 o donde se cruzan dos de las rectas
    ±(a_c - p_c + s·Δ_c).
    """
    points = np.atleast_2d(points)
    if len(vertices) == 1:
        return sup_norm(points - vertices[0])
    a = vertices[:-1]
    delta = np.diff(vertices, axis=0)
    n_coord = vertices.shape[1]
    pairs = [(c, e, sgn) for c in range(n_coord) for e in range(c, n_coord) for sgn in (1.0, -1.0)
             if not (c == e and sgn == 1.0)]
    out = np.empty(len(points))
    for lo in range(0, len(points), chunk):
        p = points[lo:lo + chunk]
        w = a[None, :, :] - p[:, None, :]
        cands = [np.zeros(w.shape[:2]), np.ones(w.shape[:2])]
        for c, e, sgn in pairs:
            den = delta[:, c] - sgn * delta[:, e]
            num = -(w[:, :, c] - sgn * w[:, :, e])
            with np.errstate(divide="ignore", invalid="ignore"):
                s = np.where(den != 0, num / np.where(den != 0, den, 1.0), 0.0)
            cands.append(np.clip(s, 0.0, 1.0))
        best = np.full(w.shape[:2], np.inf)
        for s in cands:
            dist = sup_norm(w + s[:, :, None] * delta[None, :, :])
            best = np.minimum(best, dist)
        out[lo:lo + chunk] = best.min(axis=1)
    return out


def hausdorff_lower(g1: CompletedGraph, g2: CompletedGraph, mesh: float) -> float:
    """
    Cota inferior de la distancia de Hausdorff entre dos grafos completados:
    distancias exactas desde los puntos refinados de cada poligonal a la otra.
    """
    p1, _ = g1.refine(mesh)
    p2, _ = g2.refine(mesh)
    forward = point_to_polyline(p1, g2.vertices).max()
    backward = point_to_polyline(p2, g1.vertices).max()
    return float(max(forward, backward))
