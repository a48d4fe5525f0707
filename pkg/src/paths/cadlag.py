#!/usr/bin/env python3
"""Representación exacta de trayectorias càdlàg en forma de nodos (knots)."""
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

HOLD = "hold"
LINEAR = "linear"
MODES = (HOLD, LINEAR)

# Centinela para inf(∅) en theta
INF = math.inf

Knot = Sequence  # (t, v, mode) o (t, v, "linear", end)
Vector = Union[float, Sequence[float], np.ndarray]


class PathDomainError(ValueError):
    """Se lanza cuando un tiempo o un nodo cae fuera del dominio de la trayectoria."""
    pass


@dataclass(frozen=True, eq=False)
class JumpRecord:
    """
    Salto de una trayectoria.

    Atributos:
        time: Instante del salto
        left_value: x(t-)
        right_value: x(t)
        magnitude: ‖x(t) - x(t-)‖ en norma del supremo
    """
    time: float
    left_value: np.ndarray
    right_value: np.ndarray
    magnitude: float

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, JumpRecord):
            return NotImplemented
        return (
            self.time == other.time
            and np.array_equal(self.left_value, other.left_value)
            and np.array_equal(self.right_value, other.right_value)
            and self.magnitude == other.magnitude
        )

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"JumpRecord(time={self.time}, {self.left_value.tolist()} -> "
            f"{self.right_value.tolist()}, magnitude={self.magnitude})"
        )


def _as_vector(value: Vector, dim: Optional[int] = None) -> np.ndarray:
    vec = np.atleast_1d(np.asarray(value, dtype=np.float64))
    if vec.ndim != 1:
        raise PathDomainError(f"valor con forma inválida {vec.shape}")
    if dim is not None and vec.shape[0] != dim:
        raise PathDomainError(f"dimensión {vec.shape[0]} distinta de {dim}")
    if not np.all(np.isfinite(vec)):
        raise PathDomainError(f"valor no finito {vec.tolist()}")
    return vec


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class CadlagPath:
    """
    Trayectoria càdlàg en [0, horizon] con un número finito de nodos.

    El segmento i cubre [t_i, t_{i+1}) (el último, [t_k, horizon]). En modo
    hold vale v_i; en modo linear interpola desde v_i hasta su valor final,
    que por defecto es v_{i+1} y puede darse de forma explícita (necesario
    cuando tras un tramo lineal hay un salto). Los predicados estructurales
    (constancia, saltos) usan igualdad exacta de los valores almacenados.

    Con open_right=True el valor en el horizonte no está determinado (caso de
    las inversas generalizadas a horizonte finito).
    """

    __slots__ = (
        "times", "values", "modes", "ends", "horizon", "open_right",
        "_constant", "_linear", "_jumps", "_has_jump",
    )

    def __init__(self, knots: Iterable[Knot], horizon: float, open_right: bool = False):
        times, values, modes, explicit_ends = [], [], [], {}
        dim = None
        for idx, knot in enumerate(knots):
            if len(knot) not in (3, 4):
                raise PathDomainError(f"nodo {idx} mal formado: {knot!r}")
            t, v, mode = knot[0], knot[1], knot[2]
            vec = _as_vector(v, dim)
            dim = vec.shape[0]
            if mode not in MODES:
                raise PathDomainError(f"modo de segmento desconocido '{mode}' en nodo {idx}")
            if len(knot) == 4 and knot[3] is not None:
                if mode != LINEAR:
                    raise PathDomainError(f"solo los segmentos lineales admiten valor final (nodo {idx})")
                explicit_ends[idx] = _as_vector(knot[3], dim)
            times.append(float(t))
            values.append(vec)
            modes.append(mode)

        if not times:
            raise PathDomainError("una trayectoria necesita al menos un nodo")
        self._setup(np.array(times), np.vstack(values), tuple(modes), explicit_ends,
                    float(horizon), bool(open_right))

    @classmethod
    def from_arrays(
        cls,
        times: Sequence[float],
        values: np.ndarray,
        modes: Union[str, Sequence[str]],
        horizon: float,
        ends: Optional[np.ndarray] = None,
        open_right: bool = False,
    ) -> "CadlagPath":
        """
        Construir desde arrays. `ends` puede contener filas NaN para usar el valor por defecto.
        """
        times = np.asarray(times, dtype=np.float64)
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if isinstance(modes, str):
            modes = (modes,) * len(times)
        explicit_ends = {}
        if ends is not None:
            ends = np.asarray(ends, dtype=np.float64)
            if ends.ndim == 1:
                ends = ends[:, None]
            for idx in np.flatnonzero(~np.any(np.isnan(ends), axis=1)):
                explicit_ends[int(idx)] = ends[idx].copy()
        obj = cls.__new__(cls)
        obj._setup(times.copy(), values.copy(), tuple(modes), explicit_ends,
                   float(horizon), bool(open_right))
        return obj

    def _setup(self, times, values, modes, explicit_ends, horizon, open_right):
        k = len(times)
        if values.shape[0] != k or len(modes) != k:
            raise PathDomainError("times, values y modes deben tener la misma longitud")
        if not np.all(np.isfinite(values)) or not np.all(np.isfinite(times)):
            raise PathDomainError("nodos con valores no finitos")
        if times[0] != 0.0:
            raise PathDomainError(f"el primer nodo debe estar en t=0 (t0={times[0]})")
        if k > 1 and not np.all(np.diff(times) > 0):
            raise PathDomainError("los tiempos de los nodos deben ser estrictamente crecientes")
        if not (math.isfinite(horizon) and horizon >= times[-1]):
            raise PathDomainError(f"horizon={horizon} anterior al último nodo {times[-1]}")
        for mode in modes:
            if mode not in MODES:
                raise PathDomainError(f"modo de segmento desconocido '{mode}'")

        ends = values.copy()
        for i, mode in enumerate(modes):
            if mode != LINEAR:
                continue
            if i in explicit_ends:
                ends[i] = explicit_ends[i]
            elif i + 1 < k:
                ends[i] = values[i + 1]
            elif horizon > times[-1]:
                raise PathDomainError("el último segmento lineal necesita valor final explícito")
        # Segmento final degenerado [H, H]: se trata como hold
        if times[-1] == horizon:
            ends[-1] = values[-1]
            if modes[-1] == LINEAR:
                modes = modes[:-1] + (HOLD,)

        self.times = _frozen(times)
        self.values = _frozen(values)
        self.modes = modes
        self.ends = _frozen(ends)
        self.horizon = horizon
        self.open_right = open_right
        self._constant = _frozen(np.all(values == ends, axis=1))
        self._linear = _frozen(np.array([m == LINEAR for m in modes], dtype=bool))
        self._has_jump = _frozen(np.concatenate(
            [[False], np.any(ends[:-1] != values[1:], axis=1)]
        ))
        self._jumps = None

    # ------------------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def n_knots(self) -> int:
        return len(self.times)

    def knots(self) -> list[tuple]:
        """Lista de nodos (t, v, mode[, end]) reconstruible con el constructor."""
        out = []
        k = self.n_knots
        for i in range(k):
            t, v, mode = float(self.times[i]), self.values[i].tolist(), self.modes[i]
            if mode == LINEAR:
                default_end = self.values[i + 1] if i + 1 < k else None
                if default_end is None or not np.array_equal(default_end, self.ends[i]):
                    out.append((t, v, mode, self.ends[i].tolist()))
                    continue
            out.append((t, v, mode))
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CadlagPath):
            return NotImplemented
        return (
            self.horizon == other.horizon
            and self.open_right == other.open_right
            and self.modes == other.modes
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.ends, other.ends)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"{type(self).__name__}(dim={self.dim}, horizon={self.horizon}, "
            f"knots={self.n_knots}, open_right={self.open_right})"
        )

    # ------------------------------------------------------------------
    def _segment_of(self, ts: np.ndarray) -> np.ndarray:
        return np.maximum(np.searchsorted(self.times, ts, side="right") - 1, 0)

    def _segment_end_time(self, ks: np.ndarray) -> np.ndarray:
        nxt = np.minimum(ks + 1, self.n_knots - 1)
        return np.where(ks + 1 < self.n_knots, self.times[nxt], self.horizon)

    def _check_domain(self, ts: np.ndarray, allow_zero: bool = True) -> None:
        low_bad = ts < 0 if allow_zero else ts <= 0
        if np.any(low_bad) or np.any(ts > self.horizon) or np.any(np.isnan(ts)):
            lo = "[0" if allow_zero else "(0"
            raise PathDomainError(f"tiempo fuera de {lo}, {self.horizon}]")

    def _interpolate(self, ts: np.ndarray, ks: np.ndarray) -> np.ndarray:
        start = self.times[ks]
        stop = self._segment_end_time(ks)
        span = np.where(stop > start, stop - start, 1.0)
        frac = np.where(stop > start, (ts - start) / span, 0.0)
        v0 = self.values[ks]
        out = v0 + (self.ends[ks] - v0) * frac[:, None]
        out = np.where(self._linear[ks][:, None], out, v0)
        # Exactitud en los extremos de cada segmento
        out = np.where((ts == start)[:, None], v0, out)
        at_stop = (ts == stop) & (ts > start)
        return np.where(at_stop[:, None], self.ends[ks], out)

    def eval_many(self, ts: Sequence[float]) -> np.ndarray:
        """Evaluar x(t) en un array de tiempos. Devuelve array (m, dim)."""
        ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
        self._check_domain(ts)
        if self.open_right and np.any(ts == self.horizon):
            raise PathDomainError("valor en el horizonte no determinado (open_right)")
        return self._interpolate(ts, self._segment_of(ts))

    def eval(self, t: float) -> np.ndarray:
        """Devuelve x(t), exacto en los nodos."""
        return self.eval_many([t])[0]

    def left_limits_many(self, ts: Sequence[float]) -> np.ndarray:
        """Evaluar x(t-) en un array de tiempos de (0, horizon]."""
        ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
        self._check_domain(ts, allow_zero=False)
        ks = self._segment_of(ts)
        on_knot = self.times[ks] == ts
        prev = np.maximum(ks - 1, 0)
        # Fuera de los nodos x es continua: x(t-) coincide con la interpolación
        inner = self._interpolate(ts, ks)
        return np.where(on_knot[:, None], self.ends[prev], inner)

    def left_limit(self, t: float) -> np.ndarray:
        """Devuelve x(t-) para t en (0, horizon]."""
        return self.left_limits_many([t])[0]

    def _left_or_start(self, t: float) -> np.ndarray:
        # Convención x(0-) := x(0)
        return self.values[0] if t == 0 else self.left_limit(t)

    # ------------------------------------------------------------------
    def discontinuities(self) -> list[JumpRecord]:
        """Saltos de la trayectoria en orden creciente de tiempo."""
        if self._jumps is None:
            jumps = []
            for k in np.flatnonzero(self._has_jump):
                left, right = self.ends[k - 1], self.values[k]
                jumps.append(JumpRecord(
                    time=float(self.times[k]),
                    left_value=left,
                    right_value=right,
                    magnitude=float(np.max(np.abs(right - left))),
                ))
            self._jumps = jumps
        return list(self._jumps)

    def jump_times(self) -> np.ndarray:
        return self.times[self._has_jump]

    def is_jump_time(self, t: float) -> bool:
        k = int(self._segment_of(np.array([t]))[0])
        return bool(self.times[k] == t and self._has_jump[k])

    def large_jumps(self, eps: float, T: Optional[float] = None) -> list[JumpRecord]:
        """
        Conjunto G(eps) de saltos con magnitud >= eps hasta el tiempo T.

        Raises:
            PathDomainError: Si eps <= 0 o T > horizon
        """
        if not eps > 0:
            raise PathDomainError(f"eps debe ser > 0 (eps={eps})")
        T = self.horizon if T is None else T
        if T > self.horizon:
            raise PathDomainError(f"T={T} mayor que el horizonte {self.horizon}")
        return [j for j in self.discontinuities() if j.magnitude >= eps and j.time <= T]

    # ------------------------------------------------------------------
    def eta(self, t: float) -> float:
        """
        sup{s < t : x(s) != x(t)}, con sup(∅) := 0.

        Es el extremo izquierdo de la meseta máxima que termina en t.
        """
        value = self.eval(t)
        k = int(self._segment_of(np.array([t]))[0])
        if t > self.times[k] and not self._constant[k]:
            return float(t)
        while k > 0:
            j = k - 1
            if self._constant[j] and np.array_equal(self.values[j], value) \
                    and np.array_equal(self.ends[j], value):
                k = j
            else:
                break
        return float(self.times[k])

    def theta(self, t: float) -> float:
        """
        inf{s >= t : x(s) != x(t-)}, con x(0-) := x(0) e inf(∅) := +inf.
        """
        self._check_domain(np.array([t]))
        if self.open_right and t == self.horizon:
            raise PathDomainError("theta no determinado en el horizonte (open_right)")
        w = self._left_or_start(t)
        if not np.array_equal(self.eval(t), w):
            return float(t)
        k = int(self._segment_of(np.array([t]))[0])
        j = k
        while True:
            if not self._constant[j]:
                return float(t) if j == k else float(self.times[j])
            if j + 1 >= self.n_knots:
                return INF
            if not np.array_equal(self.values[j + 1], w):
                return float(self.times[j + 1])
            j += 1

    def is_constant_on(self, a: float, b: float) -> bool:
        """True si x toma un único valor en el intervalo abierto (a, b)."""
        if not a < b:
            raise PathDomainError(f"intervalo vacío ({a}, {b})")
        if a < 0 or b > self.horizon:
            raise PathDomainError(f"({a}, {b}) fuera de [0, {self.horizon}]")
        k = int(self._segment_of(np.array([a]))[0])
        ref = self.values[k]
        j = k
        while j < self.n_knots and (j == k or self.times[j] < b):
            if not self._constant[j] or not np.array_equal(self.values[j], ref):
                return False
            j += 1
        return True

    def is_nondecreasing(self) -> bool:
        if self.dim != 1:
            return False
        v, e = self.values[:, 0], self.ends[:, 0]
        return bool(np.all(e >= v) and np.all(v[1:] >= e[:-1]))

    # ------------------------------------------------------------------
    def to_dict(self) -> dict:
        data = {
            "dim": self.dim,
            "horizon": self.horizon,
            "knots": [list(k[:2]) + list(k[2:]) for k in self.knots()],
        }
        if self.open_right:
            data["open_right"] = True
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "CadlagPath":
        try:
            path = cls(
                [tuple(k) for k in data["knots"]],
                horizon=data["horizon"],
                open_right=data.get("open_right", False),
            )
        except (KeyError, TypeError) as e:
            raise PathDomainError(f"JSON de trayectoria mal formado: {e}") from e
        if "dim" in data and data["dim"] != path.dim:
            raise PathDomainError(f"dim={data['dim']} no coincide con los nodos ({path.dim})")
        return path


class MonotonePath(CadlagPath):
    """Trayectoria unidimensional no decreciente (T(t), D, T_n, y)."""

    __slots__ = ()

    def _setup(self, *args, **kwargs):
        super()._setup(*args, **kwargs)
        if not self.is_nondecreasing():
            raise PathDomainError("la trayectoria no es unidimensional y no decreciente")

    @classmethod
    def from_path(cls, path: CadlagPath) -> "MonotonePath":
        if isinstance(path, MonotonePath):
            return path
        return cls.from_arrays(path.times, path.values, path.modes, path.horizon,
                               ends=path.ends, open_right=path.open_right)


# ----------------------------------------------------------------------
# Constructores de conveniencia
# ----------------------------------------------------------------------
def step_path(times: Sequence[float], values: Sequence[Vector], horizon: float) -> CadlagPath:
    """Trayectoria escalonada (modo hold) con nodos (times[i], values[i])."""
    return CadlagPath([(t, v, HOLD) for t, v in zip(times, values)], horizon)


def linear_path(times: Sequence[float], values: Sequence[Vector], horizon: float) -> CadlagPath:
    """Poligonal continua por los puntos dados; el último debe caer en el horizonte."""
    if times[-1] != horizon:
        raise PathDomainError("linear_path necesita un último nodo en el horizonte")
    return CadlagPath([(t, v, LINEAR) for t, v in zip(times, values)], horizon)


def restrict(path: CadlagPath, T: float) -> CadlagPath:
    """Restricción x|[0, T] en forma de nodos."""
    if not 0 <= T <= path.horizon:
        raise PathDomainError(f"T={T} fuera de [0, {path.horizon}]")
    keep = int(np.searchsorted(path.times, T, side="right"))
    ends = np.full_like(path.values[:keep], np.nan)
    ends[:keep] = path.ends[:keep]
    last = keep - 1
    if path.modes[last] == LINEAR and path.times[last] < T:
        ends[last] = path.left_limit(T)
    open_right = path.open_right and T == path.horizon
    cls = type(path)
    return cls.from_arrays(path.times[:keep], path.values[:keep], path.modes[:keep], T,
                           ends=ends, open_right=open_right)


def graph_vertices(path: CadlagPath, T: Optional[float] = None) -> np.ndarray:
    """
    Vértices de la poligonal del grafo completado en [0, T], columnas (z..., t).

    Cada nodo aporta (x(t-), t) y, si hay salto, también (x(t), t); se añade
    el vértice final en T si T no es un nodo. Para trayectorias open_right el
    último vértice usa el límite por la izquierda.
    """
    if T is not None and T != path.horizon:
        path = restrict(path, T)
    d = path.dim
    rows = [np.append(path.values[0], path.times[0])]
    for k in range(1, path.n_knots):
        t = path.times[k]
        rows.append(np.append(path.ends[k - 1], t))
        if path._has_jump[k]:
            rows.append(np.append(path.values[k], t))
    if path.horizon > path.times[-1]:
        rows.append(np.append(path.ends[-1], path.horizon))
    out = np.vstack(rows).reshape(-1, d + 1)
    return out


def sample(path: CadlagPath, mesh: float, T: Optional[float] = None) -> pd.DataFrame:
    """Muestrear la trayectoria en una malla regular (para exportar a CSV)."""
    if not mesh > 0:
        raise PathDomainError(f"mesh debe ser > 0 (mesh={mesh})")
    T = path.horizon if T is None else T
    grid = np.arange(0.0, T, mesh)
    if not path.open_right or T < path.horizon:
        grid = np.append(grid, T)
    values = path.eval_many(grid)
    frame = pd.DataFrame(values, columns=[f"v{i + 1}" for i in range(path.dim)])
    frame.insert(0, "t", grid)
    return frame


def save_path(path: CadlagPath, file_path: Union[str, Path]) -> None:
    file_path = Path(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    with file_path.open("w", encoding="utf-8") as f:
        json.dump(path.to_dict(), f, indent=2)
    logger.debug(f"Trayectoria guardada en {file_path}")


def load_path(file_path: Union[str, Path]) -> CadlagPath:
    """Cargar una trayectoria desde JSON. Lanza PathDomainError si el fichero es inválido."""
    file_path = Path(file_path)
    try:
        with file_path.open(encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise PathDomainError(f"fichero de trayectoria no encontrado: {file_path}")
    except json.JSONDecodeError as e:
        raise PathDomainError(f"{file_path} no es JSON válido: {e}") from e
    return CadlagPath.from_dict(data)
