#!/usr/bin/env python3
"""
Paseos aleatorios en tiempo continuo (CTRW) sobre una red triangular.

Para cada índice de escala n se generan saltos Y_{n,k} = n^(-a)·Y_k y esperas
J_{n,k} = n^(-b)·J_k; S_n y T_n son sus sumas parciales en los nodos k/n.
A partir de ellas se construyen el CTRW R_n, el CTRW con sobrepaso y el CTRW
de trayectorias continuas (interpolación lineal entre renovaciones).
"""
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from src.paths.cadlag import HOLD, LINEAR, CadlagPath, MonotonePath, PathDomainError, restrict
from src.sim.samplers import JUMP_KINDS, WAIT_KINDS, ModelError, draw_jumps, draw_waits
from src.sim.streams import GENERATOR_ID, stream

logger = logging.getLogger(__name__)

PATH_KINDS = ("ctrw", "octrw", "cpctrw")
DEFAULT_MAX_DRAWS = 50_000_000


class GenerationOverflowError(RuntimeError):
    """Se lanza cuando T_n no supera el horizonte dentro del presupuesto de extracciones."""
    pass


def default_exponents(jump_dist: str, alpha: float, wait_dist: str, beta: float) -> tuple[float, float]:
    """Exponentes de escala habituales: n^(-1/α) para saltos y n^(-1/β) para esperas de cola pesada."""
    jump = 1.0 / alpha if jump_dist == "stable" else 0.5
    if jump_dist == "deterministic":
        jump = 1.0
    wait = 1.0 / beta if wait_dist in ("pareto", "stable") else 1.0
    return jump, wait


@dataclass(frozen=True)
class CtrwModel:
    """
    Modelo de la red triangular {(Y_{n,k}, J_{n,k})}.

    Atributos:
        jump_dist: gaussian | stable | deterministic | table
        jump_scale: Desviación típica, escala estable o valor fijo de Y
        alpha: Índice de estabilidad de los saltos (0, 2]
        wait_dist: exponential | pareto | stable | deterministic
        wait_scale: Media, escala o valor fijo de J
        beta: Índice de cola de las esperas
        jump_scale_exponent: a en Y_{n,k} = n^(-a)·Y_k
        wait_scale_exponent: b en J_{n,k} = n^(-b)·J_k
        dim: Dimensión d de los saltos
        jump_table: Valores para jump_dist = table
        max_draws: Presupuesto de esperas por par de renovación
    """
    jump_dist: str = "gaussian"
    jump_scale: float = 1.0
    alpha: float = 2.0
    wait_dist: str = "exponential"
    wait_scale: float = 1.0
    beta: float = 1.0
    jump_scale_exponent: float = 0.5
    wait_scale_exponent: float = 1.0
    dim: int = 1
    jump_table: tuple = ()
    max_draws: int = DEFAULT_MAX_DRAWS

    def __post_init__(self):
        if self.jump_dist not in JUMP_KINDS:
            raise ModelError(f"jump_dist desconocida '{self.jump_dist}' (opciones: {', '.join(JUMP_KINDS)})")
        if self.wait_dist not in WAIT_KINDS:
            raise ModelError(f"wait_dist desconocida '{self.wait_dist}' (opciones: {', '.join(WAIT_KINDS)})")
        if self.jump_dist == "stable" and not 0 < self.alpha <= 2:
            raise ModelError(f"alpha debe estar en (0, 2] (alpha={self.alpha})")
        if self.wait_dist == "stable" and not 0 < self.beta < 1:
            raise ModelError(f"beta debe estar en (0, 1) para esperas estables (beta={self.beta})")
        if self.wait_dist == "pareto" and not self.beta > 0:
            raise ModelError(f"beta debe ser > 0 para esperas de Pareto (beta={self.beta})")
        if not self.wait_scale > 0:
            raise ModelError(f"wait_scale debe ser > 0 (wait_scale={self.wait_scale})")
        if self.jump_dist != "deterministic" and self.jump_dist != "table" and not self.jump_scale > 0:
            raise ModelError(f"jump_scale debe ser > 0 (jump_scale={self.jump_scale})")
        for name in ("jump_scale_exponent", "wait_scale_exponent"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ModelError(f"{name} debe ser finito y positivo ({name}={value})")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ModelError(f"dim debe ser un entero >= 1 (dim={self.dim})")
        if self.jump_dist == "table" and len(self.jump_table) == 0:
            raise ModelError("jump_dist='table' necesita una jump_table no vacía")
        if self.max_draws < 1:
            raise ModelError("max_draws debe ser >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "CtrwModel":
        """
        Construir desde un diccionario plano de configuración.

        Las claves desconocidas se ignoran; los exponentes ausentes toman
        los valores de default_exponents.
        """
        known = {f for f in cls.__dataclass_fields__}
        values = {k: v for k, v in data.items() if k in known}
        jump_dist = values.get("jump_dist", cls.jump_dist)
        wait_dist = values.get("wait_dist", cls.wait_dist)
        alpha = float(values.get("alpha", cls.alpha))
        beta = float(values.get("beta", cls.beta))
        jump_exp, wait_exp = default_exponents(jump_dist, alpha, wait_dist, beta)
        values.setdefault("jump_scale_exponent", jump_exp)
        values.setdefault("wait_scale_exponent", wait_exp)
        if "jump_table" in values:
            values["jump_table"] = tuple(
                tuple(row) if isinstance(row, (list, tuple)) else row for row in values["jump_table"]
            )
        return cls(**values)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["jump_table"] = [list(r) if isinstance(r, tuple) else r for r in self.jump_table]
        return data


@dataclass(frozen=True, eq=False)
class RenewalPair:
    """
    Par (S_n, T_n) de sumas parciales escalonadas en los nodos k/n.

    Atributos:
        S_path: Saltos acumulados, d-dimensional, modo hold
        T_path: Tiempos de renovación acumulados, estrictamente crecientes
        n: Índice de escala
        renewal_count: Número de pares (Y, J) generados
        horizon: Horizonte del experimento; T_n(renewal_count/n) > horizon
    """
    S_path: CadlagPath
    T_path: MonotonePath
    n: int
    renewal_count: int
    horizon: float

    @property
    def positions(self) -> np.ndarray:
        """S_n(k/n), k = 0..renewal_count."""
        return self.S_path.values

    @property
    def renewal_times(self) -> np.ndarray:
        """T_n(k/n), k = 0..renewal_count."""
        return self.T_path.values[:, 0]

    @property
    def last_renewal(self) -> float:
        return float(self.renewal_times[-1])

    @classmethod
    def from_increments(
        cls,
        jumps: Sequence,
        waits: Sequence[float],
        n: int = 1,
        horizon: Optional[float] = None,
    ) -> "RenewalPair":
        """
        Par construido a partir de incrementos ya escalados.

        Args:
            jumps: Y_{n,1..K} (escalares o vectores)
            waits: J_{n,1..K} > 0
            n: Índice de escala (nodos en k/n)
            horizon: Horizonte del experimento (por defecto T_n((K-1)/n))
        """
        jumps = np.asarray(jumps, dtype=np.float64)
        if jumps.ndim == 1:
            jumps = jumps[:, None]
        waits = np.asarray(waits, dtype=np.float64)
        if len(jumps) != len(waits) or len(waits) == 0:
            raise ModelError("se necesitan tantos saltos como esperas, al menos uno")
        if np.any(waits <= 0):
            raise ModelError("las esperas deben ser estrictamente positivas")
        positions = np.vstack([np.zeros((1, jumps.shape[1])), np.cumsum(jumps, axis=0)])
        times = np.concatenate([[0.0], np.cumsum(waits)])
        if horizon is None:
            horizon = float(times[-2])
        return cls._build(positions, times, n, float(horizon))

    @classmethod
    def _build(cls, positions: np.ndarray, times: np.ndarray, n: int, horizon: float) -> "RenewalPair":
        if not np.all(np.diff(times) > 0):
            raise ModelError("tiempos de renovación no estrictamente crecientes (esperas bajo la resolución)")
        count = len(times) - 1
        if not times[-1] > horizon:
            raise PathDomainError(f"la última renovación {times[-1]} no supera el horizonte {horizon}")
        grid = np.arange(count + 1) / n
        S = CadlagPath.from_arrays(grid, positions, HOLD, grid[-1])
        T = MonotonePath.from_arrays(grid, times, HOLD, grid[-1])
        return cls(S_path=S, T_path=T, n=int(n), renewal_count=count, horizon=horizon)


def sample_renewal_pair(
    model: CtrwModel,
    n: int,
    horizon: float,
    seed: int,
    replicate: int = 0,
) -> RenewalPair:
    """
    Generar (S_n, T_n) hasta la primera renovación que supera el horizonte.

    Los flujos de saltos y esperas dependen solo de (seed, n, replicate), así
    que el resultado es reproducible y paralelizable por réplica.

    Args:
        model: Modelo de la red triangular
        n: Índice de escala (>= 1)
        horizon: Horizonte temporal (> 0)
        seed: Semilla maestra
        replicate: Índice de réplica

    Returns:
        RenewalPair con T_n(K/n) > horizon >= T_n((K-1)/n)

    Raises:
        GenerationOverflowError: Si se agota model.max_draws
    """
    if not horizon > 0:
        raise ModelError(f"horizon debe ser > 0 (horizon={horizon})")
    if int(n) != n or n < 1:
        raise ModelError(f"n debe ser un entero >= 1 (n={n})")
    wait_rng = stream(seed, "ctrw", n, replicate, 0)
    jump_rng = stream(seed, "ctrw", n, replicate, 1)
    wait_factor = float(n) ** (-model.wait_scale_exponent)
    jump_factor = float(n) ** (-model.jump_scale_exponent)

    chunk = max(64, int(min(n * horizon * 1.25, model.max_draws)) + 16)
    blocks = []
    total = 0
    current = 0.0
    while True:
        size = min(chunk, model.max_draws - total)
        if size <= 0:
            raise GenerationOverflowError(
                f"T_n no supera horizon={horizon} tras {total} esperas (n={n}, modelo={model.wait_dist})"
            )
        waits = wait_factor * draw_waits(wait_rng, model.wait_dist, size, model.wait_scale, model.beta)
        partial = current + np.cumsum(waits)
        hit = np.flatnonzero(partial > horizon)
        if hit.size:
            blocks.append(partial[:hit[0] + 1])
            total += hit[0] + 1
            break
        blocks.append(partial)
        total += size
        current = float(partial[-1])
        chunk *= 2

    times = np.concatenate([[0.0], *blocks])
    jumps = jump_factor * draw_jumps(jump_rng, model.jump_dist, total, model.dim,
                                     model.jump_scale, model.alpha, model.jump_table)
    positions = np.vstack([np.zeros((1, model.dim)), np.cumsum(jumps, axis=0)])
    logger.debug(f"par de renovación n={n} réplica={replicate}: {total} renovaciones")
    return RenewalPair._build(positions, times, int(n), float(horizon))


def counting_process(T_path: CadlagPath, n: int, t: float) -> int:
    """
    N_n(t) = max{k >= 0 : T_n(k/n) <= t}, por búsqueda binaria sobre los nodos.

    Raises:
        PathDomainError: Si t es negativo o posterior a la última renovación
    """
    return int(counting_many(T_path, n, [t])[0])


def counting_many(T_path: CadlagPath, n: int, ts: Sequence[float]) -> np.ndarray:
    if n < 1:
        raise ModelError(f"n debe ser >= 1 (n={n})")
    ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
    renewals = T_path.values[:, 0]
    if np.any(ts < 0) or np.any(ts > renewals[-1]):
        raise PathDomainError(f"t fuera de [0, {renewals[-1]}]: no hay renovaciones generadas")
    # El nodo k de T_n está en k/n
    return np.searchsorted(renewals, ts, side="right") - 1


def ctrw_path(pair: RenewalPair, horizon: Optional[float] = None) -> CadlagPath:
    """
    R_n(t) = S_n(N_n(t)/n): escalonada con nodos en los instantes de renovación.

    Por defecto el horizonte es la última renovación, de modo que todas las
    escaleras quedan cerradas.
    """
    times = pair.renewal_times
    horizon = pair.last_renewal if horizon is None else float(horizon)
    if not 0 <= horizon <= pair.last_renewal:
        raise PathDomainError(f"horizon={horizon} fuera de las renovaciones generadas [0, {pair.last_renewal}]")
    keep = int(np.searchsorted(times, horizon, side="right"))
    return CadlagPath.from_arrays(times[:keep], pair.positions[:keep], HOLD, horizon)


def octrw_path(pair: RenewalPair, horizon: Optional[float] = None) -> CadlagPath:
    """
    X̃(t) = S_n(N_n(t)/n + 1/n): posición tras el primer salto posterior a t.

    Raises:
        PathDomainError: Si falta la renovación de sobrepaso para algún t del horizonte
    """
    times = pair.renewal_times
    horizon = pair.horizon if horizon is None else float(horizon)
    if not 0 <= horizon < pair.last_renewal:
        raise PathDomainError(
            f"falta la renovación de sobrepaso: horizon={horizon} >= última renovación {pair.last_renewal}"
        )
    keep = int(np.searchsorted(times, horizon, side="right"))
    return CadlagPath.from_arrays(times[:keep], pair.positions[1:keep + 1], HOLD, horizon)


def cpctrw_path(pair: RenewalPair, horizon: Optional[float] = None) -> CadlagPath:
    """
    X̄: poligonal continua por los vértices (T_n(k/n), S_n(k/n)).

    Sin horizonte explícito llega hasta la última renovación y coincide
    nodo a nodo con stair_fill(ctrw_path(pair)).
    """
    full = CadlagPath.from_arrays(pair.renewal_times, pair.positions, LINEAR, pair.last_renewal)
    if horizon is None or float(horizon) == pair.last_renewal:
        return full
    if not 0 <= horizon < pair.last_renewal:
        raise PathDomainError(
            f"falta la renovación de sobrepaso: horizon={horizon} >= última renovación {pair.last_renewal}"
        )
    return restrict(full, float(horizon))


def path_of_kind(pair: RenewalPair, kind: str) -> CadlagPath:
    if kind == "ctrw":
        return ctrw_path(pair)
    if kind == "octrw":
        return octrw_path(pair)
    if kind == "cpctrw":
        return cpctrw_path(pair)
    raise ModelError(f"tipo de trayectoria desconocido '{kind}' (opciones: {', '.join(PATH_KINDS)})")


# ----------------------------------------------------------------------
# Conjuntos de réplicas
# ----------------------------------------------------------------------
@dataclass(eq=False)
class PathEnsemble:
    """
    Réplicas independientes de un mismo proceso.

    marginals tiene forma (réplicas, len(eval_times), dim); paths puede estar
    vacío si solo se pidieron marginales.
    """
    kind: str
    seed: int
    horizon: float
    eval_times: tuple
    marginals: np.ndarray
    model: dict = field(default_factory=dict)
    n: Optional[int] = None
    paths: list = field(default_factory=list)

    @property
    def replicates(self) -> int:
        return int(self.marginals.shape[0])

    def marginal(self, t_index: int, coord: int = 0) -> np.ndarray:
        """Muestra de la coordenada `coord` en eval_times[t_index]."""
        return self.marginals[:, t_index, coord]

    def metadata(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "seed": self.seed,
            "horizon": self.horizon,
            "eval_times": list(self.eval_times),
            "replicates": self.replicates,
            "generator": GENERATOR_ID,
            "model": self.model,
        }

    def to_frame(self) -> pd.DataFrame:
        """Marginales en formato largo: replicate, t, v1..vd."""
        reps, times, dim = self.marginals.shape
        frame = pd.DataFrame(
            self.marginals.reshape(reps * times, dim),
            columns=[f"v{i + 1}" for i in range(dim)],
        )
        frame.insert(0, "t", np.tile(np.asarray(self.eval_times, dtype=np.float64), reps))
        frame.insert(0, "replicate", np.repeat(np.arange(reps), times))
        return frame

    def save(self, file_path: Union[str, Path], fmt: str = "json") -> Path:
        """
        Guardar como JSON-lines (cabecera + una trayectoria por línea) o CSV de marginales.
        """
        file_path = Path(file_path)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        if fmt == "csv":
            self.to_frame().to_csv(file_path, index=False)
        elif fmt == "json":
            with file_path.open("w", encoding="utf-8") as f:
                header = dict(self.metadata(), marginals=self.marginals.tolist())
                f.write(json.dumps({"ensemble": header}) + "\n")
                for replicate, path in enumerate(self.paths):
                    f.write(json.dumps({"replicate": replicate, "path": path.to_dict()}) + "\n")
        else:
            raise ValueError(f"formato desconocido '{fmt}' (opciones: csv, json)")
        logger.info(f"Conjunto '{self.kind}' ({self.replicates} réplicas) guardado en {file_path}")
        return file_path

    @classmethod
    def load(cls, file_path: Union[str, Path]) -> "PathEnsemble":
        """Cargar un conjunto guardado en JSON-lines."""
        file_path = Path(file_path)
        with file_path.open(encoding="utf-8") as f:
            lines = [json.loads(line) for line in f if line.strip()]
        if not lines or "ensemble" not in lines[0]:
            raise ValueError(f"{file_path} no contiene una cabecera de conjunto")
        header = lines[0]["ensemble"]
        marginals = np.asarray(header["marginals"], dtype=np.float64)
        if marginals.size == 0:
            marginals = marginals.reshape(header["replicates"], len(header["eval_times"]), 1)
        return cls(
            kind=header["kind"],
            seed=header["seed"],
            horizon=header["horizon"],
            eval_times=tuple(header["eval_times"]),
            marginals=marginals,
            model=header.get("model", {}),
            n=header.get("n"),
            paths=[CadlagPath.from_dict(line["path"]) for line in lines[1:]],
        )


def _ctrw_replicate(model, n, horizon, seed, replicate, kind, eval_times, keep_path):
    pair = sample_renewal_pair(model, n, horizon, seed, replicate)
    path = path_of_kind(pair, kind)
    values = path.eval_many(eval_times) if len(eval_times) else np.empty((0, model.dim))
    return (path if keep_path else None), values


def simulate_ensemble(
    model: CtrwModel,
    n: int,
    horizon: float,
    replicates: int,
    seed: int,
    kind: str = "cpctrw",
    eval_times: Sequence[float] = (),
    n_jobs: int = 1,
    keep_paths: bool = True,
) -> PathEnsemble:
    """
    Simular réplicas independientes de R_n, X̃_n o X̄_n.

    Cada réplica usa su propio flujo (seed, n, réplica): el resultado no
    depende de n_jobs.

    Raises:
        GenerationOverflowError: Si alguna réplica agota el presupuesto
    """
    if kind not in PATH_KINDS:
        raise ModelError(f"tipo de trayectoria desconocido '{kind}' (opciones: {', '.join(PATH_KINDS)})")
    eval_times = tuple(float(t) for t in eval_times)
    if any(not 0 <= t <= horizon for t in eval_times):
        raise PathDomainError(f"eval_times debe estar en [0, {horizon}]")
    logger.info(f"Simulando {replicates} réplicas de {kind} (n={n}, horizon={horizon})")
    results = Parallel(n_jobs=n_jobs)(
        delayed(_ctrw_replicate)(model, n, horizon, seed, r, kind, eval_times, keep_paths)
        for r in range(replicates)
    )
    marginals = np.stack([values for _, values in results]) if results else np.empty((0, len(eval_times), model.dim))
    return PathEnsemble(
        kind=kind,
        seed=seed,
        horizon=horizon,
        eval_times=eval_times,
        marginals=marginals,
        model=model.to_dict(),
        n=int(n),
        paths=[path for path, _ in results if path is not None],
    )
