#!/usr/bin/env python3
"""
Procesos límite sobre una malla de paso Δ: (A, D), R = Φ(A, D) y R̄ = f(R).

A es browniano, α-estable simétrico o una deriva; D es un subordinador
β-estable o una deriva. Ambos son escalonados en los nodos kΔ con
incrementos exactos por celda.
"""
import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy.special import gamma

from src.paths.cadlag import HOLD, CadlagPath, MonotonePath, PathDomainError, restrict
from src.paths.transforms import phi, stair_fill
from src.sim.ctrw import CtrwModel, GenerationOverflowError, PathEnsemble
from src.sim.samplers import ModelError, one_sided_stable, symmetric_stable
from src.sim.streams import stream

logger = logging.getLogger(__name__)

A_KINDS = ("brownian", "stable", "drift")
D_KINDS = ("stable", "drift")
LIMIT_KINDS = ("ctrw", "cpctrw")
DEFAULT_MAX_CELLS = 10_000_000


@dataclass(frozen=True)
class LimitModel:
    """
    Modelo de los procesos límite (A, D) en malla.

    Atributos:
        a_kind: brownian | stable | drift
        d_kind: stable | drift
        alpha: Índice de A si es estable
        beta: Índice del subordinador, en (0, 1)
        a_scale: σ de A (browniano), escala estable o pendiente de la deriva
        d_scale: Escala de D(1) o pendiente de la deriva
        mesh: Paso Δ de la malla
        horizon: Horizonte del experimento en el tiempo de R
        dim: Dimensión de A
    """
    a_kind: str = "brownian"
    d_kind: str = "stable"
    alpha: float = 2.0
    beta: float = 0.7
    a_scale: float = 1.0
    d_scale: float = 1.0
    mesh: float = 1e-3
    horizon: float = 1.0
    dim: int = 1
    max_cells: int = DEFAULT_MAX_CELLS

    def __post_init__(self):
        if self.a_kind not in A_KINDS:
            raise ModelError(f"a_kind desconocido '{self.a_kind}' (opciones: {', '.join(A_KINDS)})")
        if self.d_kind not in D_KINDS:
            raise ModelError(f"d_kind desconocido '{self.d_kind}' (opciones: {', '.join(D_KINDS)})")
        if self.d_kind == "stable" and not 0 < self.beta < 1:
            raise ModelError(f"beta debe estar en (0, 1) para el subordinador (beta={self.beta})")
        if self.a_kind == "stable" and not 0 < self.alpha <= 2:
            raise ModelError(f"alpha debe estar en (0, 2] (alpha={self.alpha})")
        if not self.mesh > 0:
            raise ModelError(f"mesh debe ser > 0 (mesh={self.mesh})")
        if not self.horizon > 0:
            raise ModelError(f"horizon debe ser > 0 (horizon={self.horizon})")
        if not self.d_scale > 0:
            raise ModelError(f"d_scale debe ser > 0: D ha de ser estrictamente creciente (d_scale={self.d_scale})")
        if self.a_kind != "drift" and not self.a_scale > 0:
            raise ModelError(f"a_scale debe ser > 0 (a_scale={self.a_scale})")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ModelError(f"dim debe ser un entero >= 1 (dim={self.dim})")

    @classmethod
    def matched_to(cls, model: CtrwModel, mesh: float = 1e-3, horizon: float = 1.0) -> "LimitModel":
        """
        Límite de referencia de (S_n, T_n) para el modelo dado.

        Saltos gaussianos de desviación σ dan A = σB; esperas de Pareto con
        P(J > x) = (x/c)^(-β) dan un subordinador con exponente de Laplace
        Γ(1-β)(c·s)^β, es decir d_scale = c·Γ(1-β)^(1/β). Las esperas de media
        finita dan una deriva de pendiente igual a la media.

        Raises:
            ModelError: Si el modelo no tiene un límite de referencia implementado
        """
        jump_exp, wait_exp = _standard_exponents(model)
        if not (math.isclose(model.jump_scale_exponent, jump_exp)
                and math.isclose(model.wait_scale_exponent, wait_exp)):
            logger.warning(
                f"Exponentes de escala ({model.jump_scale_exponent}, {model.wait_scale_exponent}) "
                f"distintos de los del límite ({jump_exp}, {wait_exp}); la referencia puede no ser el límite"
            )

        if model.jump_dist == "gaussian":
            a_kind, alpha, a_scale = "brownian", 2.0, model.jump_scale
        elif model.jump_dist == "stable":
            a_kind, alpha, a_scale = "stable", model.alpha, model.jump_scale
        elif model.jump_dist == "deterministic":
            a_kind, alpha, a_scale = "drift", 2.0, model.jump_scale
        else:
            table = np.asarray(model.jump_table, dtype=np.float64)
            if table.ndim != 1:
                raise ModelError("solo las tablas escalares tienen límite de referencia")
            if not math.isclose(float(table.mean()), 0.0, abs_tol=1e-12):
                raise ModelError("una tabla de saltos con media no nula no tiene límite browniano centrado")
            a_kind, alpha, a_scale = "brownian", 2.0, float(np.sqrt(np.mean(table ** 2)))

        if model.wait_dist in ("exponential", "deterministic"):
            d_kind, beta, d_scale = "drift", 0.7, model.wait_scale
        elif model.wait_dist == "stable":
            d_kind, beta, d_scale = "stable", model.beta, model.wait_scale
        elif model.beta < 1:
            d_kind, beta = "stable", model.beta
            d_scale = model.wait_scale * float(gamma(1.0 - model.beta)) ** (1.0 / model.beta)
        else:
            raise ModelError(f"esperas de Pareto con beta={model.beta} >= 1 no tienen subordinador estable límite")

        return cls(a_kind=a_kind, d_kind=d_kind, alpha=alpha, beta=beta, a_scale=a_scale,
                   d_scale=d_scale, mesh=mesh, horizon=horizon, dim=model.dim)

    def to_dict(self) -> dict:
        return asdict(self)


def _standard_exponents(model: CtrwModel) -> tuple[float, float]:
    jump = {"stable": 1.0 / model.alpha, "deterministic": 1.0}.get(model.jump_dist, 0.5)
    if model.wait_dist == "stable" or (model.wait_dist == "pareto" and model.beta < 1):
        return jump, 1.0 / model.beta
    return jump, 1.0


def _subordinator_cells(model: LimitModel, rng: np.random.Generator) -> np.ndarray:
    """D(kΔ), k = 0..K, hasta la primera celda con D > horizon más una celda extra."""
    if model.d_kind == "drift":
        slope = model.d_scale * model.mesh
        cells = int(math.floor(model.horizon / slope)) + 2
        if cells > model.max_cells:
            raise GenerationOverflowError(f"D necesita {cells} celdas (máximo {model.max_cells})")
        return model.d_scale * (np.arange(cells + 1) * model.mesh)

    cell_scale = model.d_scale * model.mesh ** (1.0 / model.beta)
    chunk = 256
    blocks = []
    current = 0.0
    total = 0
    while True:
        if total >= model.max_cells:
            raise GenerationOverflowError(
                f"D no supera horizon={model.horizon} en {model.max_cells} celdas (mesh={model.mesh})"
            )
        size = min(chunk, model.max_cells - total)
        partial = current + np.cumsum(one_sided_stable(rng, model.beta, size, cell_scale))
        hit = np.flatnonzero(partial > model.horizon)
        if hit.size:
            stop = hit[0] + 2
            if stop <= size:
                blocks.append(partial[:stop])
            else:
                extra = partial[-1] + one_sided_stable(rng, model.beta, 1, cell_scale)
                blocks.extend([partial, extra])
            break
        blocks.append(partial)
        total += size
        current = float(partial[-1])
        chunk *= 2
    return np.concatenate([[0.0], *blocks])


def _driver_increments(model: LimitModel, rng: np.random.Generator, cells: int) -> np.ndarray:
    shape = (cells, model.dim)
    if model.a_kind == "brownian":
        return rng.normal(0.0, model.a_scale * math.sqrt(model.mesh), shape)
    if model.a_kind == "stable":
        return symmetric_stable(rng, model.alpha, shape, model.a_scale * model.mesh ** (1.0 / model.alpha))
    return np.full(shape, model.a_scale * model.mesh)


def sample_limit_pair(model: LimitModel, seed: int, replicate: int = 0) -> tuple[CadlagPath, MonotonePath]:
    """
    Muestrear (A, D) escalonados en la malla kΔ.

    D se genera hasta superar el horizonte y una celda más; A usa el mismo
    número de celdas. Los dos flujos dependen solo de (seed, replicate).

    Returns:
        (A, D) con el mismo horizonte K·Δ

    Raises:
        ModelError: Si D no resulta estrictamente creciente
        GenerationOverflowError: Si D no supera el horizonte en max_cells celdas
    """
    d_values = _subordinator_cells(model, stream(seed, "limit", replicate, 0))
    if not np.all(np.diff(d_values) > 0):
        raise ModelError("incrementos de D nulos: reduce beta o aumenta mesh")
    cells = len(d_values) - 1
    increments = _driver_increments(model, stream(seed, "limit", replicate, 1), cells)
    a_values = np.vstack([np.zeros((1, model.dim)), np.cumsum(increments, axis=0)])
    grid = np.arange(cells + 1) * model.mesh
    horizon = float(grid[-1])
    A = CadlagPath.from_arrays(grid, a_values, HOLD, horizon)
    D = MonotonePath.from_arrays(grid, d_values, HOLD, horizon)
    logger.debug(f"par límite réplica={replicate}: {cells} celdas, D(H)={d_values[-1]:.4f}")
    return A, D


def _restricted(path: CadlagPath, horizon: Optional[float]) -> CadlagPath:
    if horizon is None or horizon == path.horizon:
        return path
    if not horizon < path.horizon:
        raise PathDomainError(f"horizon={horizon} fuera del rango de D ({path.horizon})")
    return restrict(path, horizon)


def limit_ctrw(A: CadlagPath, D: CadlagPath, horizon: Optional[float] = None) -> CadlagPath:
    """R = Φ(A, D), opcionalmente restringido a [0, horizon]."""
    return _restricted(phi(A, D), horizon)


def limit_cpctrw(A: CadlagPath, D: CadlagPath, horizon: Optional[float] = None) -> CadlagPath:
    """
    R̄ = f(Φ(A, D)). En cada salto de D en τ interpola linealmente de
    (D(τ-), A(τ-)) a (D(τ), A(τ)). La restricción se aplica después de
    rellenar, para no dejar escaleras abiertas.
    """
    return _restricted(stair_fill(phi(A, D)), horizon)


def coarsen_pair(A: CadlagPath, D: CadlagPath, factor: int) -> tuple[CadlagPath, MonotonePath]:
    """
    Par en la malla factor·Δ a partir de uno en la malla Δ (mismo muestreo).

    Sirve para comparar R en mallas anidadas sin volver a muestrear.
    """
    if int(factor) != factor or factor < 1:
        raise ModelError(f"factor debe ser un entero >= 1 (factor={factor})")
    keep = np.arange(0, A.n_knots, int(factor))
    grid = A.times[keep]
    horizon = float(grid[-1])
    coarse_A = CadlagPath.from_arrays(grid, A.values[keep], HOLD, horizon)
    coarse_D = MonotonePath.from_arrays(grid, D.values[keep], HOLD, horizon)
    return coarse_A, coarse_D


def _limit_replicate(model, seed, replicate, kind, eval_times, keep_path):
    A, D = sample_limit_pair(model, seed, replicate)
    builder = limit_cpctrw if kind == "cpctrw" else limit_ctrw
    path = builder(A, D, model.horizon)
    values = path.eval_many(eval_times) if len(eval_times) else np.empty((0, model.dim))
    return (path if keep_path else None), values


def simulate_limit_ensemble(
    model: LimitModel,
    replicates: int,
    seed: int,
    eval_times: Sequence[float] = (),
    n_jobs: int = 1,
    kind: str = "cpctrw",
    keep_paths: bool = False,
) -> PathEnsemble:
    """
    Réplicas independientes de R̄ (o de R con kind='ctrw') restringidas al horizonte del modelo.
    """
    if kind not in LIMIT_KINDS:
        raise ModelError(f"tipo límite desconocido '{kind}' (opciones: {', '.join(LIMIT_KINDS)})")
    eval_times = tuple(float(t) for t in eval_times)
    if any(not 0 <= t <= model.horizon for t in eval_times):
        raise PathDomainError(f"eval_times debe estar en [0, {model.horizon}]")
    logger.info(f"Simulando {replicates} réplicas límite {model.a_kind}/{model.d_kind} (mesh={model.mesh})")
    results = Parallel(n_jobs=n_jobs)(
        delayed(_limit_replicate)(model, seed, r, kind, eval_times, keep_paths)
        for r in range(replicates)
    )
    marginals = (np.stack([values for _, values in results]) if results
                 else np.empty((0, len(eval_times), model.dim)))
    return PathEnsemble(
        kind=f"limit-{kind}",
        seed=seed,
        horizon=model.horizon,
        eval_times=eval_times,
        marginals=marginals,
        model=model.to_dict(),
        paths=[path for path, _ in results if path is not None],
    )
