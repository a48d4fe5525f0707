#!/usr/bin/env python3
"""Configuración de experimentos: carga YAML plana, valores por defecto y validación."""
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

import yaml

from src.sim.ctrw import CtrwModel
from src.sim.limit import LimitModel
from src.sim.samplers import ModelError
from src.sim.streams import DEFAULT_SEED

logger = logging.getLogger(__name__)

PROJECT_ROOT = Path(__file__).parent.parent.parent
CONFIG_DIR = PROJECT_ROOT / "config"

DEFAULTS = {
    "jump_dist": "gaussian",
    "jump_scale": 1.0,
    "wait_dist": "exponential",
    "wait_scale": 1.0,
    "dim": 1,
    "horizon": 1.0,
    "n_values": [10, 100, 1000],
    "replicates": 1000,
    "eval_times": [0.5, 1.0],
    "seed": DEFAULT_SEED,
    "output_dir": "results",
    "n_jobs": 1,
    "limit_mesh": 1e-3,
}


class ConfigError(ValueError):
    """Se lanza cuando la configuración del experimento no es válida."""
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Configuración completa de un experimento.

    Atributos:
        model: Modelo CTRW de la red triangular
        limit: Modelo límite de referencia
        n_values: Índices de escala en orden creciente
        replicates: Réplicas por conjunto
        eval_times: Instantes para las marginales
        seed: Semilla maestra de 64 bits
        output_dir: Directorio de resultados
        n_jobs: Procesos para joblib
        raw: Claves tal y como se leyeron (para los informes)
    """
    model: CtrwModel
    limit: LimitModel
    n_values: tuple
    replicates: int
    eval_times: tuple
    seed: int
    output_dir: Path
    n_jobs: int = 1
    raw: dict = field(default_factory=dict)

    @property
    def horizon(self) -> float:
        return self.limit.horizon

    def with_overrides(
        self,
        seed: Optional[int] = None,
        output_dir: Optional[Union[str, Path]] = None,
        mesh: Optional[float] = None,
    ) -> "ExperimentConfig":
        """Aplicar los flags de línea de comandos sobre la configuración del fichero."""
        raw = dict(self.raw)
        if seed is not None:
            raw["seed"] = seed
        if output_dir is not None:
            raw["output_dir"] = str(output_dir)
        if mesh is not None:
            raw["limit_mesh"] = mesh
        return config_from_dict(raw)

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "limit": self.limit.to_dict(),
            "n_values": list(self.n_values),
            "replicates": self.replicates,
            "eval_times": list(self.eval_times),
            "seed": self.seed,
            "output_dir": str(self.output_dir),
            "n_jobs": self.n_jobs,
        }


def config_from_dict(data: dict) -> ExperimentConfig:
    """
    Construir y validar una ExperimentConfig a partir de claves planas.

    Raises:
        ConfigError: Si algún valor no es válido
    """
    raw = dict(DEFAULTS)
    raw.update(data or {})
    try:
        model = CtrwModel.from_dict(raw)
        horizon = float(raw["horizon"])
        limit = LimitModel.matched_to(model, mesh=float(raw["limit_mesh"]), horizon=horizon)
        overrides = {}
        if raw.get("limit_a_kind"):
            overrides["a_kind"] = raw["limit_a_kind"]
        if raw.get("limit_d_kind"):
            overrides["d_kind"] = raw["limit_d_kind"]
        if overrides:
            limit = replace(limit, **overrides)
    except (ModelError, TypeError, ValueError) as e:
        raise ConfigError(f"modelo inválido: {e}") from e

    n_values = tuple(int(n) for n in raw["n_values"])
    if not n_values or any(n < 1 for n in n_values):
        raise ConfigError(f"n_values debe contener enteros >= 1 (n_values={list(n_values)})")
    if any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise ConfigError(f"n_values debe ser estrictamente creciente (n_values={list(n_values)})")
    eval_times = tuple(float(t) for t in raw["eval_times"])
    if any(not 0 <= t <= horizon for t in eval_times):
        raise ConfigError(f"eval_times debe estar en [0, {horizon}] (eval_times={list(eval_times)})")
    replicates = int(raw["replicates"])
    if replicates < 1:
        raise ConfigError(f"replicates debe ser >= 1 (replicates={replicates})")
    seed = int(raw["seed"])
    if not 0 <= seed < 2 ** 64:
        raise ConfigError(f"seed debe ser un entero de 64 bits sin signo (seed={seed})")
    n_jobs = int(raw["n_jobs"])
    if n_jobs == 0:
        raise ConfigError("n_jobs no puede ser 0")

    return ExperimentConfig(
        model=model,
        limit=limit,
        n_values=n_values,
        replicates=replicates,
        eval_times=eval_times,
        seed=seed,
        output_dir=Path(raw["output_dir"]),
        n_jobs=n_jobs,
        raw=raw,
    )


def _load_config(config_path: Path) -> dict:
    """Leer el YAML; si falta o está mal formado se usan los valores por defecto."""
    try:
        with open(config_path) as f:
            config = yaml.safe_load(f) or {}
        if not isinstance(config, dict):
            raise ConfigError(f"{config_path} debe contener un mapa clave-valor")
        logger.info(f"Configuración cargada desde {config_path}")
        return config
    except FileNotFoundError:
        logger.warning(f"Archivo de configuración no encontrado: {config_path}. Usando valores por defecto.")
        return {}
    except yaml.YAMLError as e:
        logger.error(f"Error al parsear YAML: {e}. Usando valores por defecto.")
        return {}


def load_config(config_path: Optional[Union[str, Path]] = None) -> ExperimentConfig:
    """
    Cargar la configuración del experimento.

    Args:
        config_path: Ruta al YAML (por defecto config/lab.yaml)

    Returns:
        ExperimentConfig validada

    Raises:
        ConfigError: Si algún valor explícito no es válido
    """
    config_path = CONFIG_DIR / "lab.yaml" if config_path is None else Path(config_path)
    return config_from_dict(_load_config(config_path))
