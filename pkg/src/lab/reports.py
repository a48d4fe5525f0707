#!/usr/bin/env python3
"""Persistencia de informes: JSON con metadatos y tablas CSV bajo el directorio de salida."""
import json
import logging
from pathlib import Path
from typing import Any, Mapping, Optional, Union

import numpy as np
import pandas as pd
import scipy

from src.sim.streams import GENERATOR_ID

logger = logging.getLogger(__name__)

MARGINAL_STATEMENT = (
    "La convergencia débil en M1 se valida a nivel de distribuciones marginales "
    "(KS en instantes fijos) junto con pruebas deterministas trayectoria a trayectoria; "
    "no es una prueba de convergencia en el espacio de trayectorias."
)


def report_metadata(config: Optional[Mapping[str, Any]] = None, seed: Optional[int] = None, **extra) -> dict:
    """Metadatos comunes a todos los informes; sin marcas de tiempo."""
    meta = {
        "generator": GENERATOR_ID,
        "seed": seed,
        "numpy_version": np.__version__,
        "scipy_version": scipy.__version__,
        "pandas_version": pd.__version__,
        "validation_level": MARGINAL_STATEMENT,
        "config": dict(config) if config is not None else None,
    }
    meta.update(extra)
    return meta


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None if np.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def write_report(
    out_dir: Union[str, Path],
    name: str,
    payload: Mapping[str, Any],
    tables: Optional[Mapping[str, pd.DataFrame]] = None,
    fmt: str = "both",
) -> dict[str, Path]:
    """
    Escribir `<name>.json` y una CSV por tabla (`<name>_<tabla>.csv`).

    Args:
        out_dir: Directorio de salida (se crea si no existe)
        name: Prefijo de los ficheros
        payload: Contenido del informe
        tables: Tablas a exportar
        fmt: 'json', 'csv' o 'both'

    Returns:
        Rutas escritas por clave ('report' o nombre de tabla)
    """
    if fmt not in ("json", "csv", "both"):
        raise ValueError(f"formato desconocido '{fmt}' (opciones: json, csv)")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = {}
    tables = tables or {}

    if fmt in ("json", "both"):
        body = dict(payload)
        body["tables"] = {key: frame.to_dict(orient="records") for key, frame in tables.items()}
        report_path = out_dir / f"{name}.json"
        with report_path.open("w", encoding="utf-8") as f:
            json.dump(_jsonable(body), f, indent=2, ensure_ascii=False, sort_keys=True)
        written["report"] = report_path

    if fmt in ("csv", "both"):
        for key, frame in tables.items():
            table_path = out_dir / f"{name}_{key}.csv"
            frame.to_csv(table_path, index=False)
            written[key] = table_path

    logger.info(f"Informe '{name}' escrito en {out_dir} ({len(written)} ficheros)")
    return written
