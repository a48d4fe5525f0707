#!/usr/bin/env python3
"""
Experimentos de convergencia.

- Estudio de marginales: KS entre R̄_n(t) y la referencia f(Φ(A, D))(t).
- Reproducción del contraejemplo de conservación y de las sucesiones que sí conservan.
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy.stats import ks_2samp, kstwobign

from src.lab.config import ConfigError, ExperimentConfig
from src.lab.constructions import (
    COUNTEREXAMPLE_HORIZON,
    counterexample_identity,
    counterexample_limit,
    counterexample_term,
    preserving_sequences,
)
from src.lab.reports import report_metadata, write_report
from src.metrics.certificates import build_m1_certificate, stair_hypotheses
from src.metrics.distances import m1_distance
from src.paths.transforms import stair_fill
from src.sim.ctrw import GenerationOverflowError, simulate_ensemble
from src.sim.limit import simulate_limit_ensemble

logger = logging.getLogger(__name__)

KS_LEVEL = 0.01
MIN_KS_REPLICATES = 100
# Redondeo previo al KS: absorbe el orden de suma en modelos deterministas
KS_DECIMALS = 12


class EmptySampleError(ValueError):
    """Se lanza cuando una de las muestras del test KS está vacía."""
    pass


def ks_statistic(sample1: Sequence[float], sample2: Sequence[float]) -> float:
    """
    Estadístico KS de dos muestras: sup |F1 - F2| de las funciones de distribución empíricas.

    Raises:
        EmptySampleError: Si alguna muestra está vacía
    """
    s1 = np.asarray(sample1, dtype=np.float64).ravel()
    s2 = np.asarray(sample2, dtype=np.float64).ravel()
    if s1.size == 0 or s2.size == 0:
        raise EmptySampleError("el test KS necesita dos muestras no vacías")
    return float(ks_2samp(s1, s2).statistic)


def ks_critical_value(n: int, m: int, level: float = KS_LEVEL) -> float:
    """Valor crítico asintótico del KS de dos muestras: K_{1-level}·sqrt((n + m)/(n·m))."""
    if n < 1 or m < 1:
        raise EmptySampleError("el valor crítico necesita tamaños >= 1")
    if not 0 < level < 1:
        raise ValueError(f"level debe estar en (0, 1) (level={level})")
    return float(kstwobign.isf(level) * math.sqrt((n + m) / (n * m)))


# ----------------------------------------------------------------------
# Estudio de marginales
# ----------------------------------------------------------------------
@dataclass
class ConvergenceReport:
    """
    Resultado del estudio de marginales.

    table: filas (n, t, ks, critical, below_critical)
    trends: por t, si el KS decrece estrictamente con n y si queda bajo el crítico al final
    """
    table: pd.DataFrame
    trends: dict
    metadata: dict
    distances: pd.DataFrame = field(default_factory=pd.DataFrame)

    @property
    def passed(self) -> bool:
        return all(flag["final_below_critical"] for flag in self.trends.values())

    def to_dict(self) -> dict:
        return {"metadata": self.metadata, "trends": self.trends, "passed": self.passed}

    def save(self, out_dir: Union[str, Path], fmt: str = "both") -> dict:
        tables = {"ks": self.table}
        if not self.distances.empty:
            tables["distances"] = self.distances
        return write_report(out_dir, "convergence", self.to_dict(), tables, fmt)


def _trend_flags(table: pd.DataFrame) -> dict:
    trends = {}
    for t, rows in table.groupby("t", sort=True):
        ks = rows.sort_values("n")["ks"].to_numpy()
        trends[f"{t:g}"] = {
            "decreasing": bool(np.all(np.diff(ks) < 0)),
            "final_below_critical": bool(rows.sort_values("n")["below_critical"].iloc[-1]),
            "first_ks": float(ks[0]),
            "last_ks": float(ks[-1]),
        }
    return trends


def run_marginal_convergence(config: ExperimentConfig, coord: int = 0) -> ConvergenceReport:
    """
    Comparar las marginales de R̄_n con las de la referencia límite para cada n.

    La referencia tiene el mismo número de réplicas que cada conjunto de
    prueba; el umbral es el valor crítico asintótico al 1%.

    Raises:
        ConfigError: Si hay menos de MIN_KS_REPLICATES réplicas o no hay instantes
        GenerationOverflowError: Propagado con el n que lo provocó
    """
    if config.replicates < MIN_KS_REPLICATES:
        raise ConfigError(f"el estudio KS necesita replicates >= {MIN_KS_REPLICATES} (hay {config.replicates})")
    if not config.eval_times:
        raise ConfigError("el estudio KS necesita al menos un instante en eval_times")
    logger.info(
        f"Estudio de marginales: n={list(config.n_values)}, {config.replicates} réplicas, "
        f"t={list(config.eval_times)}"
    )
    reference = simulate_limit_ensemble(config.limit, config.replicates, config.seed,
                                        config.eval_times, n_jobs=config.n_jobs)
    critical = ks_critical_value(config.replicates, config.replicates, KS_LEVEL)

    rows = []
    for n in config.n_values:
        try:
            ensemble = simulate_ensemble(config.model, n, config.horizon, config.replicates, config.seed,
                                         kind="cpctrw", eval_times=config.eval_times,
                                         n_jobs=config.n_jobs, keep_paths=False)
        except GenerationOverflowError as e:
            raise GenerationOverflowError(f"estudio de marginales, n={n}: {e}") from e
        for idx, t in enumerate(config.eval_times):
            ks = ks_statistic(np.round(ensemble.marginal(idx, coord), KS_DECIMALS),
                              np.round(reference.marginal(idx, coord), KS_DECIMALS))
            rows.append({"n": n, "t": t, "ks": ks, "critical": critical, "below_critical": ks < critical})
            logger.info(f"n={n} t={t:g}: KS={ks:.4f} (crítico {critical:.4f})")

    table = pd.DataFrame(rows, columns=["n", "t", "ks", "critical", "below_critical"])
    metadata = report_metadata(
        config.to_dict(),
        config.seed,
        ks_level=KS_LEVEL,
        limit_mesh=config.limit.mesh,
        coordinate=coord,
    )
    return ConvergenceReport(table=table, trends=_trend_flags(table), metadata=metadata)


# ----------------------------------------------------------------------
# Contraejemplo de conservación
# ----------------------------------------------------------------------
@dataclass
class CounterexampleReport:
    """Horquillas M1 por n y par, certificados por eps y pareja, e hipótesis de escalera."""
    distances: pd.DataFrame
    certificates: pd.DataFrame
    hypotheses: pd.DataFrame
    checks: dict
    metadata: dict

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {"metadata": self.metadata, "checks": self.checks, "passed": self.passed}

    def save(self, out_dir: Union[str, Path], fmt: str = "both") -> dict:
        tables = {"distances": self.distances, "certificates": self.certificates, "hypotheses": self.hypotheses}
        return write_report(out_dir, "counterexample", self.to_dict(), tables, fmt)


def counterexample_values(n_max: int, n_min: int = 2) -> list[int]:
    """Potencias de dos entre n_min y n_max."""
    if n_max < n_min:
        raise ValueError(f"n_max debe ser >= {n_min} (n_max={n_max})")
    values = []
    n = n_min
    while n <= n_max:
        values.append(n)
        n *= 2
    return values


def run_example1(
    eps_list: Sequence[float] = (0.2, 0.1, 0.05),
    n_max: int = 128,
    mesh: Optional[float] = None,
) -> CounterexampleReport:
    """
    Reproducir el contraejemplo: x_n -> x y f(x_n) -> x en M1, pero f(x) = e.

    Args:
        eps_list: Niveles de los certificados
        n_max: Mayor n (se usan potencias de dos desde 2)
        mesh: Paso del refinado M1 (por defecto 1/(4n) para cada n)

    Returns:
        CounterexampleReport
    """
    x = counterexample_limit()
    e = counterexample_identity()
    ns = counterexample_values(n_max)
    xs = [counterexample_term(n) for n in ns]
    fxs = [stair_fill(xn) for xn in xs]

    rows = []
    for n, xn, fxn in zip(ns, xs, fxs):
        step = mesh if mesh is not None else 1.0 / (4 * n)
        for pair, left, right in (("xn_x", xn, x), ("fxn_x", fxn, x), ("fxn_e", fxn, e)):
            bracket = m1_distance(left, right, COUNTEREXAMPLE_HORIZON, step)
            rows.append({"n": n, "pair": pair, "mesh": step, "lower": bracket.lower, "upper": bracket.upper})
        logger.debug(f"contraejemplo n={n} evaluado")
    distances = pd.DataFrame(rows, columns=["n", "pair", "mesh", "lower", "upper"])

    cert_rows = []
    for eps in eps_list:
        for pair, seq, target in (("xn_x", xs, x), ("fxn_x", fxs, x), ("fxn_e", fxs, e)):
            cert = build_m1_certificate(target, seq, eps, COUNTEREXAMPLE_HORIZON)
            cert_rows.append({
                "pair": pair,
                "epsilon": eps,
                "found": cert.found,
                "n1": ns[cert.n1 - 1] if cert.found else None,
                "m": cert.m,
            })
    certificates = pd.DataFrame(cert_rows, columns=["pair", "epsilon", "found", "n1", "m"])
    hypotheses = stair_hypotheses(x, xs, 1.5)
    hypotheses["n"] = ns

    def column(pair: str, name: str) -> np.ndarray:
        return distances.loc[distances["pair"] == pair, name].to_numpy()

    n_arr = np.asarray(ns, dtype=np.float64)
    checks = {
        "xn_x_upper_within_1_over_n": bool(np.all(
            column("xn_x", "upper") <= 1.0 / n_arr + column("xn_x", "mesh") + 1e-12)),
        "fxn_x_upper_within_2_over_n": bool(np.all(column("fxn_x", "upper") <= 2.0 / n_arr + 1e-12)),
        "fxn_e_lower_at_least_quarter": bool(np.all(column("fxn_e", "lower")[n_arr >= 4] >= 0.25 - 1e-12)),
        "xn_x_certified": bool(certificates.loc[certificates["pair"] == "xn_x", "found"].all()),
        "fxn_e_not_certified": not bool(
            certificates.loc[(certificates["pair"] == "fxn_e") & (certificates["epsilon"] >= 0.2), "found"].any()),
        "closing_jump_gap_persists": bool(hypotheses["jump_gap"].iloc[-1] >= 0.5),
    }
    for name, ok in checks.items():
        logger.info(f"contraejemplo: {name} -> {'ok' if ok else 'FALLO'}")
    metadata = report_metadata({"eps_list": list(eps_list), "n_max": n_max, "mesh": mesh}, None)
    return CounterexampleReport(distances, certificates, hypotheses, checks, metadata)


# ----------------------------------------------------------------------
# Sucesiones que conservan la convergencia
# ----------------------------------------------------------------------
@dataclass
class PreservationReport:
    """Horquillas de (f(x_n), f(x)) e hipótesis de escalera por sucesión; incluye el contraejemplo."""
    table: pd.DataFrame
    flags: dict
    metadata: dict

    @property
    def passed(self) -> bool:
        return all(all(v for v in flags.values()) for flags in self.flags.values())

    def to_dict(self) -> dict:
        return {"metadata": self.metadata, "flags": self.flags, "passed": self.passed}

    def save(self, out_dir: Union[str, Path], fmt: str = "both") -> dict:
        return write_report(out_dir, "preservation", self.to_dict(), {"sequences": self.table}, fmt)


def run_preservation_suite(
    n_values: Sequence[int] = (4, 16, 64, 256),
    mesh: float = 0.004,
    tolerance: float = 0.02,
) -> PreservationReport:
    """
    Para cada sucesión de referencia, horquilla M1 de (f(x_n), f(x)) y huecos de η, θ y salto.

    Una sucesión pasa si la cota superior decrece con n y queda bajo
    `tolerance` en el mayor n. El contraejemplo pasa si el hueco del salto
    de cierre no desaparece y f(x_n) queda lejos de f(x).
    """
    n_values = sorted(int(n) for n in n_values)
    rows = []
    flags = {}
    for seq in preserving_sequences():
        target = stair_fill(seq.limit)
        terms = [seq.term(n) for n in n_values]
        gaps = stair_hypotheses(seq.limit, terms, seq.probe)
        uppers = []
        for idx, (n, xn) in enumerate(zip(n_values, terms)):
            bracket = m1_distance(stair_fill(xn), target, COUNTEREXAMPLE_HORIZON, mesh)
            uppers.append(bracket.upper)
            rows.append({
                "sequence": seq.name, "n": n, "lower": bracket.lower, "upper": bracket.upper,
                "eta_gap": gaps["eta_gap"].iloc[idx], "theta_gap": gaps["theta_gap"].iloc[idx],
                "jump_gap": gaps["jump_gap"].iloc[idx],
            })
        flags[seq.name] = {
            "upper_trending_down": bool(uppers[-1] < uppers[0]),
            "upper_below_tolerance": bool(uppers[-1] < tolerance),
            "hypotheses_vanish": bool(gaps[["eta_gap", "theta_gap", "jump_gap"]].iloc[-1].max()
                                      <= 2.0 / n_values[-1] + 1e-12),
        }
        logger.info(f"conservación '{seq.name}': {flags[seq.name]}")

    x, e = counterexample_limit(), counterexample_identity()
    terms = [counterexample_term(n) for n in n_values]
    gaps = stair_hypotheses(x, terms, 1.5)
    lowers = []
    for idx, (n, xn) in enumerate(zip(n_values, terms)):
        bracket = m1_distance(stair_fill(xn), e, COUNTEREXAMPLE_HORIZON, mesh)
        lowers.append(bracket.lower)
        rows.append({
            "sequence": "counterexample", "n": n, "lower": bracket.lower, "upper": bracket.upper,
            "eta_gap": gaps["eta_gap"].iloc[idx], "theta_gap": gaps["theta_gap"].iloc[idx],
            "jump_gap": gaps["jump_gap"].iloc[idx],
        })
    flags["counterexample"] = {
        "jump_gap_persists": bool(gaps["jump_gap"].iloc[-1] >= 0.5),
        "image_stays_away": bool(min(lowers) >= 0.2),
    }
    logger.info(f"conservación 'counterexample': {flags['counterexample']}")

    table = pd.DataFrame(rows, columns=["sequence", "n", "lower", "upper", "eta_gap", "theta_gap", "jump_gap"])
    metadata = report_metadata({"n_values": n_values, "mesh": mesh, "tolerance": tolerance}, None)
    return PreservationReport(table, flags, metadata)
