#!/usr/bin/env python3
"""
Baterías de propiedades sobre entradas aleatorias reproducibles.

Cada batería recorre `cases` casos generados con un flujo propio y cuenta
las comprobaciones fallidas. Las operaciones bajo prueba se inyectan a
través de un diccionario, lo que permite sustituirlas por mutantes y
comprobar que las baterías los detectan.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np
import pandas as pd

from src.lab.reports import report_metadata, write_report
from src.metrics.distances import Bracket, j1_distance, m1_distance, uniform_distance
from src.paths.cadlag import HOLD, INF, LINEAR, CadlagPath
from src.paths.transforms import (
    fill_stairs,
    inverse_identity_pair,
    phi,
    stair_fill,
    stair_fill_pointwise,
    stairs,
)
from src.sim.ctrw import CtrwModel, counting_many, cpctrw_path, ctrw_path, sample_renewal_pair
from src.sim.streams import stream

logger = logging.getLogger(__name__)

SUITES = ("eta_theta", "stair_set", "inverse_identity", "renewal_identities", "metric_sanity")
MUTATIONS = ("stair_fill_skip_first", "counting_off_by_one", "j1_offset")
INVERSE_IDENTITY_TOL = 1e-12


@dataclass
class SuiteResult:
    name: str
    cases: int
    checks: int = 0
    failures: int = 0
    first_failure: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def check(self, ok: bool, detail: Callable[[], str]) -> None:
        self.checks += 1
        if not ok:
            self.failures += 1
            if self.first_failure is None:
                self.first_failure = detail()


@dataclass
class PropertyReport:
    seed: int
    cases: int
    suites: list = field(default_factory=list)
    mutation: Optional[str] = None

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    def table(self) -> pd.DataFrame:
        return pd.DataFrame(
            [{"suite": s.name, "cases": s.cases, "checks": s.checks, "failures": s.failures,
              "passed": s.passed, "first_failure": s.first_failure} for s in self.suites],
            columns=["suite", "cases", "checks", "failures", "passed", "first_failure"],
        )

    def to_dict(self) -> dict:
        meta = report_metadata({"cases": self.cases, "mutation": self.mutation}, self.seed)
        return {"metadata": meta, "passed": self.passed}

    def save(self, out_dir: Union[str, Path], fmt: str = "both") -> dict:
        return write_report(out_dir, "properties", self.to_dict(), {"suites": self.table()}, fmt)


# ----------------------------------------------------------------------
# Operaciones inyectables y mutantes
# ----------------------------------------------------------------------
def default_operations() -> dict:
    return {"stair_fill": stair_fill, "counting_many": counting_many, "j1_distance": j1_distance}


def _skip_first_stair(path: CadlagPath) -> CadlagPath:
    return fill_stairs(path, stairs(path)[1:])


def _counting_off_by_one(T_path, n, ts):
    return counting_many(T_path, n, ts) + 1


def _j1_offset(x1, x2, T=None, mesh=0.01):
    bracket = j1_distance(x1, x2, T, mesh)
    return Bracket(bracket.lower + mesh, bracket.upper + mesh)


def mutated_operations(mutation: Optional[str]) -> dict:
    ops = default_operations()
    if mutation is None:
        return ops
    if mutation == "stair_fill_skip_first":
        ops["stair_fill"] = _skip_first_stair
    elif mutation == "counting_off_by_one":
        ops["counting_many"] = _counting_off_by_one
    elif mutation == "j1_offset":
        ops["j1_distance"] = _j1_offset
    else:
        raise ValueError(f"mutación desconocida '{mutation}' (opciones: {', '.join(MUTATIONS)})")
    return ops


# ----------------------------------------------------------------------
# Generadores aleatorios
# ----------------------------------------------------------------------
def random_step_path(
    rng: np.random.Generator,
    min_knots: int = 5,
    max_knots: int = 50,
    dim: Optional[int] = None,
    closed_horizon: Optional[bool] = None,
) -> CadlagPath:
    """
    Escalonada con valores enteros pequeños (para forzar mesetas repetidas)
    y tiempos en múltiplos de 1/8, exactos en coma flotante.
    """
    k = int(rng.integers(min_knots, max_knots + 1))
    dim = int(rng.integers(1, 3)) if dim is None else dim
    gaps = rng.integers(1, 9, size=k - 1) / 8.0
    times = np.concatenate([[0.0], np.cumsum(gaps)])
    values = rng.integers(-2, 3, size=(k, dim)).astype(np.float64)
    if closed_horizon is None:
        closed_horizon = bool(rng.random() < 0.3)
    horizon = float(times[-1]) if closed_horizon else float(times[-1] + rng.integers(1, 9) / 8.0)
    return CadlagPath.from_arrays(times, values, HOLD, horizon)


def random_monotone_step(rng: np.random.Generator, min_knots: int = 3, max_knots: int = 30) -> CadlagPath:
    """y no decreciente con y(0) = 0, mesetas de longitud aleatoria e incrementos > 0."""
    k = int(rng.integers(min_knots, max_knots + 1))
    times = np.concatenate([[0.0], np.cumsum(rng.integers(1, 9, size=k - 1) / 8.0)])
    values = np.concatenate([[0.0], np.cumsum(rng.integers(1, 9, size=k - 1) / 4.0)])
    horizon = float(times[-1] + rng.integers(1, 9) / 8.0)
    return CadlagPath.from_arrays(times, values, HOLD, horizon)


def random_mixed_path(
    rng: np.random.Generator,
    min_knots: int = 3,
    max_knots: int = 8,
    horizon: float = 4.0,
) -> CadlagPath:
    """
    Trayectoria real con tramos hold y linear mezclados en [0, horizon].

    Algunos tramos lineales llevan valor final explícito, con lo que
    terminan en salto. El último tramo es siempre hold.
    """
    k = int(rng.integers(min_knots, max_knots + 1))
    inner = np.sort(rng.choice(np.arange(1, int(horizon * 8)), size=k - 1, replace=False)) / 8.0
    times = np.concatenate([[0.0], inner])
    values = rng.integers(-2, 3, size=(k, 1)).astype(np.float64)
    linear = rng.random(k) < 0.5
    linear[-1] = False
    ends = np.full((k, 1), np.nan)
    jumping = linear & (rng.random(k) < 0.3)
    ends[jumping] = rng.integers(-2, 3, size=(int(jumping.sum()), 1))
    modes = [LINEAR if flag else HOLD for flag in linear]
    return CadlagPath.from_arrays(times, values, modes, horizon, ends=ends)


def random_model(rng: np.random.Generator) -> CtrwModel:
    choice = int(rng.integers(0, 4))
    if choice == 0:
        return CtrwModel(jump_dist="gaussian", wait_dist="exponential")
    if choice == 1:
        return CtrwModel(jump_dist="gaussian", wait_dist="pareto", beta=0.7, wait_scale_exponent=1 / 0.7)
    if choice == 2:
        return CtrwModel(jump_dist="stable", alpha=1.5, jump_scale_exponent=1 / 1.5,
                         wait_dist="stable", beta=0.6, wait_scale_exponent=1 / 0.6, dim=2)
    return CtrwModel(jump_dist="table", jump_table=(-1.0, 1.0, 2.0), wait_dist="exponential")


def _grid(path: CadlagPath, points: int = 101) -> np.ndarray:
    knots = path.times
    mids = (knots[:-1] + knots[1:]) / 2.0
    grid = np.linspace(0.0, path.horizon, points)
    return np.unique(np.concatenate([grid, knots, mids]))


# ----------------------------------------------------------------------
# Baterías
# ----------------------------------------------------------------------
def eta_theta_suite(seed: int, cases: int, ops: dict) -> SuiteResult:
    """η y θ frente a las caracterizaciones por constancia y continuidad."""
    result = SuiteResult("eta_theta", cases)
    for case in range(cases):
        x = random_step_path(stream(seed, "property", 1, case))
        for t in _grid(x):
            eta = x.eta(t)
            value = x.eval(t)
            continuous_left = t > 0 and np.array_equal(x.left_limit(t), value)
            result.check(eta <= t and (eta < t) == continuous_left,
                         lambda: f"caso {case}: eta({t})={eta}")
            if eta < t:
                ok = x.is_constant_on(eta, t) and np.array_equal(x.eval((eta + t) / 2.0), value)
                if eta > 0:
                    ok = ok and not np.array_equal(x.left_limit(eta), value)
                result.check(ok, lambda: f"caso {case}: meseta ({eta}, {t}] no constante")

            theta = x.theta(t)
            result.check(theta >= t and (theta > t) == (not x.is_jump_time(t)),
                         lambda: f"caso {case}: theta({t})={theta}")
            if theta > t:
                stop = x.horizon if theta == INF else theta
                ok = stop == t or x.is_constant_on(t, stop)
                if theta < INF:
                    ok = ok and np.array_equal(x.left_limit(theta), value) and x.is_jump_time(theta)
                result.check(ok, lambda: f"caso {case}: [{t}, {theta}) no constante")

        rebuilt = CadlagPath(x.knots(), x.horizon)
        result.check(rebuilt.discontinuities() == x.discontinuities(),
                     lambda: f"caso {case}: discontinuidades no idempotentes")
    return result


def stair_set_suite(seed: int, cases: int, ops: dict) -> SuiteResult:
    """f(x)(t) != x(t) exactamente en el conjunto de escaleras."""
    result = SuiteResult("stair_set", cases)
    fill = ops["stair_fill"]
    for case in range(cases):
        x = random_step_path(stream(seed, "property", 2, case))
        filled = fill(x)
        ts = _grid(x)
        original = x.eval_many(ts)
        changed = filled.eval_many(ts)
        for t, a, b in zip(ts, original, changed):
            eta, theta = x.eta(t), x.theta(t)
            in_stair = (eta < t < theta < INF and x.is_jump_time(theta)
                        and x.is_constant_on(eta, theta))
            differs = not np.array_equal(a, b)
            result.check(differs == in_stair, lambda: f"caso {case}: t={t} differs={differs} stair={in_stair}")
            if in_stair:
                result.check(np.array_equal(b, stair_fill_pointwise(x, t)),
                             lambda: f"caso {case}: t={t} no coincide con la interpolación")
    return result


def inverse_identity_suite(seed: int, cases: int, ops: dict) -> SuiteResult:
    """(y∘y⁻¹)⁻¹ = Φ(y, y) en nodos, malla, huecos de salto y cierres de meseta."""
    result = SuiteResult("inverse_identity", cases)
    for case in range(cases):
        y = random_monotone_step(stream(seed, "property", 3, case))
        left, right, T = inverse_identity_pair(y)
        gaps = [(j.left_value[0] + j.right_value[0]) / 2.0 for j in y.discontinuities()]
        closures = list(y.values[:, 0])
        ts = np.concatenate([left.times, right.times, np.linspace(0.0, T, 1000, endpoint=False), gaps, closures])
        ts = np.unique(ts[(ts >= 0) & (ts < T)])
        diff = np.max(np.abs(left.eval_many(ts) - right.eval_many(ts))) if ts.size else 0.0
        result.check(diff <= INVERSE_IDENTITY_TOL, lambda: f"caso {case}: diferencia {diff:.3e}")
    return result


def renewal_identities_suite(seed: int, cases: int, ops: dict) -> SuiteResult:
    """R̄_n = f(R_n), R_n = Φ(S_n, T_n), η/θ de R_n y la cadena de N_n."""
    result = SuiteResult("renewal_identities", cases)
    fill, count = ops["stair_fill"], ops["counting_many"]
    for case in range(cases):
        rng = stream(seed, "property", 4, case)
        model = random_model(rng)
        n = int(rng.integers(1, 40))
        horizon = float(rng.uniform(0.5, 2.0))
        pair = sample_renewal_pair(model, n, horizon, seed, replicate=case)
        R = ctrw_path(pair)
        T_end = pair.last_renewal
        renewals = pair.renewal_times
        ts = np.linspace(0.0, T_end, 257)[:-1]
        ts = np.unique(np.concatenate([ts, renewals[:-1], (renewals[:-1] + renewals[1:]) / 2.0]))

        bar = cpctrw_path(pair)
        filled = fill(R)
        result.check(np.array_equal(bar.eval_many(ts), filled.eval_many(ts)),
                     lambda: f"caso {case}: cpctrw != f(ctrw)")
        result.check(np.array_equal(R.eval_many(ts), phi(pair.S_path, pair.T_path).eval_many(ts)),
                     lambda: f"caso {case}: ctrw != Φ(S, T)")

        N = count(pair.T_path, pair.n, ts)
        inner = ~np.isin(ts, renewals)
        for t, k in zip(ts[inner], N[inner]):
            ok = 0 <= k < len(renewals) - 1 and R.eta(t) == renewals[k] and R.theta(t) == renewals[k + 1]
            result.check(ok, lambda: f"caso {case}: η/θ en t={t} frente a renovaciones")
        valid = (N >= 0) & (N < len(renewals) - 1)
        result.check(bool(np.all(valid)), lambda: f"caso {case}: N_n fuera de rango")
        if np.all(valid):
            at_renewal = count(pair.T_path, pair.n, renewals[N])
            at_next = count(pair.T_path, pair.n, renewals[N + 1])
            result.check(np.array_equal(at_renewal, N) and np.array_equal(at_next, N + 1),
                         lambda: f"caso {case}: cadena de N_n rota")
    return result


def metric_sanity_suite(seed: int, cases: int, ops: dict, mesh: float = 0.05) -> SuiteResult:
    """
    M1 <= J1 <= uniforme, autodistancias nulas y desigualdad triangular.

    Las ternas escalonadas cubren M1 y J1 (exacta en ese caso); las ternas
    con tramos lineales y saltos tras tramos lineales cubren uniforme y M1.
    """
    result = SuiteResult("metric_sanity", cases)
    j1 = ops["j1_distance"]
    tol = 1e-12
    for case in range(cases):
        rng = stream(seed, "property", 5, case)
        x, y, z = (random_step_path(rng, 3, 10, dim=1, closed_horizon=False) for _ in range(3))
        horizon = max(p.horizon for p in (x, y, z))
        x, y, z = (CadlagPath.from_arrays(p.times, p.values, HOLD, horizon) for p in (x, y, z))
        m1_xy = m1_distance(x, y, mesh=mesh)
        j1_xy = j1(x, y, mesh=mesh)
        uniform = uniform_distance(x, y)
        result.check(m1_xy.upper <= j1_xy.upper + mesh + tol and j1_xy.upper <= uniform + tol,
                     lambda: f"caso {case}: m1={m1_xy} j1={j1_xy} uniforme={uniform}")
        result.check(m1_distance(x, x, mesh=mesh).upper == 0.0 and j1(x, x, mesh=mesh).upper == 0.0,
                     lambda: f"caso {case}: autodistancia no nula")
        m1_xz = m1_distance(x, z, mesh=mesh)
        m1_yz = m1_distance(y, z, mesh=mesh)
        result.check(m1_xz.lower <= m1_xy.upper + m1_yz.upper + tol,
                     lambda: f"caso {case}: desigualdad triangular M1")
        j1_xz = j1(x, z, mesh=mesh)
        j1_yz = j1(y, z, mesh=mesh)
        result.check(j1_xz.lower <= j1_xy.upper + j1_yz.upper + tol,
                     lambda: f"caso {case}: desigualdad triangular J1")

        u, v, w = (random_mixed_path(rng) for _ in range(3))
        uv, vw, uw = uniform_distance(u, v), uniform_distance(v, w), uniform_distance(u, w)
        result.check(uw <= uv + vw + tol, lambda: f"caso {case}: desigualdad triangular uniforme (mixtas)")
        m1_uv = m1_distance(u, v, mesh=mesh)
        m1_vw = m1_distance(v, w, mesh=mesh)
        m1_uw = m1_distance(u, w, mesh=mesh)
        result.check(m1_uw.lower <= m1_uv.upper + m1_vw.upper + tol,
                     lambda: f"caso {case}: desigualdad triangular M1 (mixtas)")
        result.check(m1_uv.lower <= uv + tol and m1_distance(u, u, mesh=mesh).upper == 0.0,
                     lambda: f"caso {case}: m1={m1_uv} uniforme={uv} (mixtas)")
    return result


SUITE_FUNCS = {
    "eta_theta": eta_theta_suite,
    "stair_set": stair_set_suite,
    "inverse_identity": inverse_identity_suite,
    "renewal_identities": renewal_identities_suite,
    "metric_sanity": metric_sanity_suite,
}


def run_property_suites(
    seed: int,
    cases: int = 1000,
    suites: Optional[list[str]] = None,
    mutation: Optional[str] = None,
) -> PropertyReport:
    """
    Ejecutar las baterías de propiedades.

    Las identidades de renovación usan cases/5 modelos y la batería métrica
    cases/2 pares, en proporción a su coste.

    Args:
        seed: Semilla maestra
        cases: Casos por batería
        suites: Subconjunto de SUITES (por defecto todas)
        mutation: Mutante a inyectar (ver MUTATIONS)

    Returns:
        PropertyReport; passed es False si alguna comprobación falla
    """
    ops = mutated_operations(mutation)
    names = list(SUITES) if suites is None else list(suites)
    unknown = set(names) - set(SUITE_FUNCS)
    if unknown:
        raise ValueError(f"baterías desconocidas: {sorted(unknown)} (opciones: {', '.join(SUITES)})")
    report = PropertyReport(seed=seed, cases=cases, mutation=mutation)
    scaled = {"renewal_identities": max(1, cases // 5), "metric_sanity": max(1, cases // 2)}
    for name in names:
        result = SUITE_FUNCS[name](seed, scaled.get(name, cases), ops)
        report.suites.append(result)
        level = logging.INFO if result.passed else logging.ERROR
        logger.log(level, f"batería {name}: {result.checks} comprobaciones, {result.failures} fallos")
    return report
