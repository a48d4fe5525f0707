#!/usr/bin/env python3
"""cadlag-lab - Orquestador de experimentos: simulación, relleno de escaleras, distancias, certificados y estudios de convergencia."""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from pythonjsonlogger import jsonlogger

from src.lab.config import ConfigError, ExperimentConfig, load_config
from src.lab.experiments import EmptySampleError, run_example1, run_marginal_convergence, run_preservation_suite
from src.lab.properties import MUTATIONS, SUITES, run_property_suites
from src.metrics.certificates import build_m1_certificate
from src.metrics.distances import j1_distance, m1_distance, uniform_distance
from src.metrics.graph import InvalidSubsetError, MeshError
from src.paths.cadlag import PathDomainError, load_path, sample, save_path
from src.paths.transforms import stair_fill
from src.sim.ctrw import PATH_KINDS, GenerationOverflowError, simulate_ensemble
from src.sim.limit import simulate_limit_ensemble
from src.sim.samplers import ModelError
from src.sim.streams import set_seed

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
JSON_LOG_FORMAT = '%(asctime)s %(name)s %(levelname)s %(message)s'

logger = logging.getLogger(__name__)

# Valores de configuración o de malla inválidos: uso incorrecto, código 2
USAGE_ERRORS = (ConfigError, MeshError)

# Errores esperables de entrada o de modelo: se informan sin traza
LAB_ERRORS = (
    ModelError,
    PathDomainError,
    InvalidSubsetError,
    GenerationOverflowError,
    EmptySampleError,
)


def setup_logging(json_logs: bool = False, verbose: bool = False) -> None:
    """Configurar el logger raíz una sola vez: texto con el formato habitual o JSON por línea."""
    level = logging.DEBUG if verbose else logging.INFO
    if json_logs:
        handler = logging.StreamHandler()
        handler.setFormatter(jsonlogger.JsonFormatter(JSON_LOG_FORMAT))
        logging.basicConfig(level=level, handlers=[handler], force=True)
    else:
        logging.basicConfig(level=level, format=LOG_FORMAT, force=True)


class LabRunner:
    """Ejecuta los subcomandos del laboratorio con una configuración ya cargada."""

    def __init__(self, config: ExperimentConfig, fmt: str = "json"):
        self.config = config
        self.fmt = fmt
        set_seed(config.seed)
        logger.info(f"Laboratorio inicializado (seed={config.seed}, salida={config.output_dir})")

    @property
    def out_dir(self) -> Path:
        return Path(self.config.output_dir)

    def _report_format(self) -> str:
        return "csv" if self.fmt == "csv" else "both"

    def run_simulate(self, kind: str, n: Optional[int], replicates: Optional[int]) -> int:
        """Generar un conjunto de réplicas y guardarlo en JSON-lines o CSV."""
        cfg = self.config
        replicates = cfg.replicates if replicates is None else replicates
        if kind == "limit":
            ensemble = simulate_limit_ensemble(cfg.limit, replicates, cfg.seed, cfg.eval_times,
                                               n_jobs=cfg.n_jobs, keep_paths=self.fmt == "json")
            name = "limit"
        else:
            n = cfg.n_values[0] if n is None else n
            ensemble = simulate_ensemble(cfg.model, n, cfg.horizon, replicates, cfg.seed, kind=kind,
                                         eval_times=cfg.eval_times, n_jobs=cfg.n_jobs,
                                         keep_paths=self.fmt == "json")
            name = f"{kind}_n{n}"
        suffix = "csv" if self.fmt == "csv" else "jsonl"
        path = ensemble.save(self.out_dir / f"{name}.{suffix}", fmt=self.fmt)
        print(f"Conjunto guardado: {path}")
        return 0

    def run_stairfill(self, source: Path, target: Optional[Path], mesh: Optional[float]) -> int:
        """Aplicar f a una trayectoria serializada."""
        filled = stair_fill(load_path(source))
        if self.fmt == "csv":
            frame = sample(filled, mesh or 0.01)
            if target is None:
                print(frame.to_csv(index=False), end="")
            else:
                target.parent.mkdir(parents=True, exist_ok=True)
                frame.to_csv(target, index=False)
        elif target is None:
            print(json.dumps(filled.to_dict(), indent=2))
        else:
            save_path(filled, target)
        if target is not None:
            print(f"Trayectoria transformada guardada: {target}")
        return 0

    def run_distance(self, first: Path, second: Path, metric: str, mesh: float, T: Optional[float]) -> int:
        """Distancia (uniforme) u horquilla (m1, j1) entre dos trayectorias serializadas."""
        x1, x2 = load_path(first), load_path(second)
        if metric == "uniform":
            value = uniform_distance(x1, x2, T)
            result = {"metric": metric, "lower": value, "upper": value}
        else:
            func = m1_distance if metric == "m1" else j1_distance
            bracket = func(x1, x2, T, mesh)
            result = {"metric": metric, "mesh": mesh, "lower": bracket.lower, "upper": bracket.upper}
        print(json.dumps(result))
        return 0

    def run_certify(self, limit: Path, sequence: Sequence[Path], eps: float, T: Optional[float]) -> int:
        """Buscar un certificado M1 para la sucesión dada. Código 1 si no se encuentra."""
        x = load_path(limit)
        xs = [load_path(p) for p in sequence]
        cert = build_m1_certificate(x, xs, eps, T)
        cert.save(self.out_dir / "certificate.json")
        print(json.dumps({"epsilon": cert.epsilon, "found": cert.found, "n1": cert.n1, "m": cert.m}))
        return 0 if cert.found else 1

    def run_converge(self) -> int:
        report = run_marginal_convergence(self.config)
        report.save(self.out_dir, self._report_format())
        print(report.table.to_string(index=False))
        print(f"Resultado: {'PASA' if report.passed else 'FALLA'}")
        return 0 if report.passed else 1

    def run_example1(self, eps_list: Sequence[float], n_max: int, mesh: Optional[float]) -> int:
        report = run_example1(eps_list, n_max, mesh)
        report.save(self.out_dir, self._report_format())
        for name, ok in report.checks.items():
            print(f"  {'ok   ' if ok else 'FALLO'} {name}")
        return 0 if report.passed else 1

    def run_proptest(self, cases: int, suites: Optional[list[str]], mutation: Optional[str]) -> int:
        report = run_property_suites(self.config.seed, cases, suites, mutation)
        report.save(self.out_dir, self._report_format())
        print(report.table().to_string(index=False))
        return 0 if report.passed else 1

    def run_preserve(self, n_values: Sequence[int], mesh: Optional[float]) -> int:
        report = run_preservation_suite(n_values, mesh if mesh is not None else 0.004)
        report.save(self.out_dir, self._report_format())
        print(report.table.to_string(index=False))
        print(f"Resultado: {'PASA' if report.passed else 'FALLA'}")
        return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m src.main",
        description="cadlag-lab - Skorokhod M1 tools and CTRW convergence experiments",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Experiment YAML (default: config/lab.yaml)")
    common.add_argument("--seed", type=int, help="Master seed, 64-bit unsigned (overrides config)")
    common.add_argument("--out", help="Output directory (overrides config output_dir)")
    common.add_argument("--mesh", type=float, help="Discretization mesh (M1/J1 refinement, limit grid)")
    common.add_argument("--format", choices=("csv", "json"), default="json", help="Output format (default: json)")
    common.add_argument("--log-json", action="store_true", help="Emit logs as JSON lines")
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="Simulate a replicate ensemble")
    p.add_argument("--kind", choices=(*PATH_KINDS, "limit"), default="cpctrw", help="Process to simulate")
    p.add_argument("--n", type=int, help="Scale index (default: first n_values entry)")
    p.add_argument("--replicates", type=int, help="Replicate count (overrides config)")

    p = sub.add_parser("stairfill", parents=[common], help="Apply the stair-filling map to a path file")
    p.add_argument("path", type=Path, help="Input path JSON")
    p.add_argument("--output", type=Path, help="Output file (default: stdout)")

    p = sub.add_parser("distance", parents=[common], help="Distance between two path files")
    p.add_argument("first", type=Path)
    p.add_argument("second", type=Path)
    p.add_argument("--metric", choices=("m1", "j1", "uniform"), default="m1")
    p.add_argument("--T", type=float, help="Final time (default: common horizon)")

    p = sub.add_parser("certify", parents=[common], help="Search an M1 ordered-subset certificate")
    p.add_argument("limit", type=Path, help="Limit path JSON")
    p.add_argument("sequence", type=Path, nargs="+", help="Sequence path JSON files, in order")
    p.add_argument("--eps", type=float, required=True, help="Certificate level")
    p.add_argument("--T", type=float, help="Final time (default: common horizon)")

    sub.add_parser("converge", parents=[common], help="Marginal KS convergence study")

    p = sub.add_parser("example1", parents=[common], help="Reproduce the stair-preservation counterexample")
    p.add_argument("--eps", type=float, nargs="+", default=[0.2, 0.1, 0.05], help="Certificate levels")
    p.add_argument("--n-max", type=int, default=128, help="Largest n (powers of two from 2)")

    p = sub.add_parser("proptest", parents=[common], help="Run randomized property suites")
    p.add_argument("--cases", type=int, default=1000, help="Cases per suite (default: 1000)")
    p.add_argument("--suite", choices=SUITES, action="append", help="Run only this suite (repeatable)")
    p.add_argument("--mutation", choices=MUTATIONS, help="Inject a known mutant")

    p = sub.add_parser("preserve", parents=[common], help="Deterministic stair-preservation suite")
    p.add_argument("--n-values", type=int, nargs="+", default=[4, 16, 64, 256], help="Scale indices")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Punto de entrada CLI. Códigos: 0 pasa, 1 fallo, 2 uso incorrecto (argparse, configuración o malla inválidas)."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(json_logs=args.log_json, verbose=args.verbose)

    try:
        config = load_config(args.config).with_overrides(seed=args.seed, output_dir=args.out, mesh=args.mesh)
        runner = LabRunner(config, fmt=args.format)
        mesh = args.mesh

        if args.command == "simulate":
            return runner.run_simulate(args.kind, args.n, args.replicates)
        if args.command == "stairfill":
            return runner.run_stairfill(args.path, args.output, mesh)
        if args.command == "distance":
            return runner.run_distance(args.first, args.second, args.metric, mesh or 0.01, args.T)
        if args.command == "certify":
            return runner.run_certify(args.limit, args.sequence, args.eps, args.T)
        if args.command == "converge":
            return runner.run_converge()
        if args.command == "example1":
            return runner.run_example1(args.eps, args.n_max, mesh)
        if args.command == "proptest":
            return runner.run_proptest(args.cases, args.suite, args.mutation)
        if args.command == "preserve":
            return runner.run_preserve(args.n_values, mesh)
        parser.error(f"subcomando desconocido '{args.command}'")

    except USAGE_ERRORS as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"Error de uso: {e}")
        return 2

    except LAB_ERRORS as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"Error: {e}")
        return 1

    except KeyboardInterrupt:
        print("\n\nInterrumpido")
        return 1

    except Exception as e:
        logger.error(f"Error fatal: {e}")
        print(f"Error fatal: {e}")
        return 1
    return 1


if __name__ == "__main__":
    sys.exit(main())
