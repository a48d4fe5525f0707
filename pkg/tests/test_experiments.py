"""Tests del KS de dos muestras, el estudio de marginales, el contraejemplo y los informes."""
import json

import numpy as np
import pytest

from src.lab.config import CONFIG_DIR, ConfigError, config_from_dict, load_config
from src.lab.constructions import counterexample_limit, counterexample_term, preserving_sequences
from src.lab.experiments import (
    EmptySampleError,
    counterexample_values,
    ks_critical_value,
    ks_statistic,
    run_example1,
    run_marginal_convergence,
    run_preservation_suite,
)
from src.lab.reports import report_metadata, write_report
from src.paths.cadlag import PathDomainError
from src.paths.transforms import stair_fill

HEAVY_CONFIG = CONFIG_DIR / "converge_heavy.yaml"

DETERMINISTIC = {
    "jump_dist": "deterministic",
    "wait_dist": "deterministic",
    "n_values": [1, 2, 4],
    "replicates": 100,
    "eval_times": [0.5, 1.0],
}


class TestKs:

    def test_shifted_samples(self):
        assert ks_statistic([1, 2, 3], [1.5, 2.5, 3.5]) == pytest.approx(1 / 3)

    def test_identical_and_disjoint(self):
        assert ks_statistic([1, 2, 3], [3, 2, 1]) == 0.0
        assert ks_statistic([1, 2], [5, 6, 7]) == 1.0

    def test_empty_sample(self):
        with pytest.raises(EmptySampleError):
            ks_statistic([], [1.0])

    def test_critical_value(self):
        assert ks_critical_value(10_000, 10_000) == pytest.approx(0.0230, abs=5e-4)

    def test_invalid_level(self):
        with pytest.raises(ValueError):
            ks_critical_value(10, 10, level=1.5)


class TestMarginalConvergence:

    def test_deterministic_model_matches_limit(self):
        report = run_marginal_convergence(config_from_dict(DETERMINISTIC))
        assert report.passed
        assert len(report.table) == 6
        assert report.table["ks"].max() == 0.0
        assert set(report.trends) == {"0.5", "1"}
        assert report.metadata["generator"] == "numpy.random.Philox"

    def test_needs_enough_replicates(self):
        with pytest.raises(ConfigError):
            run_marginal_convergence(config_from_dict(dict(DETERMINISTIC, replicates=50)))

    def test_needs_eval_times(self):
        with pytest.raises(ConfigError):
            run_marginal_convergence(config_from_dict(dict(DETERMINISTIC, eval_times=[])))

    def test_save(self, tmp_path):
        report = run_marginal_convergence(config_from_dict(DETERMINISTIC))
        written = report.save(tmp_path)
        assert written["report"] == tmp_path / "convergence.json"
        assert (tmp_path / "convergence_ks.csv").exists()
        assert json.loads(written["report"].read_text())["passed"] is True

    @pytest.mark.slow
    def test_brownian_limit(self):
        config = config_from_dict({"n_values": [10, 100, 1000], "replicates": 2000, "n_jobs": -1})
        assert run_marginal_convergence(config).passed

    def test_heavy_tailed_reduced(self):
        raw = load_config(HEAVY_CONFIG).raw
        config = config_from_dict(dict(raw, n_values=[20, 100], replicates=400, limit_mesh=0.01, n_jobs=1))
        assert config.model.wait_dist == "pareto"
        report = run_marginal_convergence(config)
        assert len(report.table) == 4
        assert report.passed, report.table.to_string()

    @pytest.mark.slow
    def test_heavy_tailed_limit(self):
        config = load_config(HEAVY_CONFIG)
        assert list(config.n_values) == [100, 1000, 10000]
        assert config.replicates == 10000
        report = run_marginal_convergence(config)
        for t, flag in report.trends.items():
            assert flag["decreasing"], f"t={t}\n{report.table.to_string()}"
            assert flag["final_below_critical"], f"t={t}\n{report.table.to_string()}"


class TestCounterexample:

    def test_values(self):
        assert counterexample_values(128) == [2, 4, 8, 16, 32, 64, 128]
        with pytest.raises(ValueError):
            counterexample_values(1)

    def test_terms(self):
        x, x4 = counterexample_limit(), counterexample_term(4)
        assert x4.eval(1.8)[0] == pytest.approx(1.25)
        assert x.eval(1.8)[0] == 1.0
        assert stair_fill(x).eval(1.5)[0] == pytest.approx(1.5)
        with pytest.raises(PathDomainError):
            counterexample_term(1)

    def test_small_run(self):
        report = run_example1(eps_list=(0.2,), n_max=32)
        assert report.passed, report.checks
        assert list(report.hypotheses["n"]) == [2, 4, 8, 16, 32]
        assert len(report.distances) == 15
        assert len(report.certificates) == 3

    @pytest.mark.slow
    def test_default_run(self):
        assert run_example1().passed


class TestPreservation:

    def test_sequences(self):
        names = [seq.name for seq in preserving_sequences()]
        assert names == ["shifted_closure", "lifted_levels", "ramp_then_stair"]

    def test_small_run(self, tmp_path):
        report = run_preservation_suite((4, 16), mesh=0.01)
        assert report.flags["counterexample"] == {"jump_gap_persists": True, "image_stays_away": True}
        for seq in preserving_sequences():
            assert report.flags[seq.name]["upper_trending_down"]
        report.save(tmp_path, "csv")
        assert (tmp_path / "preservation_sequences.csv").exists()
        assert not (tmp_path / "preservation.json").exists()

    @pytest.mark.slow
    def test_default_run(self):
        assert run_preservation_suite().passed


class TestReports:

    def test_metadata_has_no_timestamp(self):
        meta = report_metadata({"a": 1}, 5, extra=2)
        assert meta["seed"] == 5
        assert meta["extra"] == 2
        assert not any("time" in key for key in meta)

    def test_json_cleaning(self, tmp_path):
        payload = {"value": np.float64(0.5), "inf": float("inf"), "array": np.arange(3), "path": tmp_path}
        written = write_report(tmp_path, "demo", payload, fmt="json")
        body = json.loads(written["report"].read_text())
        assert body["value"] == 0.5
        assert body["inf"] == "inf"
        assert body["array"] == [0, 1, 2]
        assert body["path"] == str(tmp_path)

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            write_report(tmp_path, "demo", {}, fmt="xml")
