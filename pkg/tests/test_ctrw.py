"""Tests de los pares de renovación, el proceso de conteo y los tres CTRW."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from joblib import parallel_backend

from src.paths.cadlag import PathDomainError
from src.paths.transforms import stair_fill
from src.sim.ctrw import (
    CtrwModel,
    GenerationOverflowError,
    PathEnsemble,
    RenewalPair,
    counting_many,
    counting_process,
    cpctrw_path,
    ctrw_path,
    default_exponents,
    octrw_path,
    path_of_kind,
    sample_renewal_pair,
    simulate_ensemble,
)
from src.sim.samplers import ModelError

DETERMINISTIC = CtrwModel(jump_dist="deterministic", wait_dist="deterministic",
                          jump_scale_exponent=1.0, wait_scale_exponent=1.0)


class TestRenewalPair:

    def test_deterministic_renewals(self):
        pair = sample_renewal_pair(DETERMINISTIC, 1, 3.0, seed=1)
        np.testing.assert_array_equal(pair.renewal_times, [0, 1, 2, 3, 4])
        np.testing.assert_array_equal(pair.positions[:, 0], [0, 1, 2, 3, 4])
        assert pair.renewal_count == 4

    def test_scaled_nodes(self):
        pair = sample_renewal_pair(CtrwModel(), 4, 1.0, seed=3)
        times = pair.renewal_times
        assert times[-1] > 1.0 >= times[-2]
        np.testing.assert_allclose(pair.T_path.times, np.arange(pair.renewal_count + 1) / 4)
        assert np.all(np.diff(times) > 0)

    def test_same_seed_same_pair(self):
        a = sample_renewal_pair(CtrwModel(), 10, 1.0, seed=5, replicate=2)
        b = sample_renewal_pair(CtrwModel(), 10, 1.0, seed=5, replicate=2)
        c = sample_renewal_pair(CtrwModel(), 10, 1.0, seed=5, replicate=3)
        np.testing.assert_array_equal(a.renewal_times, b.renewal_times)
        np.testing.assert_array_equal(a.positions, b.positions)
        assert not np.array_equal(a.renewal_times[:3], c.renewal_times[:3])

    def test_draw_budget(self):
        model = CtrwModel(max_draws=10)
        with pytest.raises(GenerationOverflowError):
            sample_renewal_pair(model, 1, 100.0, seed=1)

    def test_from_increments_validation(self):
        with pytest.raises(ModelError):
            RenewalPair.from_increments([1.0, 2.0], [1.0])
        with pytest.raises(ModelError):
            RenewalPair.from_increments([1.0, 2.0], [1.0, 0.0])

    def test_invalid_sampling_arguments(self):
        with pytest.raises(ModelError):
            sample_renewal_pair(CtrwModel(), 0, 1.0, seed=1)
        with pytest.raises(ModelError):
            sample_renewal_pair(CtrwModel(), 1, 0.0, seed=1)


class TestCounting:

    @pytest.fixture
    def pair(self):
        return RenewalPair.from_increments([0.0, 0.0, 0.0], [0.5, 1.5, 1.0])

    @pytest.mark.parametrize("t,expected", [(0.0, 0), (0.4, 0), (0.5, 1), (2.0, 2), (2.9, 2), (3.0, 3)])
    def test_counting(self, pair, t, expected):
        assert counting_process(pair.T_path, 1, t) == expected

    def test_out_of_range(self, pair):
        with pytest.raises(PathDomainError):
            counting_process(pair.T_path, 1, 3.5)
        with pytest.raises(PathDomainError):
            counting_process(pair.T_path, 1, -0.1)

    @settings(deadline=None, max_examples=60, derandomize=True)
    @given(
        waits=st.lists(st.floats(0.01, 2.0), min_size=2, max_size=20),
        fraction=st.floats(0.0, 1.0),
    )
    def test_first_exceedance(self, waits, fraction):
        pair = RenewalPair.from_increments(np.zeros(len(waits)), waits)
        t = fraction * pair.last_renewal
        k = int(counting_many(pair.T_path, 1, [t])[0])
        times = pair.renewal_times
        assert times[k] <= t
        assert k == len(times) - 1 or times[k + 1] > t


class TestPathKinds:

    def test_ctrw(self, small_pair):
        R = ctrw_path(small_pair)
        assert R.horizon == 2.0
        assert R.eval(0.25)[0] == 0.0
        assert R.eval(1.0)[0] == 1.0
        assert R.eval(2.0)[0] == -1.0

    def test_octrw(self, small_pair):
        X = octrw_path(small_pair, 1.5)
        assert X.eval(0.25)[0] == 1.0
        assert X.eval(1.0)[0] == -1.0

    def test_octrw_needs_overshoot(self, small_pair):
        with pytest.raises(PathDomainError):
            octrw_path(small_pair, 2.0)

    def test_cpctrw(self, small_pair):
        X = cpctrw_path(small_pair)
        assert X.eval(0.25)[0] == pytest.approx(0.5)
        assert X.eval(1.25)[0] == pytest.approx(0.0)
        assert X.discontinuities() == []

    def test_cpctrw_is_filled_ctrw(self):
        pair = sample_renewal_pair(CtrwModel(), 20, 1.0, seed=9)
        filled = stair_fill(ctrw_path(pair))
        grid = np.linspace(0.0, pair.last_renewal, 301)
        np.testing.assert_allclose(cpctrw_path(pair).eval_many(grid), filled.eval_many(grid), atol=1e-12)

    def test_restricted_cpctrw(self, small_pair):
        X = cpctrw_path(small_pair, 1.25)
        assert X.horizon == 1.25
        assert X.eval(1.25)[0] == pytest.approx(0.0)

    def test_unknown_kind(self, small_pair):
        with pytest.raises(ModelError):
            path_of_kind(small_pair, "levy")


class TestModel:

    @pytest.mark.parametrize("kwargs", [
        {"jump_dist": "levy"},
        {"wait_dist": "uniform"},
        {"wait_scale": 0.0},
        {"wait_dist": "stable", "beta": 1.2},
        {"jump_dist": "stable", "alpha": 2.5},
        {"dim": 0},
        {"jump_dist": "table"},
        {"wait_scale_exponent": 0.0},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ModelError):
            CtrwModel(**kwargs)

    def test_from_dict_defaults(self):
        model = CtrwModel.from_dict({"wait_dist": "pareto", "beta": 0.7, "unknown": 1})
        assert model.wait_scale_exponent == pytest.approx(1 / 0.7)
        assert model.jump_scale_exponent == 0.5

    def test_from_dict_table(self):
        model = CtrwModel.from_dict({"jump_dist": "table", "jump_table": [[1, 0], [0, 1]], "dim": 2})
        assert model.jump_table == ((1, 0), (0, 1))
        assert model.to_dict()["jump_table"] == [[1, 0], [0, 1]]

    @pytest.mark.parametrize("args,expected", [
        (("gaussian", 2.0, "exponential", 1.0), (0.5, 1.0)),
        (("stable", 1.5, "pareto", 0.5), (1 / 1.5, 2.0)),
        (("deterministic", 2.0, "deterministic", 1.0), (1.0, 1.0)),
    ])
    def test_default_exponents(self, args, expected):
        assert default_exponents(*args) == pytest.approx(expected)


class TestEnsemble:

    def test_shapes(self):
        ens = simulate_ensemble(CtrwModel(), 10, 1.0, 5, seed=2, eval_times=(0.5, 1.0))
        assert ens.marginals.shape == (5, 2, 1)
        assert len(ens.paths) == 5
        assert ens.kind == "cpctrw"
        assert ens.metadata()["generator"] == "numpy.random.Philox"

    def test_independent_of_jobs(self):
        kwargs = dict(replicates=6, seed=4, kind="ctrw", eval_times=(0.3, 0.9), keep_paths=False)
        serial = simulate_ensemble(CtrwModel(), 10, 1.0, n_jobs=1, **kwargs)
        with parallel_backend("threading"):
            parallel = simulate_ensemble(CtrwModel(), 10, 1.0, n_jobs=2, **kwargs)
        np.testing.assert_array_equal(serial.marginals, parallel.marginals)
        assert serial.paths == []

    def test_eval_times_in_horizon(self):
        with pytest.raises(PathDomainError):
            simulate_ensemble(CtrwModel(), 10, 1.0, 2, seed=1, eval_times=(1.5,))

    def test_unknown_kind(self):
        with pytest.raises(ModelError):
            simulate_ensemble(CtrwModel(), 10, 1.0, 2, seed=1, kind="limit")

    def test_save_and_load(self, tmp_path):
        ens = simulate_ensemble(CtrwModel(), 5, 1.0, 3, seed=8, eval_times=(0.5,))
        path = ens.save(tmp_path / "ens.jsonl")
        loaded = PathEnsemble.load(path)
        np.testing.assert_array_equal(loaded.marginals, ens.marginals)
        assert loaded.paths == ens.paths
        assert loaded.n == 5

    def test_frame_and_csv(self, tmp_path):
        ens = simulate_ensemble(CtrwModel(dim=2), 5, 1.0, 3, seed=8, eval_times=(0.5, 1.0), keep_paths=False)
        frame = ens.to_frame()
        assert list(frame.columns) == ["replicate", "t", "v1", "v2"]
        assert len(frame) == 6
        ens.save(tmp_path / "ens.csv", fmt="csv")
        assert (tmp_path / "ens.csv").read_text().startswith("replicate,t,v1,v2")

    def test_unknown_format(self, tmp_path):
        ens = simulate_ensemble(CtrwModel(), 5, 1.0, 1, seed=8)
        with pytest.raises(ValueError):
            ens.save(tmp_path / "ens.txt", fmt="xml")
