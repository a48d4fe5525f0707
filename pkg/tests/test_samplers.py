"""Tests de los flujos Philox y de los generadores de saltos y esperas."""
import numpy as np
import pytest

from src.sim.samplers import (
    ModelError,
    draw_jumps,
    draw_waits,
    one_sided_stable,
    pareto,
    symmetric_stable,
)
from src.sim.streams import DEFAULT_SEED, GENERATOR_ID, get_seed, set_seed, stream

SAMPLE = 100_000


class TestStreams:

    def test_same_key_same_draws(self):
        a = stream(42, "ctrw", 10, 3).random(5)
        b = stream(42, "ctrw", 10, 3).random(5)
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize("other", [(43, "ctrw", 10, 3), (42, "limit", 10, 3), (42, "ctrw", 10, 4)])
    def test_different_keys_differ(self, other):
        a = stream(42, "ctrw", 10, 3).random(5)
        b = stream(*other).random(5)
        assert not np.array_equal(a, b)

    def test_generator_is_philox(self):
        assert isinstance(stream(1, "misc").bit_generator, np.random.Philox)
        assert GENERATOR_ID == "numpy.random.Philox"

    def test_unknown_purpose(self):
        with pytest.raises(ValueError):
            stream(1, "audio")

    @pytest.mark.parametrize("seed", [-1, 2 ** 64])
    def test_seed_range(self, seed):
        with pytest.raises(ValueError):
            stream(seed, "misc")

    def test_master_seed(self):
        set_seed(123)
        assert get_seed() == 123
        set_seed(DEFAULT_SEED)


class TestStable:

    def test_alpha_two_is_gaussian_with_variance_two(self):
        x = symmetric_stable(stream(1, "misc", 1), 2.0, SAMPLE)
        assert np.var(x) == pytest.approx(2.0, rel=0.03)

    def test_alpha_one_is_cauchy(self):
        x = symmetric_stable(stream(1, "misc", 2), 1.0, SAMPLE)
        assert np.median(np.abs(x)) == pytest.approx(1.0, rel=0.03)

    def test_characteristic_function(self):
        x = symmetric_stable(stream(1, "misc", 3), 1.5, SAMPLE, scale=2.0)
        # E[cos(θX)] = exp(-|2θ|^1.5) en θ = 0.5
        assert np.mean(np.cos(0.5 * x)) == pytest.approx(np.exp(-1.0), abs=0.01)

    def test_invalid_alpha(self):
        with pytest.raises(ModelError):
            symmetric_stable(stream(1, "misc"), 2.5, 10)

    def test_one_sided_laplace_transform(self):
        x = one_sided_stable(stream(1, "misc", 4), 0.5, SAMPLE)
        assert np.all(x > 0)
        assert np.mean(np.exp(-x)) == pytest.approx(np.exp(-1.0), abs=0.01)

    def test_one_sided_scale(self):
        x = one_sided_stable(stream(1, "misc", 5), 0.7, SAMPLE, scale=2.0)
        assert np.mean(np.exp(-0.5 * x)) == pytest.approx(np.exp(-1.0), abs=0.01)

    @pytest.mark.parametrize("beta", [0.0, 1.0, 1.3])
    def test_one_sided_needs_beta_below_one(self, beta):
        with pytest.raises(ModelError):
            one_sided_stable(stream(1, "misc"), beta, 10)


class TestPareto:

    def test_tail(self):
        x = pareto(stream(1, "misc", 6), 0.7, SAMPLE, scale=1.0)
        assert x.min() >= 1.0
        assert np.mean(x > 2.0) == pytest.approx(2.0 ** -0.7, abs=0.01)

    def test_invalid_beta(self):
        with pytest.raises(ModelError):
            pareto(stream(1, "misc"), 0.0, 10)


class TestDraws:

    def test_jump_shapes(self):
        rng = stream(1, "misc", 7)
        assert draw_jumps(rng, "gaussian", 4, 3).shape == (4, 3)
        assert draw_jumps(rng, "stable", 4, 2, alpha=1.2).shape == (4, 2)

    def test_deterministic_jumps(self):
        np.testing.assert_array_equal(draw_jumps(stream(1, "misc"), "deterministic", 3, 1, scale=0.5), [[0.5]] * 3)

    def test_table_jumps(self):
        values = draw_jumps(stream(1, "misc", 8), "table", 200, 1, table=(-1.0, 2.0))
        assert set(np.unique(values)) <= {-1.0, 2.0}
        rows = draw_jumps(stream(1, "misc", 9), "table", 50, 2, table=((1.0, 0.0), (0.0, 1.0)))
        assert rows.shape == (50, 2)
        assert np.all(rows.sum(axis=1) == 1.0)

    def test_table_dimension_mismatch(self):
        with pytest.raises(ModelError):
            draw_jumps(stream(1, "misc"), "table", 5, 3, table=((1.0, 0.0),))

    def test_unknown_jump_kind(self):
        with pytest.raises(ModelError):
            draw_jumps(stream(1, "misc"), "levy", 5, 1)

    @pytest.mark.parametrize("kind,beta", [("exponential", 1.0), ("pareto", 0.7), ("stable", 0.6),
                                           ("deterministic", 1.0)])
    def test_waits_are_positive(self, kind, beta):
        waits = draw_waits(stream(1, "misc", 10), kind, 1000, 1.0, beta)
        assert waits.shape == (1000,)
        assert np.all(waits > 0)

    def test_unknown_wait_kind(self):
        with pytest.raises(ModelError):
            draw_waits(stream(1, "misc"), "uniform", 5)
