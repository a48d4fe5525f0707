"""Tests de la representación por nodos: evaluación, η, θ, saltos y serialización."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.paths.cadlag import (
    HOLD,
    INF,
    LINEAR,
    CadlagPath,
    MonotonePath,
    PathDomainError,
    graph_vertices,
    load_path,
    restrict,
    sample,
    save_path,
)


step_knots = st.lists(
    st.tuples(st.integers(1, 8), st.integers(-2, 2)),
    min_size=1,
    max_size=20,
)


def build_step(pairs, tail=1):
    times = np.concatenate([[0.0], np.cumsum([g for g, _ in pairs[1:]]) / 8.0])
    values = [v for _, v in pairs]
    return CadlagPath.from_arrays(times, np.asarray(values, dtype=float), HOLD, float(times[-1] + tail / 8.0))


class TestEvaluation:

    def test_values_of_reference_path(self, p1):
        assert p1.eval(2)[0] == 5
        assert p1.eval(1)[0] == 5
        assert p1.eval(0)[0] == 0
        assert p1.eval(4)[0] == 2

    def test_left_limits(self, p1):
        assert p1.left_limit(1)[0] == 0
        assert p1.left_limit(2)[0] == 5
        assert p1.left_limit(3)[0] == 5

    def test_left_limit_at_zero_is_domain_error(self, p1):
        with pytest.raises(PathDomainError):
            p1.left_limit(0)

    @pytest.mark.parametrize("t", [-0.1, 4.5, math.nan])
    def test_eval_outside_domain(self, p1, t):
        with pytest.raises(PathDomainError):
            p1.eval(t)

    def test_linear_segment_with_explicit_end(self):
        path = CadlagPath([(0, 0, LINEAR, 2), (1, 5, HOLD)], 2)
        assert path.eval(0.5)[0] == 1.0
        assert path.left_limit(1)[0] == 2.0
        assert path.is_jump_time(1)

    def test_multidimensional_values(self):
        path = CadlagPath([(0, [0, 1], HOLD), (1, [2, 3], HOLD)], 2)
        assert path.dim == 2
        np.testing.assert_array_equal(path.eval_many([0.5, 1.5]), [[0, 1], [2, 3]])

    def test_open_right_horizon_is_undetermined(self):
        path = CadlagPath([(0, 0, HOLD)], 1, open_right=True)
        with pytest.raises(PathDomainError):
            path.eval(1)
        assert path.left_limit(1)[0] == 0


class TestValidation:

    def test_first_knot_must_be_zero(self):
        with pytest.raises(PathDomainError):
            CadlagPath([(0.5, 0, HOLD)], 1)

    def test_times_strictly_increasing(self):
        with pytest.raises(PathDomainError):
            CadlagPath([(0, 0, HOLD), (1, 1, HOLD), (1, 2, HOLD)], 2)

    def test_horizon_before_last_knot(self):
        with pytest.raises(PathDomainError):
            CadlagPath([(0, 0, HOLD), (2, 1, HOLD)], 1)

    def test_unknown_mode(self):
        with pytest.raises(PathDomainError):
            CadlagPath([(0, 0, "cubic")], 1)

    def test_non_finite_value(self):
        with pytest.raises(PathDomainError):
            CadlagPath([(0, math.inf, HOLD)], 1)

    def test_final_linear_needs_end(self):
        with pytest.raises(PathDomainError):
            CadlagPath([(0, 0, LINEAR)], 1)

    def test_monotone_path_rejects_decrease(self, p1):
        with pytest.raises(PathDomainError):
            MonotonePath.from_path(p1)


class TestStructure:

    def test_discontinuities_of_reference_path(self, p1):
        jumps = p1.discontinuities()
        assert [(j.time, j.left_value[0], j.right_value[0], j.magnitude) for j in jumps] == [
            (1.0, 0.0, 5.0, 5.0),
            (3.0, 5.0, 2.0, 3.0),
        ]

    def test_constant_and_ramp_have_no_jumps(self, ramp):
        assert CadlagPath([(0, 3, HOLD)], 1).discontinuities() == []
        assert ramp.discontinuities() == []

    def test_repeated_value_knot_is_not_a_jump(self):
        path = CadlagPath([(0, 1, HOLD), (1, 1, HOLD), (2, 0, HOLD)], 3)
        assert path.jump_times().tolist() == [2.0]

    def test_eta(self, p1):
        assert p1.eta(2) == 1
        assert p1.eta(1) == 1
        assert p1.eta(0.5) == 0

    def test_theta(self, p1):
        assert p1.theta(2) == 3
        assert p1.theta(0.5) == 1
        assert p1.theta(3.5) == INF
        assert p1.theta(3) == 3

    def test_eta_on_linear_segment_is_t(self, ramp):
        assert ramp.eta(1.0) == 1.0
        assert ramp.theta(1.0) == 1.0

    def test_is_constant_on(self, p1):
        assert p1.is_constant_on(1, 3)
        assert not p1.is_constant_on(0.5, 1.5)
        assert p1.is_constant_on(1.2, 1.8)
        with pytest.raises(PathDomainError):
            p1.is_constant_on(2, 2)

    def test_large_jumps(self, p1):
        assert [j.time for j in p1.large_jumps(4, 4)] == [1.0]
        assert p1.large_jumps(6, 4) == []
        assert len(p1.large_jumps(0.5)) == 2
        with pytest.raises(PathDomainError):
            p1.large_jumps(0)

    def test_graph_vertices_of_reference_path(self, p1):
        verts = graph_vertices(p1)
        assert verts.tolist() == [[0, 0], [0, 1], [5, 1], [5, 3], [2, 3], [2, 4]]


class TestRestrictAndIO:

    def test_restrict_inside_linear_segment(self, ramp):
        cut = restrict(ramp, 1.0)
        assert cut.horizon == 1.0
        assert cut.eval(1.0)[0] == 0.5

    def test_restrict_outside_domain(self, p1):
        with pytest.raises(PathDomainError):
            restrict(p1, 5)

    def test_sample_grid(self, p1):
        frame = sample(p1, 1.0)
        assert frame["t"].tolist() == [0, 1, 2, 3, 4]
        assert frame["v1"].tolist() == [0, 5, 5, 2, 2]

    def test_save_and_load(self, p1, tmp_path):
        target = tmp_path / "paths" / "p1.json"
        save_path(p1, target)
        assert load_path(target) == p1

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(PathDomainError):
            load_path(tmp_path / "missing.json")

    def test_load_dimension_mismatch(self):
        with pytest.raises(PathDomainError):
            CadlagPath.from_dict({"dim": 2, "horizon": 1, "knots": [[0, 1, "hold"]]})


@settings(max_examples=60, deadline=None, derandomize=True)
@given(step_knots)
def test_eta_theta_bracket_every_knot(pairs):
    path = build_step(pairs)
    for t in path.times:
        assert path.eta(t) <= t <= path.theta(t)
        assert (path.theta(t) == t) == path.is_jump_time(t)


@settings(max_examples=60, deadline=None, derandomize=True)
@given(step_knots)
def test_jump_magnitudes_match_left_and_right_values(pairs):
    path = build_step(pairs)
    for jump in path.discontinuities():
        assert jump.magnitude > 0
        np.testing.assert_array_equal(path.left_limit(jump.time), jump.left_value)
        np.testing.assert_array_equal(path.eval(jump.time), jump.right_value)
