"""Tests del grafo completado, subconjuntos ordenados, d̂ y d*."""
import numpy as np
import pytest

from src.metrics.graph import (
    InvalidSubsetError,
    MeshError,
    SubsetSizeError,
    completed_graph,
    hausdorff_lower,
    order_consistent_distance,
    ordered_subset,
    point_to_polyline,
    subset_distance,
    subset_from_positions,
    vertex_subset,
)
from src.paths.cadlag import HOLD, CadlagPath


def shifted_indicator(start: float, horizon: float = 2.0) -> CadlagPath:
    return CadlagPath([(0, 0, HOLD), (start, 1, HOLD)], horizon)


def test_vertices_of_indicator(indicator):
    graph = completed_graph(indicator)
    assert graph.vertices.tolist() == [[0, 0], [0, 1], [1, 1], [1, 2]]
    assert graph.vertical_segments() == 1


def test_continuous_path_has_no_vertical_segments(ramp):
    graph = completed_graph(ramp)
    assert graph.vertical_segments() == 0
    assert graph.n_vertices == 2


def test_reference_path_has_six_vertices(p1):
    graph = completed_graph(p1)
    assert graph.n_vertices == 6
    assert graph.vertical_segments() == 2


def test_graph_restricted_to_T(p1):
    graph = completed_graph(p1, 2.0)
    assert graph.vertices.tolist() == [[0, 0], [0, 1], [5, 1], [5, 2]]


def test_corners_give_unit_gap(indicator):
    graph = completed_graph(indicator)
    assert order_consistent_distance(vertex_subset(graph), graph) == 1.0


def test_midpoints_halve_the_gap(indicator):
    graph = completed_graph(indicator)
    A = subset_from_positions(graph, np.arange(0, 3.5, 0.5))
    assert order_consistent_distance(A, graph) == 0.5


def test_dense_subset_gap_equals_mesh(indicator):
    graph = completed_graph(indicator)
    _, positions = graph.refine(0.1)
    A = subset_from_positions(graph, positions)
    assert order_consistent_distance(A, graph) == pytest.approx(0.1)


def test_refine_rejects_bad_mesh(indicator):
    with pytest.raises(MeshError):
        completed_graph(indicator).refine(0.0)


def test_locate_vertices_and_midpoints(indicator):
    graph = completed_graph(indicator)
    positions = graph.locate([[0, 0], [0.5, 1], [1, 1.5], [1, 2]])
    np.testing.assert_allclose(positions, [0, 1.5, 2.5, 3])


class TestOrderedSubset:

    def test_valid_subset(self, indicator):
        graph = completed_graph(indicator)
        A = ordered_subset(graph, [[0, 0], [0, 1], [1, 1], [1, 2]])
        assert A.m == 3

    def test_point_off_graph(self, indicator):
        graph = completed_graph(indicator)
        with pytest.raises(InvalidSubsetError):
            ordered_subset(graph, [[0, 0], [0.5, 0.5], [1, 2]])

    def test_wrong_order(self, indicator):
        graph = completed_graph(indicator)
        with pytest.raises(InvalidSubsetError):
            ordered_subset(graph, [[0, 0], [1, 1], [0, 1], [1, 2]])

    def test_missing_endpoint(self, indicator):
        graph = completed_graph(indicator)
        with pytest.raises(InvalidSubsetError):
            ordered_subset(graph, [[0, 0], [1, 1]])

    def test_padding_with_duplicates_is_allowed(self, indicator):
        graph = completed_graph(indicator)
        A = ordered_subset(graph, [[0, 0], [0, 0], [1, 1], [1, 2]])
        assert len(A) == 4


class TestSubsetDistance:

    def test_identical_subsets(self, indicator):
        graph = completed_graph(indicator)
        A = vertex_subset(graph)
        assert subset_distance(A, A) == 0.0

    def test_time_shift(self, indicator):
        A = vertex_subset(completed_graph(indicator))
        B = subset_from_positions(completed_graph(indicator), A.positions)
        shifted = type(B)(points=B.points + np.array([0.0, 0.25]), positions=B.positions)
        assert subset_distance(A, shifted) == 0.25

    def test_corners_of_shifted_indicators(self):
        A = vertex_subset(completed_graph(shifted_indicator(1.0)))
        B = vertex_subset(completed_graph(shifted_indicator(1.25)))
        assert subset_distance(A, B) == 0.25

    def test_size_mismatch(self, indicator):
        graph = completed_graph(indicator)
        A = vertex_subset(graph)
        B = subset_from_positions(graph, [0.0, 3.0])
        with pytest.raises(SubsetSizeError):
            subset_distance(A, B)


def test_point_to_polyline_sup_norm(indicator):
    vertices = completed_graph(indicator).vertices
    dist = point_to_polyline(np.array([[0.5, 0.5], [0.0, 0.5], [1.0, 3.0]]), vertices)
    np.testing.assert_allclose(dist, [0.5, 0.0, 1.0])


def test_hausdorff_lower(indicator):
    shifted = completed_graph(shifted_indicator(1.25))
    graph = completed_graph(indicator)
    assert hausdorff_lower(graph, graph, 0.1) == 0.0
    assert hausdorff_lower(graph, shifted, 0.1) == pytest.approx(0.25)
    assert hausdorff_lower(shifted, graph, 0.1) == pytest.approx(0.25)
