"""Tests de los certificados M1 y de las hipótesis de escalera."""
import json

import numpy as np
import pytest

from src.lab.constructions import counterexample_identity, counterexample_limit, counterexample_term
from src.metrics.certificates import (
    M1Certificate,
    build_m1_certificate,
    check_certificate,
    common_horizon,
    jump_correspondence,
    stair_hypotheses,
)
from src.metrics.graph import InvalidSubsetError, OrderedSubset, completed_graph, subset_from_positions, vertex_subset
from src.paths.cadlag import PathDomainError, step_path
from src.paths.transforms import stair_fill

NS = [2, 4, 8, 16, 32]


@pytest.fixture(scope="module")
def sequence():
    return [counterexample_term(n) for n in NS]


@pytest.fixture(scope="module")
def certificate(sequence):
    return build_m1_certificate(counterexample_limit(), sequence, 0.2)


def test_certificate_found_for_converging_sequence(certificate, sequence):
    assert certificate.found
    assert certificate.n1 <= len(NS)
    assert check_certificate(certificate, counterexample_limit(), sequence)


def test_subsets_have_the_size_of_A(certificate):
    for subset in certificate.subsets[certificate.n1 - 1:]:
        assert len(subset) == len(certificate.A)


def test_image_sequence_not_certified_against_identity(sequence):
    images = [stair_fill(xn) for xn in sequence]
    cert = build_m1_certificate(counterexample_identity(), images, 0.2)
    assert not cert.found
    assert not check_certificate(cert, counterexample_identity(), images)


def test_collapsed_subset_violates_bounds(certificate, sequence):
    last = len(NS) - 1
    graph = completed_graph(sequence[last], certificate.T)
    m = certificate.A.m
    collapsed = subset_from_positions(graph, np.array([0.0] * m + [graph.n_vertices - 1.0]))
    subsets = list(certificate.subsets)
    subsets[last] = collapsed
    broken = M1Certificate(certificate.epsilon, certificate.T, certificate.A, subsets, certificate.n1)
    assert not check_certificate(broken, counterexample_limit(), sequence)


def test_coarse_A_is_rejected(indicator):
    graph = completed_graph(indicator)
    A = vertex_subset(graph)
    cert = M1Certificate(epsilon=0.5, T=2.0, A=A, subsets=[A], n1=1)
    assert not check_certificate(cert, indicator, [indicator])


def test_subset_off_graph_raises(certificate, sequence):
    last = len(NS) - 1
    given = certificate.subsets[last]
    points = given.points.copy()
    points[1, 0] += 0.4
    subsets = list(certificate.subsets)
    subsets[last] = OrderedSubset(points=points, positions=given.positions)
    broken = M1Certificate(certificate.epsilon, certificate.T, certificate.A, subsets, certificate.n1)
    with pytest.raises(InvalidSubsetError):
        check_certificate(broken, counterexample_limit(), sequence)


def test_certificate_serialization(certificate, tmp_path):
    target = tmp_path / "cert.json"
    certificate.save(target)
    data = json.loads(target.read_text())
    assert data["found"] is True
    assert data["m"] == certificate.m
    assert len(data["A"]) == certificate.m + 1


def test_common_horizon_moves_off_jumps(indicator):
    assert common_horizon([indicator, indicator], 1.0, 0.25) == 1.25
    assert common_horizon([indicator], None, 0.25) == 2.0


def test_stair_hypotheses_of_counterexample(sequence):
    gaps = stair_hypotheses(counterexample_limit(), sequence, 1.5)
    assert gaps["n"].tolist() == [1, 2, 3, 4, 5]
    row = gaps.iloc[1]
    assert row["eta_gap"] == 0.0
    assert row["theta_gap"] == 0.25
    assert row["jump_gap"] == 0.75


def test_stair_hypotheses_outside_stair(sequence):
    with pytest.raises(PathDomainError):
        stair_hypotheses(counterexample_limit(), sequence, 0.5)


def test_jump_correspondence_nearest_then_earlier():
    x = step_path([0.0, 1.0], [0.0, 1.0], 2.0)
    tied = step_path([0.0, 0.75, 1.25], [0.0, 0.5, 1.0], 2.0)
    nearer = step_path([0.0, 0.75, 1.125], [0.0, 0.5, 1.0], 2.0)
    assert jump_correspondence(x, tied, 0.5) == [(1.0, 0.75)]
    assert jump_correspondence(x, nearer, 0.5) == [(1.0, 1.125)]


def test_jump_correspondence_without_candidate():
    x = step_path([0.0, 1.0], [0.0, 1.0], 2.0)
    far = step_path([0.0, 1.75], [0.0, 1.0], 2.0)
    small = step_path([0.0, 1.0], [0.0, 0.125], 2.0)
    assert jump_correspondence(x, far, 0.5) == [(1.0, None)]
    assert jump_correspondence(x, small, 0.5) == [(1.0, None)]


def test_certificate_records_jump_matches(certificate):
    assert certificate.jump_matches == [[(2.0, 2.0)]] * len(NS)
    assert certificate.to_dict()["jump_matches"] == [[[2.0, 2.0]]] * len(NS)
