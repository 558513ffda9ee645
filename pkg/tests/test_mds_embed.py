import json

import numpy as np
import pytest

from agreement import dissimilarity_matrix, from_values
from conftest import LINE_NAMES
from mds_embed import (
    classical_mds,
    embedding_to_csv,
    embedding_to_json,
    leading_dimensions,
    ordering,
    stress,
    symmetric_eigen,
)
from utils import ConfigurationError, EigenConvergenceError

ROSTER = [f"J{i}" for i in range(1, 10)]


def _distances(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


def _random_dissimilarities(rng) -> np.ndarray:
    upper = np.triu(rng.uniform(0.05, 1.0, size=(9, 9)), 1)
    return upper + upper.T


def test_exact_euclidean_distances_are_recovered():
    rng = np.random.default_rng(7)
    for _ in range(20):
        points = rng.uniform(-1, 1, size=(9, 2))
        d = _distances(points)
        d = d / (d.max() * 1.01)
        embedding = classical_mds(from_values(ROSTER, d), dimension=2)
        assert np.allclose(_distances(embedding.as_array()), d, atol=1e-9)
        assert not embedding.truncated


def test_one_dimension_is_first_column_of_two():
    rng = np.random.default_rng(11)
    for _ in range(100):
        matrix = from_values(ROSTER, _random_dissimilarities(rng))
        one = classical_mds(matrix, dimension=1)
        two = classical_mds(matrix, dimension=2)
        assert [c[0] for c in one.coords] == [c[0] for c in two.coords]
        assert leading_dimensions(two, 1).coords == one.coords


def test_eigen_reconstruction():
    rng = np.random.default_rng(3)
    for _ in range(50):
        a = rng.normal(size=(9, 9))
        a = (a + a.T) / 2
        values, vectors = symmetric_eigen(a)
        assert np.abs(a - vectors @ np.diag(values) @ vectors.T).max() <= 1e-9
        assert np.allclose(vectors.T @ vectors, np.eye(9), atol=1e-9)
        assert list(values) == sorted(values, reverse=True)


def test_equal_eigenvalues_are_ordered_by_eigenvector():
    values, vectors = symmetric_eigen(np.eye(3))
    assert list(values) == [1.0, 1.0, 1.0]
    assert np.array_equal(vectors, np.eye(3))


def test_iteration_cap_raises():
    a = np.array([[2.0, 1.0], [1.0, 3.0]])
    with pytest.raises(EigenConvergenceError, match="residual"):
        symmetric_eigen(a, max_sweeps=0)


def test_repeat_runs_are_bit_identical():
    rng = np.random.default_rng(5)
    matrix = from_values(ROSTER, _random_dissimilarities(rng))
    assert embedding_to_json(classical_mds(matrix)) == embedding_to_json(classical_mds(matrix))


def test_line_court_embeds_on_a_line(line_court, capsys):
    embedding = classical_mds(dissimilarity_matrix(line_court), dimension=2, anchor="Irving")
    assert ordering(embedding) == LINE_NAMES
    assert embedding.truncated
    assert all(c[1] == 0.0 for c in embedding.coords)
    x = [c[0] for c in embedding.coords]
    assert np.allclose(np.diff(x), 1 / 9, atol=1e-12)
    assert embedding.eigenvalues[0] == pytest.approx(60 / 81)
    assert "eigenvalue 2" in capsys.readouterr().err


def test_anchor_decides_the_sign(line_court):
    matrix = dissimilarity_matrix(line_court)
    assert classical_mds(matrix, anchor="Irving").x1()["Irving"] > 0
    assert classical_mds(matrix, anchor="Adams").x1()["Adams"] > 0
    assert classical_mds(matrix, anchor=["Nobody", "Adams"]).x1()["Adams"] > 0


def test_non_euclidean_input_is_truncated(capsys):
    rng = np.random.default_rng(2)
    embedding = classical_mds(from_values(ROSTER, _random_dissimilarities(rng)))
    assert embedding.truncated
    assert min(embedding.spectrum) < 0
    assert "not Euclidean" in capsys.readouterr().err


def test_bad_dimension(line_court):
    with pytest.raises(ConfigurationError):
        classical_mds(dissimilarity_matrix(line_court), dimension=3)


def test_stress_of_exact_embedding_is_zero():
    rng = np.random.default_rng(9)
    d = _distances(rng.uniform(-1, 1, size=(9, 2)))
    matrix = from_values(ROSTER, d / (d.max() * 1.01))
    assert stress(matrix, classical_mds(matrix)) == pytest.approx(0.0, abs=1e-15)


def test_exports(line_court):
    embedding = classical_mds(dissimilarity_matrix(line_court), dimension=1, anchor="Irving")
    assert embedding_to_csv(embedding).splitlines()[0] == "justice_name,x1,eigenvalue1"
    assert json.loads(embedding_to_json(embedding))["dimension"] == 1


def test_stress_grows_when_one_point_moves():
    rng = np.random.default_rng(11)
    d = _distances(rng.uniform(-1, 1, size=(9, 2)))
    matrix = from_values(ROSTER, d / (d.max() * 1.01))
    embedding = classical_mds(matrix)
    coords = [list(c) for c in embedding.coords]
    coords[0][0] += 0.1
    moved = embedding.model_copy(update={"coords": coords})
    assert stress(matrix, moved) > stress(matrix, embedding)
    assert stress(matrix, moved) > 1e-6
