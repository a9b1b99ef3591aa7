import numpy as np
import pytest

from nary_retrieval.models.matrix import DataMatrix
from nary_retrieval.quantcore.error import quantization_error
from nary_retrieval.quantcore.kmeans import kmeans, update_centers
from nary_retrieval.shared import is_non_increasing
from test.shared import random_matrix


def test_two_separated_pairs():
    x = DataMatrix(np.array([[0.0, 0.0, 10.0, 10.0], [1.0, 1.0, 5.0, 5.0]]))
    model = kmeans(x, 2, seed=0)
    centers = sorted(map(tuple, model.centers.T))
    assert centers == [(0.0, 1.0), (10.0, 5.0)]
    assert model.objective == 0.0
    assert quantization_error(x, model.reconstruct(model.encode(x))) == 0.0


def test_single_cluster_is_mean():
    x = random_matrix(1, 3, 40)
    model = kmeans(x, 1, seed=5)
    assert np.allclose(model.centers[:, 0], x.values.mean(axis=1))


def test_objective_matches_reevaluation_and_decreases():
    x = random_matrix(2, 2, 50)
    model = kmeans(x, 4, seed=3, max_iters=20)
    labels = model.encode(x)
    recomputed = float(np.sum((x.values - model.centers[:, labels]) ** 2))
    assert abs(model.objective - recomputed) <= 1e-9 * max(1.0, recomputed)
    assert is_non_increasing(model.objective_history, 1e-12)


def test_beats_global_mean():
    x = random_matrix(3, 5, 120)
    model = kmeans(x, 6, seed=1)
    mean_error = float(np.sum((x.values - x.values.mean(axis=1, keepdims=True)) ** 2))
    assert model.objective <= mean_error


def test_deterministic_given_seed():
    x = random_matrix(4, 4, 80)
    assert np.array_equal(kmeans(x, 5, seed=9).centers, kmeans(x, 5, seed=9).centers)


def test_empty_cluster_is_reseeded_to_farthest_point():
    points = np.array([[0.0], [1.0], [10.0]])
    centers = np.array([[0.5], [100.0]])
    labels = np.array([0, 0, 0])
    sq = np.array([0.25, 0.25, 90.25])
    updated = update_centers(points, labels, centers, sq)
    assert updated[0, 0] == pytest.approx(11.0 / 3.0)
    assert updated[1, 0] == 10.0
    assert update_centers(points, labels, centers)[1, 0] == 100.0


@pytest.mark.parametrize("k,max_iters", [(0, 5), (11, 5), (2, 0)])
def test_invalid_parameters(k, max_iters):
    with pytest.raises(ValueError):
        kmeans(random_matrix(0, 2, 10), k, max_iters=max_iters)
