import numpy as np
import pytest

from nary_retrieval.dataset.ground_truth import brute_force_knn
from nary_retrieval.models.matrix import DataMatrix
from nary_retrieval.shared import DataError
from test.shared import random_matrix


def test_small_example():
    base = DataMatrix(np.array([[0.0, 1.0, 5.0], [0.0, 0.0, 0.0]]))
    queries = DataMatrix(np.array([[0.4], [0.0]]))
    [neighbors] = brute_force_knn(base, queries, 2)
    assert neighbors.ids == [0, 1]
    assert neighbors.distances == pytest.approx([0.4, 0.6])


def test_query_equal_to_base_point_comes_first():
    base = random_matrix(1, 4, 30)
    [neighbors] = brute_force_knn(base, base.columns([17]), 3)
    assert neighbors.ids[0] == 17
    assert neighbors.distances[0] == 0.0


def test_ties_go_to_smaller_id():
    base = DataMatrix(np.array([[1.0, -1.0, 1.0], [0.0, 0.0, 0.0]]))
    [neighbors] = brute_force_knn(base, DataMatrix(np.zeros((2, 1))), 3)
    assert neighbors.ids == [0, 1, 2]


def test_matches_full_sort_oracle_with_threads():
    base = random_matrix(2, 6, 100)
    queries = random_matrix(3, 6, 300)
    result = brute_force_knn(base, queries, 10, threads=3)
    assert len(result) == 300
    for q, neighbors in enumerate(result):
        dists = np.sqrt(((base.values - queries.values[:, [q]]) ** 2).sum(axis=0))
        oracle = sorted(range(100), key=lambda i: (dists[i], i))[:10]
        assert neighbors.query_id == q
        assert neighbors.ids == oracle
        assert np.all(np.diff(neighbors.distances) >= 0)
    assert [n.ids for n in brute_force_knn(base, queries, 10, threads=1)] == [n.ids for n in result]


def test_errors():
    base = random_matrix(0, 3, 5)
    with pytest.raises(ValueError):
        brute_force_knn(base, base, 6)
    with pytest.raises(DataError):
        brute_force_knn(base, random_matrix(0, 2, 5), 1)
