import numpy as np
import pytest

from nary_retrieval.encoders.subspace import (SubspaceCodebooks, refine_ck_indices, sc_encode, sc_reconstruct,
                                              split_dims, train_ckmeans, train_okmeans, train_pq)
from nary_retrieval.models.codes import NaryCodeSet
from nary_retrieval.models.matrix import DataMatrix
from nary_retrieval.quantcore.error import quantization_error
from nary_retrieval.quantcore.kmeans import kmeans
from nary_retrieval.shared import DataError, is_non_increasing
from test.shared import random_matrix, sphere_data


@pytest.mark.parametrize("dim,m,dims", [(8, 4, (2, 2, 2, 2)), (10, 4, (3, 3, 2, 2)), (5, 5, (1,) * 5), (7, 1, (7,))])
def test_split_dims(dim, m, dims):
    assert split_dims(dim, m) == dims


def test_pq_with_one_subspace_is_kmeans():
    x = random_matrix(0, 4, 120)
    pq = train_pq(x, 1, 6, seed=3)
    km = kmeans(x, 6, seed=3)
    assert np.array_equal(pq.codebooks[0], km.centers)
    assert pq.rotation is None
    assert np.array_equal(sc_encode(pq, x).codes[0], km.encode(x) + 1)
    assert np.allclose(sc_reconstruct(pq, sc_encode(pq, x)).values, km.reconstruct(km.encode(x)).values)


def test_pq_error_is_sum_of_block_errors():
    x = random_matrix(1, 10, 150)
    pq = train_pq(x, 4, 5, seed=2)
    error = quantization_error(x, sc_reconstruct(pq, sc_encode(pq, x)))
    assert error == pytest.approx(pq.objective, rel=1e-9)

    offsets = pq.offsets
    per_block = 0.0
    for i, centers in enumerate(pq.codebooks):
        block = DataMatrix(x.values[offsets[i]:offsets[i + 1]])
        labels = kmeans(block, 5, seed=2 + i).encode(block)
        per_block += float(np.sum((block.values - centers[:, labels]) ** 2))
    assert error == pytest.approx(per_block, rel=1e-9)


def test_pq_with_one_center_reconstructs_block_means():
    x = random_matrix(2, 6, 40)
    pq = train_pq(x, 3, 1)
    codes = sc_encode(pq, x)
    assert np.all(codes.codes == 1)
    expected = np.repeat(x.values.mean(axis=1, keepdims=True), x.count, axis=1)
    assert np.allclose(sc_reconstruct(pq, codes).values, expected)


def test_encoding_a_center_tuple_returns_its_indices():
    x = random_matrix(3, 4, 100)
    pq = train_pq(x, 2, 8, seed=1)
    point = np.concatenate([pq.codebooks[0][:, 5], pq.codebooks[1][:, 2]])
    codes = sc_encode(pq, DataMatrix(point.reshape(-1, 1)))
    assert codes.code(0).tolist() == [6, 3]


def test_encode_matches_nearest_center_oracle():
    x = random_matrix(4, 6, 60)
    ck = train_ckmeans(x, 3, 4, iters=3, seed=5)
    codes = sc_encode(ck, x)
    rotated = ck.rotation.T @ x.values
    offsets = ck.offsets
    for i, centers in enumerate(ck.codebooks):
        block = rotated[offsets[i]:offsets[i + 1]]
        sq = ((block[:, :, None] - centers[:, None, :]) ** 2).sum(axis=0)
        assert np.array_equal(codes.codes[i], np.argmin(sq, axis=1) + 1)


def test_ckmeans_from_identity_is_no_worse_than_pq():
    x = sphere_data(5, 8, 300)
    pq = train_pq(x, 4, 4, seed=1)
    ck = train_ckmeans(x, 4, 4, iters=10, seed=1, init="identity")
    assert ck.objective_history[0] == pytest.approx(pq.objective, rel=1e-12)
    assert ck.objective <= pq.objective * (1 + 1e-9)


def test_ckmeans_objective_is_non_increasing_and_matches_reconstruction():
    x = random_matrix(6, 8, 200)
    ck = train_ckmeans(x, 2, 8, iters=8, seed=3)
    assert len(ck.objective_history) == 10
    assert is_non_increasing(ck.objective_history, 1e-9)
    assert np.allclose(ck.rotation.T @ ck.rotation, np.eye(8), atol=1e-8)
    error = quantization_error(x, sc_reconstruct(ck, sc_encode(ck, x)))
    assert error == pytest.approx(ck.objective, rel=1e-9)


def test_ckmeans_single_subspace_is_no_worse_than_kmeans():
    x = random_matrix(7, 3, 90)
    ck = train_ckmeans(x, 1, 5, iters=3, seed=0, init="identity")
    assert ck.objective <= kmeans(x, 5, seed=0).objective + 1e-9


def test_okmeans_uses_two_centers_per_bit():
    ok = train_okmeans(random_matrix(8, 6, 50), 6, iters=2)
    assert (ok.m, ok.n) == (6, 2)
    assert ok.rotation is not None


@pytest.mark.parametrize("m,n,init", [(0, 2, "random"), (9, 2, "random"), (2, 0, "random"), (2, 2, "pca")])
def test_invalid_parameters(m, n, init):
    with pytest.raises(ValueError):
        train_ckmeans(random_matrix(0, 8, 20), m, n, init=init)


def test_arity_mismatch():
    pq = train_pq(random_matrix(0, 4, 20), 2, 3)
    with pytest.raises(DataError):
        sc_reconstruct(pq, NaryCodeSet(n=4, codes=[[1], [1]]))


def line_codebooks(positions) -> SubspaceCodebooks:
    centers = np.vstack([positions, np.zeros(len(positions))])
    return SubspaceCodebooks(n=len(positions), subspace_dims=[2], codebooks=[centers])


def test_refined_values_follow_center_positions():
    refined = refine_ck_indices(line_codebooks([0.0, 1.0, 4.0]))
    assert refined.index_values[0].tolist() == pytest.approx([-1.0, -0.5, 1.0])
    assert refined.degenerate_subspaces == (False,)
    assert np.array_equal(refined.codebooks[0], line_codebooks([0.0, 1.0, 4.0]).codebooks[0])


def test_two_centers_map_to_the_endpoints():
    refined = refine_ck_indices(line_codebooks([3.0, -2.0]))
    assert sorted(refined.index_values[0].tolist()) == [-1.0, 1.0]


def test_coinciding_centers_are_flagged():
    cb = SubspaceCodebooks(n=3, subspace_dims=[2, 1], codebooks=[np.ones((2, 3)), [[0.0, 1.0, 2.0]]])
    refined = refine_ck_indices(cb)
    assert np.array_equal(refined.index_values[0], np.zeros(3))
    assert refined.degenerate_subspaces == (True, False)


def test_refined_values_preserve_center_geometry():
    rng = np.random.default_rng(11)
    centers = np.array([3.0, 1.0, 0.5, 0.2])[:, None] * rng.normal(size=(4, 16))
    cb = SubspaceCodebooks(n=16, subspace_dims=[4], codebooks=[centers])
    values = refine_ck_indices(cb).index_values[0]
    assert values.min() == -1.0 and values.max() == 1.0

    upper = np.triu_indices(16, k=1)
    center_distances = np.linalg.norm(centers[:, :, None] - centers[:, None, :], axis=0)[upper]

    def correlation(v):
        return np.corrcoef(np.abs(v[:, None] - v[None, :])[upper], center_distances)[0, 1]

    shuffled = [correlation(rng.permutation(values)) for _ in range(200)]
    assert correlation(values) > np.percentile(shuffled, 95)
