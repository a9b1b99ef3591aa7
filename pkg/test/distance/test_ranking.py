import numpy as np
import pytest

from nary_retrieval.distance.euclidean import code_euclidean
from nary_retrieval.distance.metrics import CodeEuclideanMetric, HammingMetric, SymmetricMetric
from nary_retrieval.distance.ranking import RankedList, exhaustive_rank
from nary_retrieval.distance.tables import build_lookup_tables
from nary_retrieval.encoders.embedding import FeatureSource, codes_as_features
from nary_retrieval.encoders.lsq import LsqModel
from nary_retrieval.encoders.subspace import SubspaceCodebooks
from nary_retrieval.models.codes import BinaryCode, BinaryCodeSet, NaryCodeSet
from nary_retrieval.quantcore.quantizer import UniformQuantizer
from nary_retrieval.shared import DataError


def lsq_model(m, n) -> LsqModel:
    return LsqModel(W=np.eye(m), V=np.eye(m), quantizer=UniformQuantizer(n))


def test_code_euclidean():
    model = lsq_model(1, 3)
    assert code_euclidean(model, [1], [3]) == 4.0
    assert code_euclidean(model, [2], [2]) == 0.0


def test_code_euclidean_matches_feature_distance():
    rng = np.random.default_rng(0)
    model = lsq_model(5, 8)
    codes = NaryCodeSet(n=8, codes=rng.integers(1, 9, size=(5, 30)))
    features = codes_as_features(codes, FeatureSource.LSQ_LEVELS).values
    for j in range(1, 30):
        expected = float(np.sum((features[:, 0] - features[:, j]) ** 2))
        assert code_euclidean(model, codes.code(0), codes.code(j)) == pytest.approx(expected)
    metric = CodeEuclideanMetric(model.quantizer)
    assert metric.distances(codes.code(0), codes) == pytest.approx(np.sum((features - features[:, :1]) ** 2, axis=0))


def test_own_code_ranks_first():
    rng = np.random.default_rng(1)
    bits = rng.integers(0, 2, size=(32, 50))
    base = BinaryCodeSet.from_bits(bits)
    ranked = exhaustive_rank(base.code(17), base, HammingMetric(), 5)
    assert ranked.ids[0] == 17
    assert ranked.scores[0] == 0.0
    assert ranked.metric == "hamming"


def test_full_ranking_is_a_permutation():
    rng = np.random.default_rng(2)
    codes = NaryCodeSet(n=4, codes=rng.integers(1, 5, size=(6, 40)))
    ranked = exhaustive_rank(codes.code(3), codes, CodeEuclideanMetric(UniformQuantizer(4)), 40)
    assert sorted(ranked.ids.tolist()) == list(range(40))
    assert len(ranked) == 40


def test_matches_sort_everything_oracle():
    rng = np.random.default_rng(3)
    cb = SubspaceCodebooks(n=8, subspace_dims=[2, 2, 2, 2], codebooks=[rng.normal(size=(2, 8)) for _ in range(4)])
    metric = SymmetricMetric(build_lookup_tables(cb))
    codes = NaryCodeSet(n=8, codes=rng.integers(1, 9, size=(4, 200)))
    query = rng.integers(1, 9, size=4)
    distances = metric.distances(query, codes)
    oracle = sorted(range(200), key=lambda j: (distances[j], j))[:25]
    ranked = exhaustive_rank(query, codes, metric, 25)
    assert ranked.ids.tolist() == oracle
    assert np.all(np.diff(ranked.scores) >= 0)


def test_ties_go_to_smaller_ids():
    codes = BinaryCodeSet.from_bits(np.array([[1, 0, 0, 1], [0, 1, 0, 0]]))
    ranked = exhaustive_rank(BinaryCode.from_string("00"), codes, HammingMetric(), 4)
    assert ranked.ids.tolist() == [2, 0, 1, 3]
    assert ranked.top(2).tolist() == [2, 0]


def test_hamming_key_costs():
    costs = HammingMetric().key_costs(np.array([6, 0]), 8)
    assert costs[0].tolist() == [2, 3, 1, 2, 1, 2, 0, 1]
    assert costs[1].tolist() == [0, 1, 1, 2, 1, 2, 2, 3]


def test_level_key_costs_use_projection():
    metric = CodeEuclideanMetric(UniformQuantizer(3))
    costs = metric.key_costs(np.array([1]), 3, np.array([0.9]))
    assert costs[0].tolist() == pytest.approx([1.9, 0.9, 0.1])
    assert metric.key_costs(np.array([0]), 3)[0].tolist() == [0.0, 1.0, 2.0]


def test_ranked_list_validation():
    with pytest.raises(DataError):
        RankedList(ids=[1, 1], scores=[0.0, 1.0], metric="hamming")
    with pytest.raises(DataError):
        RankedList(ids=[1, 2], scores=[2.0, 1.0], metric="hamming")
    assert len(RankedList(ids=[1, 2], scores=[2.0, 1.0], metric="mih-score", descending=True)) == 2


def test_invalid_k():
    codes = NaryCodeSet(n=2, codes=[[1, 2]])
    with pytest.raises(ValueError):
        exhaustive_rank([1], codes, CodeEuclideanMetric(UniformQuantizer(2)), 3)
