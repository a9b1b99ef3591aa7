import numpy as np
import pytest

from nary_retrieval.distance.ranking import RankedList
from nary_retrieval.evaluation.recall import RecallCurve, auc_recall, recall_at_r
from nary_retrieval.models.matrix import NeighborList
from nary_retrieval.shared import DataError


def ranked(ids) -> RankedList:
    return RankedList(ids=ids, scores=np.arange(len(ids), dtype=np.float64), metric="hamming")


def truth(query_id, nearest) -> NeighborList:
    return NeighborList(query_id=query_id, ids=[nearest], distances=[0.0])


def test_perfect_top_one():
    retrieved = [ranked([i, (i + 1) % 5, (i + 2) % 5]) for i in range(5)]
    curve = recall_at_r(retrieved, [truth(i, i) for i in range(5)], [1, 2, 3])
    assert curve.recall == (1.0, 1.0, 1.0)


def test_full_random_ranking_finds_everything():
    rng = np.random.default_rng(0)
    retrieved = [ranked(rng.permutation(50)) for _ in range(20)]
    curve = recall_at_r(retrieved, [truth(i, int(rng.integers(50))) for i in range(20)], [1, 10, 50])
    assert curve.at(50) == 1.0
    assert list(curve.recall) == sorted(curve.recall)


def test_counts_hits_within_r():
    retrieved, ground_truth = [], []
    for i in range(100):
        ids = list(range(100, 120))
        nearest = ids[i % 10] if i < 50 else 999
        retrieved.append(ranked(ids))
        ground_truth.append(truth(i, nearest))
    curve = recall_at_r(retrieved, ground_truth, [1, 5, 10, 20], method="pq", bit_budget=64)
    assert curve.at(10) == 0.5
    assert curve.at(1) == 0.05
    assert curve.at(5) == 0.25
    assert (curve.method, curve.bit_budget) == ("pq", 64)


@pytest.mark.parametrize("level", [1.0, 0.5, 0.0])
def test_auc_of_constant_curve(level):
    assert auc_recall(RecallCurve(r_grid=[1, 2, 4, 8, 1024], recall=[level] * 5)) == pytest.approx(level)


def test_auc_matches_hand_trapezoid():
    curve = RecallCurve(r_grid=[1, 2, 8, 16], recall=[0.1, 0.3, 0.6, 0.9])
    # log2 positions 0, 1, 3, 4
    area = (0.1 + 0.3) / 2 * 1 + (0.3 + 0.6) / 2 * 2 + (0.6 + 0.9) / 2 * 1
    assert auc_recall(curve) == pytest.approx(area / 4)


def test_single_point_auc():
    assert auc_recall(RecallCurve(r_grid=[8], recall=[0.4])) == 0.4


def test_invalid_curves():
    with pytest.raises(ValueError):
        RecallCurve(r_grid=[4, 2], recall=[0.5, 0.6])
    with pytest.raises(ValueError):
        RecallCurve(r_grid=[], recall=[])
    with pytest.raises(DataError):
        RecallCurve(r_grid=[1], recall=[1.5])


def test_missing_ground_truth():
    with pytest.raises(DataError):
        recall_at_r([ranked([0])], [], [1])
    with pytest.raises(DataError):
        recall_at_r([ranked([0])], [NeighborList(query_id=0)], [1])
