"""Ranked retrieval results and the exhaustive scan ranker."""
import logging
from dataclasses import dataclass

import numpy as np

from nary_retrieval.distance.metrics import CodeMetric
from nary_retrieval.shared import DataError, reject_if

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RankedList:
    """Retrieved base ids in rank order with their scores.

    :ivar metric: name of the metric or strategy that produced the ranking.
    :ivar descending: True if higher scores rank first (index scores), False for distances.
    """

    ids: np.ndarray
    scores: np.ndarray
    metric: str
    descending: bool = False

    def __post_init__(self):
        ids = np.array(self.ids, dtype=np.int64, copy=True).reshape(-1)
        scores = np.array(self.scores, dtype=np.float64, copy=True).reshape(-1)
        reject_if(len(ids) != len(scores), "ids and scores differ in length", DataError)
        reject_if(len(np.unique(ids)) != len(ids), "ranked ids must be unique", DataError)
        steps = np.diff(scores)
        reject_if(np.any(steps > 0) if self.descending else np.any(steps < 0),
                  f"scores are not ordered for metric {self.metric}", DataError)
        for a in (ids, scores):
            a.setflags(write=False)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "scores", scores)

    def __len__(self):
        return len(self.ids)

    def top(self, r: int) -> np.ndarray:
        return self.ids[:r]


def exhaustive_rank(query_code, base_codes, metric: CodeMetric, k: int) -> RankedList:
    """Scores every base code and keeps the k nearest, ties by smaller id.

    :param query_code: One code, in the form the metric expects.
    :param base_codes: The full base code set.
    :param metric: The code-space metric.
    :param k: Result length, 1 <= k <= N.
    """
    reject_if(k < 1 or k > base_codes.count, f"k must lie in 1..{base_codes.count}, got {k}", ValueError)
    distances = metric.distances(query_code, base_codes)
    order = np.argsort(distances, kind="stable")[:k]
    return RankedList(ids=order, scores=distances[order], metric=metric.name)
