"""Score-accumulating multi-index-hash queries with key-substitution expansion.

A query looks up the bucket of its own key in every table; a base id scores one point per
visited bucket that contains it. While fewer than k ids were found, further (table, key)
substitutions are visited in order of their cost under the code metric. Candidates are
ranked by descending score, then ascending code-space distance, then id.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from nary_retrieval.distance.metrics import CodeEuclideanMetric, CodeMetric, HammingMetric
from nary_retrieval.distance.ranking import RankedList
from nary_retrieval.mih.index import CodeKind, MultiIndexHash
from nary_retrieval.quantcore.quantizer import UniformQuantizer
from nary_retrieval.shared import reject_if

logger = logging.getLogger(__name__)

MIH_METRIC = "mih-score"


@dataclass(frozen=True)
class CandidateSet:
    """Candidate ids with their scores, descending by score and ascending by id within a score."""

    ids: np.ndarray
    scores: np.ndarray

    @staticmethod
    def from_scores(scores: np.ndarray) -> "CandidateSet":
        ids = np.flatnonzero(scores)
        order = np.lexsort((ids, -scores[ids]))
        return CandidateSet(ids=ids[order], scores=scores[ids][order])

    def __len__(self):
        return len(self.ids)


def default_metric(index: MultiIndexHash) -> CodeMetric:
    """Hamming for binary indexes, level-value distance on the uniform grid for n-ary ones."""
    if index.kind == CodeKind.BINARY:
        return HammingMetric()
    return CodeEuclideanMetric(UniformQuantizer(max(index.bucket_count, 2)))


def expansion_order(index: MultiIndexHash, query_keys: np.ndarray, metric: CodeMetric,
                    query_projection: Optional[np.ndarray] = None) -> list[tuple[int, int]]:
    """Every (table, key) pair other than the query's own keys, by ascending (cost, table, key)."""
    costs = metric.key_costs(query_keys, index.bucket_count, query_projection)
    tables, keys = np.meshgrid(np.arange(index.table_count), np.arange(index.bucket_count), indexing="ij")
    own = keys == np.asarray(query_keys)[:, None]
    tables, keys, costs = tables[~own], keys[~own], costs[~own]
    order = np.lexsort((keys, tables, costs))
    return [(int(t), int(v)) for t, v in zip(tables[order], keys[order])]


def expand(index: MultiIndexHash, query_keys: np.ndarray, metric: CodeMetric, visited: set,
           query_projection: Optional[np.ndarray] = None) -> Optional[tuple[int, int]]:
    """The cheapest (table, key) substitution not in visited, None once all are exhausted."""
    for pair in expansion_order(index, query_keys, metric, query_projection):
        if pair not in visited:
            return pair
    return None


def collect_candidates(index: MultiIndexHash, query_code, k: int, metric: CodeMetric,
                       query_projection: Optional[np.ndarray] = None) -> tuple[CandidateSet, int]:
    """Visits the query's buckets, expanding until k candidates are found or all keys were visited.

    :return: (candidates, number of expansion steps).
    """
    query_keys = index.query_keys(query_code)
    scores = np.zeros(index.count, dtype=np.int64)
    for table, key in enumerate(query_keys):
        scores[index.bucket(table, key)] += 1

    expansions = 0
    found = int(np.count_nonzero(scores))
    if found < min(k, index.count):
        for table, key in expansion_order(index, query_keys, metric, query_projection):
            bucket = index.bucket(table, key)
            found += int(np.count_nonzero(scores[bucket] == 0))
            scores[bucket] += 1
            expansions += 1
            if found >= k:
                break
    return CandidateSet.from_scores(scores), expansions


def query(index: MultiIndexHash, query_code, k: int, metric: Optional[CodeMetric] = None,
          query_projection: Optional[np.ndarray] = None) -> RankedList:
    """Top-k base ids for one query code.

    :param index: The index over the base codes.
    :param query_code: A BinaryCode for binary indexes, a length-m 1-based code for n-ary ones.
    :param k: Number of results (>= 1); fewer are returned only if the base is smaller.
    :param metric: Code metric for tie-breaking and expansion costs, see default_metric.
    :param query_projection: Unquantized per-table query values for level-based expansion costs.
    :return: RankedList with the scores s in descending order.
    """
    reject_if(k < 1, f"k must be >= 1, got {k}", ValueError)
    metric = metric or default_metric(index)
    candidates, expansions = collect_candidates(index, query_code, k, metric, query_projection)
    distances = metric.distances(query_code, index.base_codes)[candidates.ids]
    order = np.lexsort((candidates.ids, distances, -candidates.scores))[:k]
    if expansions:
        logger.debug(f"Query needed {expansions} expansion steps for {len(candidates)} candidates")
    return RankedList(ids=candidates.ids[order], scores=candidates.scores[order], metric=MIH_METRIC,
                      descending=True)
