"""Exact Euclidean k-nearest-neighbor search, the ground truth for recall measurements."""
import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.spatial.distance import cdist

from nary_retrieval.models.matrix import DataMatrix, NeighborList
from nary_retrieval.shared import DataError, reject_if

logger = logging.getLogger(__name__)

QUERY_BLOCK = 256


def _knn_block(base_points: np.ndarray, query_points: np.ndarray, k: int, offset: int) -> list[NeighborList]:
    # cdist evaluates each pair directly, so a query equal to a base point gets exactly 0
    sq = cdist(query_points, base_points, "sqeuclidean")
    result = []
    for row, dists in enumerate(sq):
        order = np.argsort(dists, kind="stable")[:k]
        result.append(NeighborList(query_id=offset + row,
                                   ids=[int(i) for i in order],
                                   distances=[float(d) for d in np.sqrt(dists[order])]))
    return result


def brute_force_knn(base: DataMatrix, queries: DataMatrix, k: int, threads: int = 1) -> list[NeighborList]:
    """Finds the exact k nearest base points of every query.

    :param base: Base set, one point per column.
    :param queries: Query set with the same dimension.
    :param k: Neighbors per query, 1 <= k <= base.count.
    :param threads: Worker threads over query blocks; the result does not depend on it.
    :return: One NeighborList per query in query order, ascending distance, ties by smaller base id.
    """
    reject_if(base.dim != queries.dim, f"base has dim {base.dim}, queries have dim {queries.dim}", DataError)
    reject_if(k < 1 or k > base.count, f"k must lie in 1..{base.count}, got {k}", ValueError)

    base_points = base.points
    query_points = queries.points
    offsets = range(0, queries.count, QUERY_BLOCK)

    def run(offset: int) -> list[NeighborList]:
        return _knn_block(base_points, query_points[offset:offset + QUERY_BLOCK], k, offset)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(run, offsets))
    else:
        blocks = [run(offset) for offset in offsets]
    logger.debug(f"Exact {k}-NN for {queries.count} queries over {base.count} points")
    return [neighbors for block in blocks for neighbors in block]
