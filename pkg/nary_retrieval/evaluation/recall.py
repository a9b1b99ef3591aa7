"""Recall@R curves and their area under a log2(R) axis."""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from nary_retrieval.distance.ranking import RankedList
from nary_retrieval.models.matrix import NeighborList
from nary_retrieval.shared import DataError, reject_if

logger = logging.getLogger(__name__)

RECALL_DEFINITION = "fraction of queries whose true 1-NN is among the top R retrieved ids"
AUC_DEFINITION = "trapezoid over log2(R), divided by the log2(R) span"


@dataclass(frozen=True)
class RecallCurve:
    r_grid: tuple[int, ...]
    recall: tuple[float, ...]
    method: str = ""
    bit_budget: int = 0

    def __post_init__(self):
        grid = tuple(int(r) for r in self.r_grid)
        recall = tuple(float(v) for v in self.recall)
        reject_if(not grid, "recall curve needs a non-empty R grid", ValueError)
        reject_if(len(grid) != len(recall), "R grid and recall values differ in length", DataError)
        reject_if(grid[0] < 1 or any(b <= a for a, b in zip(grid, grid[1:])),
                  f"R grid must be ascending positive integers, got {grid}", ValueError)
        reject_if(any(v < 0.0 or v > 1.0 for v in recall), "recall values must lie in [0, 1]", DataError)
        object.__setattr__(self, "r_grid", grid)
        object.__setattr__(self, "recall", recall)

    def at(self, r: int) -> float:
        return self.recall[self.r_grid.index(r)]


def recall_at_r(retrieved: list[RankedList], ground_truth: list[NeighborList], r_grid,
                method: str = "", bit_budget: int = 0) -> RecallCurve:
    """Recall@R for every R of the grid.

    :param retrieved: One ranked list per query.
    :param ground_truth: Exact neighbors per query; only the first (true nearest) id is used.
    :param r_grid: Ascending radii.
    """
    reject_if(len(retrieved) != len(ground_truth),
              f"{len(retrieved)} ranked lists for {len(ground_truth)} ground-truth lists", DataError)
    reject_if(not retrieved, "no queries to evaluate", DataError)
    positions = np.empty(len(retrieved))
    for i, (ranked, truth) in enumerate(zip(retrieved, ground_truth)):
        reject_if(not truth.ids, f"missing ground truth for query {truth.query_id}", DataError)
        hit = np.flatnonzero(ranked.ids == truth.ids[0])
        positions[i] = hit[0] if len(hit) else np.inf
    grid = [int(r) for r in r_grid]
    return RecallCurve(r_grid=grid, recall=[float(np.mean(positions < r)) for r in grid],
                       method=method, bit_budget=bit_budget)


def auc_recall(curve: RecallCurve) -> float:
    """Normalized area under the curve over log2(R); a curve at constant c scores c."""
    if len(curve.r_grid) == 1:
        return curve.recall[0]
    x = np.log2(np.asarray(curve.r_grid, dtype=np.float64))
    return float(trapezoid(np.asarray(curve.recall), x) / (x[-1] - x[0]))
