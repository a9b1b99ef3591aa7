"""Lloyd's k-means with seeded k-means++ initialization.

Points are handled row-wise (N×d) internally, the layout scipy's cdist works with;
the public model stores its codebook column-wise (d×k) like the data matrices.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from nary_retrieval.models.matrix import DataMatrix
from nary_retrieval.shared import DataError, ensure_finite, reject_if

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KmeansModel:
    """Codebook C (d×k) and the objective after every assignment step."""

    centers: np.ndarray
    objective_history: tuple[float, ...] = ()

    def __post_init__(self):
        centers = np.array(self.centers, dtype=np.float64, copy=True)
        reject_if(centers.ndim != 2 or centers.shape[1] < 1, f"bad codebook shape {centers.shape}", DataError)
        ensure_finite(centers, "k-means centers")
        centers.setflags(write=False)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "objective_history", tuple(float(v) for v in self.objective_history))

    @property
    def k(self) -> int:
        return self.centers.shape[1]

    @property
    def dim(self) -> int:
        return self.centers.shape[0]

    @property
    def objective(self) -> float:
        return self.objective_history[-1] if self.objective_history else float("nan")

    def encode(self, x: DataMatrix) -> np.ndarray:
        """0-based index of the nearest center for every column, ties to the smaller index."""
        reject_if(x.dim != self.dim, f"model has dim {self.dim}, data has dim {x.dim}", DataError)
        labels, _ = assign_to_centers(x.points, self.centers.T)
        return labels

    def reconstruct(self, labels: np.ndarray) -> DataMatrix:
        return DataMatrix(self.centers[:, labels])


def assign_to_centers(points: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest center per point.

    :param points: N×d points.
    :param centers: k×d centers.
    :return: (labels, squared distance to the chosen center); argmin keeps the smaller index on ties.
    """
    sq = cdist(points, centers, "sqeuclidean")
    labels = np.argmin(sq, axis=1)
    return labels, sq[np.arange(len(points)), labels]


def kmeans_plusplus(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: each new center is drawn with probability proportional to the squared
    distance to the closest center chosen so far.
    """
    n = len(points)
    chosen = [int(rng.integers(n))]
    closest = cdist(points, points[chosen], "sqeuclidean")[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            # every point already coincides with a chosen center
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=closest / total))
        chosen.append(idx)
        closest = np.minimum(closest, cdist(points, points[[idx]], "sqeuclidean")[:, 0])
    return points[chosen].copy()


def update_centers(points: np.ndarray, labels: np.ndarray, centers: np.ndarray,
                   sq_dists: Optional[np.ndarray] = None) -> np.ndarray:
    """Moves every center to the mean of its points.

    Empty clusters are re-seeded to the points farthest from their current centers when
    sq_dists is given, otherwise they keep their previous position.
    """
    k = len(centers)
    counts = np.bincount(labels, minlength=k)
    sums = np.zeros_like(centers)
    np.add.at(sums, labels, points)
    updated = centers.copy()
    filled = counts > 0
    updated[filled] = sums[filled] / counts[filled, None]

    empty = np.flatnonzero(~filled)
    if len(empty) and sq_dists is not None:
        farthest = np.argsort(-sq_dists, kind="stable")[:len(empty)]
        updated[empty] = points[farthest]
        logger.debug(f"Re-seeded {len(empty)} empty clusters")
    return updated


def lloyd(points: np.ndarray, k: int, seed: int, max_iters: int,
          init_centers: Optional[np.ndarray] = None) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Runs Lloyd iterations on N×d points.

    :return: (centers k×d, labels, objective after every assignment step). The objective
        sequence is non-increasing; the last entry belongs to the returned centers and labels.
    """
    rng = np.random.default_rng(seed)
    centers = kmeans_plusplus(points, k, rng) if init_centers is None else np.array(init_centers, dtype=np.float64)
    history: list[float] = []
    labels: Optional[np.ndarray] = None
    converged = False
    for _ in range(max_iters):
        new_labels, sq = assign_to_centers(points, centers)
        history.append(float(sq.sum()))
        if labels is not None and np.array_equal(new_labels, labels):
            converged = True
            break
        labels = new_labels
        centers = update_centers(points, labels, centers, sq)
    if not converged:
        labels, sq = assign_to_centers(points, centers)
        history.append(float(sq.sum()))
    return centers, labels, history


def kmeans(x: DataMatrix, k: int, seed: int = 0, max_iters: int = 25) -> KmeansModel:
    """Clusters the columns of x into k groups.

    :param x: Data, one point per column.
    :param k: Number of clusters, 1 <= k <= N.
    :param seed: Seed for the k-means++ draws.
    :param max_iters: Maximum number of Lloyd iterations (>= 1).
    :return: The trained model; its objective equals the sum of squared distances of the
        points to their nearest center.
    """
    reject_if(k < 1 or k > x.count, f"k must lie in 1..{x.count}, got {k}", ValueError)
    reject_if(max_iters < 1, f"max_iters must be >= 1, got {max_iters}", ValueError)
    centers, _, history = lloyd(x.points, k, seed, max_iters)
    logger.debug(f"k-means k={k}: {len(history)} assignment steps, objective {history[-1]:.6g}")
    return KmeansModel(centers=centers.T, objective_history=history)
