"""Plain data types for point sets, preprocessing and ground-truth neighbor lists."""
from dataclasses import dataclass, field

import numpy as np

from nary_retrieval.shared import DataError, ensure_finite, reject_if


@dataclass(frozen=True)
class DataMatrix:
    """A set of D-dimensional real vectors stored column-wise: column j is point x_j.

    :ivar values: D×N float64 matrix, read-only.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        reject_if(values.ndim != 2, f"data matrix must be 2-D, got shape {values.shape}", DataError)
        reject_if(values.shape[0] < 1 or values.shape[1] < 1,
                  f"data matrix needs dim >= 1 and count >= 1, got {values.shape}", DataError)
        ensure_finite(values, "data matrix")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @property
    def count(self) -> int:
        return self.values.shape[1]

    @property
    def points(self) -> np.ndarray:
        """N×D view with one point per row, the layout scipy and pandas expect."""
        return self.values.T

    def columns(self, ids) -> "DataMatrix":
        return DataMatrix(self.values[:, ids])


@dataclass(frozen=True)
class PreprocessModel:
    """Mean-centering and optional unit-sphere normalization fit on a training split."""

    mean: np.ndarray
    normalize_to_sphere: bool = True

    def __post_init__(self):
        mean = np.array(self.mean, dtype=np.float64, copy=True).reshape(-1)
        ensure_finite(mean, "preprocessing mean")
        mean.setflags(write=False)
        object.__setattr__(self, "mean", mean)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class NeighborList:
    """Exact nearest neighbors of one query, ascending Euclidean distance."""

    query_id: int
    ids: list[int] = field(default_factory=list)
    distances: list[float] = field(default_factory=list)

    def __post_init__(self):
        reject_if(len(self.ids) != len(self.distances), "ids and distances differ in length", DataError)
        reject_if(len(set(self.ids)) != len(self.ids), "neighbor ids must be unique", DataError)
