"""Uniform scalar quantizer q_n with its level grid theta_n(i) = -1 + 2(i-1)/(n-1)."""
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from nary_retrieval.shared import DataError, ensure_finite, reject_if

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class UniformQuantizer:
    """Quantizer with n uniformly spaced levels on [-1, 1].

    Level indices are 1-based: index 1 is -1, index n is +1. A value goes to the lower of
    two adjacent levels iff it lies strictly below their midpoint, so midpoints go up and
    values outside [-1, 1] saturate to the extreme levels.
    """

    arity: int

    def __post_init__(self):
        reject_if(int(self.arity) != self.arity or self.arity < 2,
                  f"quantizer arity must be an integer >= 2, got {self.arity}", ValueError)

    @cached_property
    def levels(self) -> np.ndarray:
        i = np.arange(1, self.arity + 1, dtype=np.float64)
        levels = -1.0 + 2.0 * (i - 1.0) / (self.arity - 1)
        levels.setflags(write=False)
        return levels

    @cached_property
    def thresholds(self) -> np.ndarray:
        thresholds = (self.levels[:-1] + self.levels[1:]) / 2.0
        thresholds.setflags(write=False)
        return thresholds

    @property
    def step(self) -> float:
        return 2.0 / (self.arity - 1)

    def level_values(self, indices) -> np.ndarray:
        """Maps 1-based level indices to their level values."""
        indices = np.asarray(indices)
        reject_if(indices.size > 0 and (indices.min() < 1 or indices.max() > self.arity),
                  f"level indices must lie in 1..{self.arity}", DataError)
        return self.levels[indices - 1]


def quantize_scalar(q: UniformQuantizer, x: float) -> tuple[int, float]:
    """Quantizes a single real value.

    :param q: The quantizer.
    :param x: A finite real value; values outside [-1, 1] saturate.
    :return: (1-based level index, level value).
    """
    reject_if(not np.isfinite(x), f"cannot quantize non-finite value {x}", DataError)
    index = int(np.searchsorted(q.thresholds, x, side="right")) + 1
    return index, float(q.levels[index - 1])


def quantize_matrix(q: UniformQuantizer, a) -> tuple[np.ndarray, np.ndarray]:
    """Element-wise quantization of a real array.

    :return: (1-based level indices as int32, level values as float64), same shape as the input.
    """
    a = np.asarray(a, dtype=np.float64)
    ensure_finite(a, "quantizer input")
    indices = np.searchsorted(q.thresholds, a, side="right").astype(np.int32) + 1
    return indices, q.levels[indices - 1]
