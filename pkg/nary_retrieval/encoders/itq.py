"""Iterative Quantization: PCA to m bits followed by a learned rotation of the projected data."""
import logging
from dataclasses import dataclass

import numpy as np
from tqdm import tqdm

from nary_retrieval.encoders.linalg import principal_directions, procrustes_rotation, random_rotation
from nary_retrieval.models.codes import BinaryCodeSet
from nary_retrieval.models.matrix import DataMatrix
from nary_retrieval.shared import DataError, ensure_finite, reject_if

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ItqModel:
    """PCA projection P (D×m), rotation R (m×m) and the least-squares scale s of the ±1 codes.

    Codes are sign(R^T P^T x); a code b reconstructs to s·P·R·b.
    """

    projection: np.ndarray
    rotation: np.ndarray
    scale: float = 1.0
    loss_history: tuple[float, ...] = ()

    def __post_init__(self):
        projection = np.array(self.projection, dtype=np.float64, copy=True)
        rotation = np.array(self.rotation, dtype=np.float64, copy=True)
        reject_if(projection.ndim != 2 or rotation.shape != (projection.shape[1], projection.shape[1]),
                  f"projection must be D×m and rotation m×m, got {projection.shape} and {rotation.shape}",
                  DataError)
        ensure_finite(rotation, "ITQ rotation")
        for a in (projection, rotation):
            a.setflags(write=False)
        object.__setattr__(self, "projection", projection)
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "loss_history", tuple(float(v) for v in self.loss_history))

    @property
    def m_bits(self) -> int:
        return self.projection.shape[1]

    @property
    def dim(self) -> int:
        return self.projection.shape[0]

    @property
    def loss(self) -> float:
        return self.loss_history[-1] if self.loss_history else float("nan")


def signed_codes(values: np.ndarray) -> np.ndarray:
    """Element-wise sign with zero mapped to +1."""
    return np.where(values >= 0.0, 1.0, -1.0)


def train_itq(x: DataMatrix, m_bits: int, iters: int = 50, seed: int = 0) -> ItqModel:
    """Learns an m_bits ITQ coder.

    Every round assigns B = sign(R^T V) for the projected data V = P^T X, then solves the
    orthogonal Procrustes problem min_R ||B - R^T V||_F; the loss after each round is recorded.

    :param x: Training data (centered), one point per column.
    :param m_bits: Code length, 1 <= m_bits <= D.
    :param iters: Number of refinement rounds (>= 1).
    :param seed: Seed of the random starting rotation.
    """
    reject_if(m_bits < 1 or m_bits > x.dim, f"bit count must lie in 1..{x.dim}, got {m_bits}", ValueError)
    reject_if(iters < 1, f"iters must be >= 1, got {iters}", ValueError)

    projection = principal_directions(x.values, m_bits)
    v = projection.T @ x.values
    rotation = random_rotation(m_bits, seed)

    logger.info(f"Training ITQ with {m_bits} bits on {x.count} points...")
    losses: list[float] = []
    for _ in tqdm(range(iters), desc="ITQ", disable=not logger.isEnabledFor(logging.INFO)):
        b = signed_codes(rotation.T @ v)
        rotation = procrustes_rotation(v, b).T
        losses.append(float(np.sum((b - rotation.T @ v) ** 2)))
        logger.debug(f"ITQ round {len(losses)}: loss {losses[-1]:.6g}")

    rotated = rotation.T @ v
    b = signed_codes(rotated)
    scale = float(np.sum(b * rotated)) / b.size
    logger.info(f"Finished ITQ training, loss {losses[-1]:.6g}")
    return ItqModel(projection=projection, rotation=rotation, scale=scale, loss_history=losses)


def itq_encode(model: ItqModel, x: DataMatrix) -> BinaryCodeSet:
    """Bit j of a point is 1 iff (R^T P^T x)_j >= 0."""
    reject_if(x.dim != model.dim, f"model has dim {model.dim}, data has dim {x.dim}", DataError)
    rotated = model.rotation.T @ (model.projection.T @ x.values)
    return BinaryCodeSet.from_bits(rotated >= 0.0)


def itq_reconstruct(model: ItqModel, codes: BinaryCodeSet) -> DataMatrix:
    reject_if(codes.bits != model.m_bits, f"{codes.bits}-bit codes for a {model.m_bits}-bit model", DataError)
    b = 2.0 * codes.to_bits().astype(np.float64) - 1.0
    return DataMatrix(model.scale * (model.projection @ (model.rotation @ b)))
