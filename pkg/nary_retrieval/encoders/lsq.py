"""Linear Subspace Quantization: linear mapping W, uniform quantization q_n, linear reconstruction V.

Training minimizes ||X - V^T q_n(W^T X)||_F^2 + lambda·||V||_F^2 by alternating a ridge
regression for V with the pseudoinverse update W = V^+.
"""
import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from tqdm import tqdm

from nary_retrieval.encoders.linalg import principal_directions
from nary_retrieval.models.codes import BinaryCodeSet, NaryCodeSet
from nary_retrieval.models.matrix import DataMatrix
from nary_retrieval.quantcore.quantizer import UniformQuantizer, quantize_matrix
from nary_retrieval.shared import DataError, NumericError, reject_if, relative_decrease

logger = logging.getLogger(__name__)

INIT_SATURATION = 0.5


@dataclass(frozen=True)
class LsqModel:
    """Trained LSQ coder.

    :ivar W: D×m mapping, f(x) = W^T x.
    :ivar V: m×D reconstruction, f~(y) = V^T y.
    :ivar quantizer: q_n applied to every mapped coordinate.
    :ivar lam: ridge weight on ||V||_F^2.
    :ivar objective_history: full objective after every V-update and every W-update.
    :ivar reconstruction_history: ||X - V^T q_n(W^T X)||^2 after every full iteration.
    :ivar pinv_fallback: True if a singular V-step (lambda = 0) was solved by least squares.
    """

    W: np.ndarray
    V: np.ndarray
    quantizer: UniformQuantizer
    lam: float = 1.0
    objective_history: tuple[float, ...] = ()
    reconstruction_history: tuple[float, ...] = ()
    pinv_fallback: bool = False

    def __post_init__(self):
        w = np.array(self.W, dtype=np.float64, copy=True)
        v = np.array(self.V, dtype=np.float64, copy=True)
        reject_if(w.ndim != 2 or v.shape != (w.shape[1], w.shape[0]),
                  f"W must be D×m and V m×D, got {w.shape} and {v.shape}", DataError)
        for a in (w, v):
            a.setflags(write=False)
        object.__setattr__(self, "W", w)
        object.__setattr__(self, "V", v)
        object.__setattr__(self, "objective_history", tuple(float(o) for o in self.objective_history))
        object.__setattr__(self, "reconstruction_history", tuple(float(o) for o in self.reconstruction_history))

    @property
    def m(self) -> int:
        return self.W.shape[1]

    @property
    def dim(self) -> int:
        return self.W.shape[0]

    @property
    def n(self) -> int:
        return self.quantizer.arity

    @property
    def objective(self) -> float:
        return self.objective_history[-1] if self.objective_history else float("nan")


def lsq_objective(values: np.ndarray, w: np.ndarray, v: np.ndarray, q: UniformQuantizer,
                  lam: float) -> tuple[float, float]:
    """Evaluates (full objective, reconstruction term) for column-wise data."""
    _, h = quantize_matrix(q, w.T @ values)
    reconstruction = float(np.sum((values - v.T @ h) ** 2))
    return reconstruction + lam * float(np.sum(v ** 2)), reconstruction


def initial_mapping(values: np.ndarray, m: int, n: int) -> np.ndarray:
    """Top-m PCA directions sharing one scale, so code distances stay proportional to data distances.

    The scale lets a fraction INIT_SATURATION / n of the mapped coordinates fall outside [-1, 1].
    """
    w = principal_directions(values, m)
    percentile = 100.0 * (1.0 - INIT_SATURATION / n)
    spread = float(np.percentile(np.abs(w.T @ values), percentile))
    return w / spread if spread > 0.0 else w


def _solve_reconstruction(h: np.ndarray, values: np.ndarray, lam: float) -> tuple[np.ndarray, bool]:
    """V = (H H^T + lambda I)^-1 H X^T, falling back to least squares when the system is singular."""
    gram = h @ h.T
    if lam > 0.0:
        return np.linalg.solve(gram + lam * np.eye(len(gram)), h @ values.T), False
    if np.linalg.matrix_rank(gram) < len(gram):
        v, *_ = np.linalg.lstsq(h.T, values.T, rcond=None)
        return v, True
    return np.linalg.solve(gram, h @ values.T), False


def train_lsq(x: DataMatrix, m: int, n: int, lam: float = 1.0, max_iters: int = 100, tol: float = 1e-6,
              init_w: Optional[np.ndarray] = None) -> LsqModel:
    """Trains an m-dimensional n-ary LSQ coder on preprocessed (centered, scaled) data.

    Each iteration sets H = q_n(W^T X), solves V in closed form, then sets W = V^+. A
    pseudoinverse step that would raise the objective is not taken and training stops,
    which keeps the recorded objective non-increasing.

    :param x: Training data, one point per column.
    :param m: Code length, 1 <= m <= D.
    :param n: Quantizer arity, n >= 2.
    :param lam: Ridge weight, >= 0.
    :param max_iters: Maximum number of V/W iterations.
    :param tol: Stop once an iteration lowers the objective by less than this relative amount.
    :param init_w: Optional D×m starting mapping instead of the common-scaled PCA directions.
    :return: The trained model.
    """
    reject_if(m < 1 or m > x.dim, f"code length must lie in 1..{x.dim}, got {m}", ValueError)
    reject_if(n < 2, f"arity must be >= 2, got {n}", ValueError)
    reject_if(lam < 0, f"lambda must be >= 0, got {lam}", ValueError)
    reject_if(max_iters < 1, f"max_iters must be >= 1, got {max_iters}", ValueError)

    q = UniformQuantizer(n)
    values = x.values
    w = initial_mapping(values, m, n) if init_w is None else np.array(init_w, dtype=np.float64)
    reject_if(w.shape != (x.dim, m), f"initial W must be {x.dim}x{m}, got {w.shape}", DataError)

    logger.info(f"Training LSQ m={m} n={n} lambda={lam} on {x.count} points...")
    objectives: list[float] = []
    reconstructions: list[float] = []
    fallback = False
    v = np.zeros((m, x.dim))
    previous: Optional[float] = None
    for iteration in tqdm(range(max_iters), desc="LSQ", disable=not logger.isEnabledFor(logging.INFO)):
        _, h = quantize_matrix(q, w.T @ values)
        v, used_fallback = _solve_reconstruction(h, values, lam)
        fallback |= used_fallback
        recon_v = float(np.sum((values - v.T @ h) ** 2))
        objective_v = recon_v + lam * float(np.sum(v ** 2))
        objectives.append(objective_v)

        w_next = np.linalg.pinv(v)
        objective_w, recon_w = lsq_objective(values, w_next, v, q, lam)
        if not np.isfinite(objective_w):
            raise NumericError(f"LSQ objective became non-finite at iteration {iteration}")
        if objective_w > objective_v:
            logger.debug(f"Pseudoinverse step would raise the objective ({objective_v:.6g} -> "
                         f"{objective_w:.6g}), keeping W and stopping at iteration {iteration}")
            objectives.append(objective_v)
            reconstructions.append(recon_v)
            break
        w = w_next
        objectives.append(objective_w)
        reconstructions.append(recon_w)
        logger.debug(f"LSQ iteration {iteration}: objective {objective_w:.6g}")

        if previous is not None and relative_decrease(previous, objective_w) < tol:
            break
        previous = objective_w

    if fallback:
        logger.warning("Singular V-step at lambda=0 solved by least squares")
    logger.info(f"Finished LSQ training, objective {objectives[-1]:.6g} after {len(reconstructions)} iterations")
    return LsqModel(W=w, V=v, quantizer=q, lam=lam, objective_history=objectives,
                    reconstruction_history=reconstructions, pinv_fallback=fallback)


def lsq_project(model: LsqModel, x: DataMatrix) -> np.ndarray:
    """The unquantized m×N projection W^T X."""
    reject_if(x.dim != model.dim, f"model has dim {model.dim}, data has dim {x.dim}", DataError)
    return model.W.T @ x.values


def lsq_encode(model: LsqModel, x: DataMatrix) -> NaryCodeSet:
    """Level indices of q_n(W^T X)."""
    indices, _ = quantize_matrix(model.quantizer, lsq_project(model, x))
    return NaryCodeSet(n=model.n, codes=indices)


def lsq_reconstruct(model: LsqModel, codes: NaryCodeSet) -> DataMatrix:
    """V^T theta_n(codes)."""
    reject_if(codes.n != model.n or codes.m != model.m,
              f"codes are {codes.m}-dim {codes.n}-ary, model is {model.m}-dim {model.n}-ary", DataError)
    return DataMatrix(model.V.T @ model.quantizer.level_values(codes.codes))


def lsq_requantize(model: LsqModel, n: int) -> LsqModel:
    """The same W and V read through a quantizer of a different arity."""
    return replace(model, quantizer=UniformQuantizer(n), objective_history=(), reconstruction_history=())


def train_lsq_binary(x: DataMatrix, m_bits: int, lam: float = 1.0, max_iters: int = 100,
                     tol: float = 1e-6) -> LsqModel:
    """Binary LSQ: train_lsq with n = 2."""
    return train_lsq(x, m_bits, 2, lam=lam, max_iters=max_iters, tol=tol)


def lsq_encode_binary(model: LsqModel, x: DataMatrix) -> BinaryCodeSet:
    """Bit j of a point is 1 iff (W^T x)_j >= 0, i.e. level index 2 of q_2."""
    reject_if(model.n != 2, f"binary codes need a 2-level model, got n={model.n}", DataError)
    return BinaryCodeSet.from_bits(lsq_encode(model, x).codes - 1)


def lsq_reconstruct_binary(model: LsqModel, codes: BinaryCodeSet) -> DataMatrix:
    reject_if(model.n != 2 or codes.bits != model.m,
              f"{codes.bits}-bit codes do not fit a {model.m}-dim {model.n}-ary model", DataError)
    return lsq_reconstruct(model, NaryCodeSet(n=2, codes=codes.to_bits().astype(np.int32) + 1))
