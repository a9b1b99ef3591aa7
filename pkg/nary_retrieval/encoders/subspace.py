"""Subspace clustering coders: Product Quantization and Cartesian k-means.

Both split the (optionally rotated) space into m blocks of contiguous dimensions and
cluster every block into n centers; a code holds the 1-based center index per block.
"""
import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from tqdm import tqdm

from nary_retrieval.encoders.linalg import principal_directions, procrustes_rotation, random_rotation
from nary_retrieval.models.codes import NaryCodeSet
from nary_retrieval.models.matrix import DataMatrix
from nary_retrieval.quantcore.kmeans import assign_to_centers, kmeans, update_centers
from nary_retrieval.shared import DataError, NumericError, ensure_finite, reject_if

logger = logging.getLogger(__name__)

CK_INITS = ("random", "identity")


@dataclass(frozen=True)
class SubspaceCodebooks:
    """Per-subspace codebooks C_i (d_i × n), an optional global rotation and optional refined index values.

    With a rotation R the codebooks live in the rotated space: x is coded from R^T x and a
    code reconstructs to R times the concatenated centers.
    """

    n: int
    subspace_dims: tuple[int, ...]
    codebooks: tuple[np.ndarray, ...]
    rotation: Optional[np.ndarray] = None
    index_values: Optional[tuple[np.ndarray, ...]] = None
    degenerate_subspaces: tuple[bool, ...] = ()
    objective_history: tuple[float, ...] = ()

    def __post_init__(self):
        dims = tuple(int(d) for d in self.subspace_dims)
        codebooks = tuple(np.array(c, dtype=np.float64, copy=True) for c in self.codebooks)
        reject_if(len(dims) < 1 or len(dims) != len(codebooks),
                  f"{len(dims)} subspaces but {len(codebooks)} codebooks", DataError)
        for i, (d, c) in enumerate(zip(dims, codebooks)):
            reject_if(c.shape != (d, self.n), f"codebook {i} must be {d}×{self.n}, got {c.shape}", DataError)
            ensure_finite(c, f"codebook {i}")
            c.setflags(write=False)
        object.__setattr__(self, "subspace_dims", dims)
        object.__setattr__(self, "codebooks", codebooks)

        if self.rotation is not None:
            rotation = np.array(self.rotation, dtype=np.float64, copy=True)
            reject_if(rotation.shape != (self.dim, self.dim),
                      f"rotation must be {self.dim}×{self.dim}, got {rotation.shape}", DataError)
            rotation.setflags(write=False)
            object.__setattr__(self, "rotation", rotation)

        if self.index_values is not None:
            values = tuple(np.array(v, dtype=np.float64, copy=True).reshape(-1) for v in self.index_values)
            reject_if(len(values) != self.m or any(len(v) != self.n for v in values),
                      f"index values must be {self.m} vectors of length {self.n}", DataError)
            for v in values:
                v.setflags(write=False)
            object.__setattr__(self, "index_values", values)

        object.__setattr__(self, "degenerate_subspaces", tuple(bool(f) for f in self.degenerate_subspaces))
        object.__setattr__(self, "objective_history", tuple(float(o) for o in self.objective_history))

    @property
    def m(self) -> int:
        return len(self.subspace_dims)

    @property
    def dim(self) -> int:
        return sum(self.subspace_dims)

    @property
    def objective(self) -> float:
        return self.objective_history[-1] if self.objective_history else float("nan")

    @property
    def offsets(self) -> np.ndarray:
        """Start row of every subspace, with the total dimension appended."""
        return np.concatenate(([0], np.cumsum(self.subspace_dims)))

    def rotate(self, values: np.ndarray) -> np.ndarray:
        return values if self.rotation is None else self.rotation.T @ values

    def unrotate(self, values: np.ndarray) -> np.ndarray:
        return values if self.rotation is None else self.rotation @ values


def split_dims(dim: int, m: int) -> tuple[int, ...]:
    """Sizes of m contiguous blocks covering dim dimensions; the first dim mod m blocks get one extra."""
    reject_if(m < 1 or m > dim, f"subspace count must lie in 1..{dim}, got {m}", ValueError)
    base, extra = divmod(dim, m)
    return tuple(base + 1 if i < extra else base for i in range(m))


def _blocks(values: np.ndarray, dims) -> list[np.ndarray]:
    offsets = np.concatenate(([0], np.cumsum(dims)))
    return [values[offsets[i]:offsets[i + 1]] for i in range(len(dims))]


def _assign(rotated: np.ndarray, dims, codebooks) -> tuple[np.ndarray, np.ndarray]:
    """0-based labels (m×N) and the summed squared error over all subspaces."""
    labels = []
    total = np.zeros(rotated.shape[1])
    for block, centers in zip(_blocks(rotated, dims), codebooks):
        block_labels, sq = assign_to_centers(block.T, centers.T)
        labels.append(block_labels)
        total += sq
    return np.array(labels), total


def _concat_centers(labels: np.ndarray, codebooks) -> np.ndarray:
    return np.vstack([centers[:, block_labels] for centers, block_labels in zip(codebooks, labels)])


def _check_training_args(x: DataMatrix, m: int, n: int):
    reject_if(m < 1 or m > x.dim, f"subspace count must lie in 1..{x.dim}, got {m}", ValueError)
    reject_if(n < 1 or n > x.count, f"cluster count must lie in 1..{x.count}, got {n}", ValueError)
    if x.dim % m:
        logger.debug(f"D={x.dim} is not divisible by m={m}, using subspace sizes {split_dims(x.dim, m)}")


def _kmeans_per_block(rotated: np.ndarray, dims, n: int, seed: int, max_iters: int) -> list[np.ndarray]:
    return [kmeans(DataMatrix(block), n, seed=seed + i, max_iters=max_iters).centers
            for i, block in enumerate(_blocks(rotated, dims))]


def train_pq(x: DataMatrix, m: int, n: int, seed: int = 0, max_iters: int = 25) -> SubspaceCodebooks:
    """Product Quantization: independent k-means with n centers on each of m contiguous dimension blocks.

    :param x: Training data, one point per column.
    :param m: Number of subspaces, 1 <= m <= D.
    :param n: Centers per subspace, 1 <= n <= N.
    :param seed: Subspace i runs k-means with seed + i.
    :param max_iters: Lloyd iterations per subspace.
    """
    _check_training_args(x, m, n)
    dims = split_dims(x.dim, m)
    logger.info(f"Training PQ m={m} n={n} on {x.count} points...")
    codebooks = _kmeans_per_block(x.values, dims, n, seed, max_iters)
    _, sq = _assign(x.values, dims, codebooks)
    objective = float(sq.sum())
    logger.info(f"Finished PQ training, objective {objective:.6g}")
    return SubspaceCodebooks(n=n, subspace_dims=dims, codebooks=codebooks, objective_history=[objective])


def train_ckmeans(x: DataMatrix, m: int, n: int, iters: int = 20, seed: int = 0, init: str = "random",
                  max_iters: int = 25) -> SubspaceCodebooks:
    """Cartesian k-means: subspace codebooks under a learned global rotation.

    Starting from the rotation chosen by init ('random': seeded Haar rotation, 'identity':
    the PQ solution), every round reassigns codes, moves the centers to their cluster means
    and solves the orthogonal Procrustes problem for the rotation. Each sub-step can only
    lower ||X - R·C(B)||^2, which is recorded after initialization and after every round.

    :param x: Training data, one point per column.
    :param m: Number of subspaces, 1 <= m <= D.
    :param n: Centers per subspace, 1 <= n <= N.
    :param iters: Number of rounds (>= 1).
    :param seed: Seed of the initial rotation; subspace i is initialized by k-means with seed + i.
    :param init: 'random' or 'identity'.
    :param max_iters: Lloyd iterations for the per-subspace initialization.
    """
    _check_training_args(x, m, n)
    reject_if(iters < 1, f"iters must be >= 1, got {iters}", ValueError)
    reject_if(init not in CK_INITS, f"unknown rotation init '{init}', expected one of {CK_INITS}", ValueError)

    dims = split_dims(x.dim, m)
    values = x.values
    rotation = random_rotation(x.dim, seed) if init == "random" else np.eye(x.dim)
    rotated = rotation.T @ values
    codebooks = _kmeans_per_block(rotated, dims, n, seed, max_iters)
    _, sq = _assign(rotated, dims, codebooks)
    history = [float(sq.sum())]

    logger.info(f"Training CK-means m={m} n={n} ({init} init) on {x.count} points...")
    for _ in tqdm(range(iters), desc="CK-means", disable=not logger.isEnabledFor(logging.INFO)):
        labels, _ = _assign(rotated, dims, codebooks)
        codebooks = [update_centers(block.T, block_labels, centers.T).T
                     for block, block_labels, centers in zip(_blocks(rotated, dims), labels, codebooks)]
        rotation = procrustes_rotation(_concat_centers(labels, codebooks), values)
        rotated = rotation.T @ values
        objective = float(np.sum((values - rotation @ _concat_centers(labels, codebooks)) ** 2))
        if not np.isfinite(objective):
            raise NumericError("CK-means objective became non-finite")
        history.append(objective)
        logger.debug(f"CK-means round {len(history) - 1}: objective {objective:.6g}")

    _, sq = _assign(rotated, dims, codebooks)
    history.append(float(sq.sum()))
    logger.info(f"Finished CK-means training, objective {history[-1]:.6g}")
    return SubspaceCodebooks(n=n, subspace_dims=dims, codebooks=codebooks, rotation=rotation,
                             objective_history=history)


def train_okmeans(x: DataMatrix, m_bits: int, iters: int = 20, seed: int = 0,
                  max_iters: int = 25) -> SubspaceCodebooks:
    """Orthogonal k-means, the binary case of Cartesian k-means: m_bits subspaces of 2 centers each."""
    return train_ckmeans(x, m_bits, 2, iters=iters, seed=seed, max_iters=max_iters)


def sc_encode(cb: SubspaceCodebooks, x: DataMatrix) -> NaryCodeSet:
    """Nearest center per subspace in the (rotated) space, ties to the smaller index."""
    reject_if(x.dim != cb.dim, f"codebooks have dim {cb.dim}, data has dim {x.dim}", DataError)
    labels, _ = _assign(cb.rotate(x.values), cb.subspace_dims, cb.codebooks)
    return NaryCodeSet(n=cb.n, codes=labels + 1)


def sc_reconstruct(cb: SubspaceCodebooks, codes: NaryCodeSet) -> DataMatrix:
    """Concatenated selected centers, mapped back through the rotation."""
    reject_if(codes.n != cb.n or codes.m != cb.m,
              f"codes are {codes.m}-dim {codes.n}-ary, codebooks are {cb.m}-dim {cb.n}-ary", DataError)
    return DataMatrix(cb.unrotate(_concat_centers(codes.codes - 1, cb.codebooks)))


def refine_ck_indices(cb: SubspaceCodebooks) -> SubspaceCodebooks:
    """Gives every center a real index value: its projection on the first principal direction of
    the subspace's centers, rescaled affinely to [-1, 1].

    Subspaces whose centers all coincide get all-zero values and are flagged in degenerate_subspaces.
    """
    values = []
    degenerate = []
    for i, centers in enumerate(cb.codebooks):
        centered = centers - centers.mean(axis=1, keepdims=True)
        if cb.n < 2 or np.allclose(centered, 0.0, atol=1e-12):
            logger.warning(f"All centers of subspace {i} coincide, index values set to 0")
            values.append(np.zeros(cb.n))
            degenerate.append(True)
            continue
        direction = principal_directions(centers, 1)[:, 0]
        positions = direction @ centered
        low, high = positions.min(), positions.max()
        values.append(-1.0 + 2.0 * (positions - low) / (high - low))
        degenerate.append(False)
    return replace(cb, index_values=values, degenerate_subspaces=degenerate)
