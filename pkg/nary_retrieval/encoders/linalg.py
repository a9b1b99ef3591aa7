"""Linear algebra shared by the trainers: PCA directions, random rotations, Procrustes updates."""
import numpy as np
from scipy.linalg import orthogonal_procrustes
from scipy.stats import ortho_group

from nary_retrieval.shared import DataError, reject_if


def principal_directions(values: np.ndarray, m: int) -> np.ndarray:
    """Top-m principal directions (D×m) of the column-wise data, via SVD of the centered data.

    The sign of each direction is fixed so that its largest-magnitude component is positive.
    """
    centered = values - values.mean(axis=1, keepdims=True)
    u, _, _ = np.linalg.svd(centered, full_matrices=False)
    reject_if(u.shape[1] < m, f"cannot extract {m} directions from data of rank <= {u.shape[1]}", DataError)
    directions = u[:, :m].copy()
    pivots = np.argmax(np.abs(directions), axis=0)
    signs = np.sign(directions[pivots, np.arange(m)])
    signs[signs == 0] = 1.0
    return directions * signs


def random_rotation(dim: int, seed: int) -> np.ndarray:
    """Seeded Haar-random orthogonal matrix."""
    if dim == 1:
        return np.ones((1, 1))
    return ortho_group.rvs(dim=dim, random_state=seed)


def procrustes_rotation(source: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Orthogonal R minimizing ||target - R·source||_F for column-wise source and target."""
    omega, _ = orthogonal_procrustes(source.T, target.T)
    return omega.T
