"""Seeded Gaussian-mixture data, the desk-scale stand-in for image descriptor collections."""
import logging
from typing import Optional

import numpy as np
from scipy.stats import ortho_group

from nary_retrieval.models.matrix import DataMatrix
from nary_retrieval.shared import reject_if

logger = logging.getLogger(__name__)

AMBIENT_NOISE_RATIO = 0.1


def generate_labeled_synthetic(seed: int, dim: int, count: int, n_clusters: int, spread: float,
                               latent_dim: Optional[int] = None) -> tuple[DataMatrix, np.ndarray, np.ndarray]:
    """Draws a Gaussian mixture with centers uniform in [-1, 1]^D and isotropic noise.

    With latent_dim < D the mixture is drawn in latent_dim dimensions and placed on a random
    latent_dim-dimensional subspace of R^D, plus isotropic noise of AMBIENT_NOISE_RATIO·spread in
    all D dimensions. Descriptor collections concentrate their variance like this.

    :param seed: Seed of the pseudorandom generator; the output is a pure function of all arguments.
    :param dim: Dimension D.
    :param count: Number of points N.
    :param n_clusters: Number of mixture components (>= 1).
    :param spread: Standard deviation of the noise (0 puts every point on its center).
    :param latent_dim: Dimension of the subspace holding the mixture, 1..D; None for the full space.
    :return: (data D×N, label per point in 0..n_clusters-1, centers D×n_clusters).
    """
    reject_if(dim < 1 or count < 1, f"need dim >= 1 and count >= 1, got dim={dim}, count={count}", ValueError)
    reject_if(n_clusters < 1, f"need at least one cluster, got {n_clusters}", ValueError)
    reject_if(not np.isfinite(spread) or spread < 0, f"spread must be a finite value >= 0, got {spread}", ValueError)
    latent = dim if latent_dim is None else latent_dim
    reject_if(latent < 1 or latent > dim, f"latent_dim must lie in 1..{dim}, got {latent}", ValueError)

    rng = np.random.default_rng(seed)
    centers = rng.uniform(-1.0, 1.0, size=(latent, n_clusters))
    labels = rng.integers(0, n_clusters, size=count)
    noise = rng.normal(0.0, 1.0, size=(latent, count)) * spread
    data = centers[:, labels] + noise
    if latent < dim:
        basis = ortho_group.rvs(dim=dim, random_state=rng)[:, :latent]
        ambient = rng.normal(0.0, 1.0, size=(dim, count)) * (AMBIENT_NOISE_RATIO * spread)
        data = basis @ data + ambient
        centers = basis @ centers
    logger.debug(f"Generated {count} points in {dim} dims ({latent} latent) from {n_clusters} clusters "
                 f"(seed={seed})")
    return DataMatrix(data), labels, centers


def generate_synthetic(seed: int, dim: int, count: int, n_clusters: int, spread: float,
                       latent_dim: Optional[int] = None) -> DataMatrix:
    """Like generate_labeled_synthetic, returning only the data matrix."""
    data, _, _ = generate_labeled_synthetic(seed, dim, count, n_clusters, spread, latent_dim)
    return data
