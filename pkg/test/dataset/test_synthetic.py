import numpy as np
import pytest

from nary_retrieval.dataset.synthetic import generate_labeled_synthetic, generate_synthetic


def test_zero_spread_single_cluster_gives_identical_columns():
    x = generate_synthetic(7, 2, 10, 1, 0.0)
    assert x.values.shape == (2, 10)
    assert np.all(x.values == x.values[:, [0]])
    assert np.all(np.abs(x.values) <= 1.0)


def test_same_seed_same_matrix():
    a = generate_synthetic(11, 5, 40, 3, 0.2)
    b = generate_synthetic(11, 5, 40, 3, 0.2)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, generate_synthetic(12, 5, 40, 3, 0.2).values)


def test_cluster_means_approach_centers():
    x, labels, centers = generate_labeled_synthetic(7, 32, 10000, 50, 0.05)
    assert centers.shape == (32, 50)
    for c in range(50):
        members = x.values[:, labels == c]
        assert members.shape[1] > 100
        assert np.max(np.abs(members.mean(axis=1) - centers[:, c])) < 0.03


@pytest.mark.parametrize("args", [(0, 2, 10, 0, 0.1), (0, 2, 10, 2, -1.0), (0, 0, 10, 2, 0.1)])
def test_invalid_parameters(args):
    with pytest.raises(ValueError):
        generate_synthetic(*args)


def test_latent_mixture_concentrates_variance_in_its_subspace():
    x, labels, centers = generate_labeled_synthetic(3, 16, 2000, 10, 0.1, latent_dim=4)
    assert x.values.shape == (16, 2000)
    assert centers.shape == (16, 10)
    centered = x.values - x.values.mean(axis=1, keepdims=True)
    energy = np.linalg.svd(centered, compute_uv=False) ** 2
    assert energy[:4].sum() > 0.99 * energy.sum()
    assert energy[4] > 0.0
    assert np.array_equal(labels, generate_labeled_synthetic(3, 16, 2000, 10, 0.1, latent_dim=4)[1])


def test_full_latent_dimension_matches_plain_mixture():
    a = generate_synthetic(5, 6, 30, 3, 0.2)
    assert np.array_equal(a.values, generate_synthetic(5, 6, 30, 3, 0.2, latent_dim=6).values)


@pytest.mark.parametrize("latent_dim", [0, 7])
def test_invalid_latent_dimension(latent_dim):
    with pytest.raises(ValueError):
        generate_synthetic(0, 6, 10, 2, 0.1, latent_dim=latent_dim)
