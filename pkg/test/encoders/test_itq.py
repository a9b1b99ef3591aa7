import numpy as np
import pytest

from nary_retrieval.encoders.itq import ItqModel, itq_encode, itq_reconstruct, signed_codes, train_itq
from nary_retrieval.models.codes import BinaryCodeSet
from nary_retrieval.models.matrix import DataMatrix
from nary_retrieval.quantcore.error import quantization_error
from nary_retrieval.shared import DataError, is_non_increasing
from test.shared import random_matrix

CORNERS = np.array([[1.0, 1.0, -1.0, -1.0], [1.0, -1.0, 1.0, -1.0]])


def test_square_corners_are_fit_after_one_round():
    x = DataMatrix(np.tile(CORNERS, 5))
    model = train_itq(x, 2, iters=3, seed=4)
    assert model.loss_history[0] < 1e-12
    assert model.scale == pytest.approx(1.0)
    assert quantization_error(x, itq_reconstruct(model, itq_encode(model, x))) < 1e-12


def test_rotation_is_orthogonal():
    model = train_itq(random_matrix(1, 10, 200), 6, iters=20, seed=2)
    assert np.allclose(model.rotation.T @ model.rotation, np.eye(6), atol=1e-8)
    assert model.projection.shape == (10, 6)


def test_loss_is_non_increasing():
    x = random_matrix(2, 16, 300)
    model = train_itq(x, 8, iters=25, seed=0)
    assert len(model.loss_history) == 25
    assert is_non_increasing(model.loss_history, 1e-9)

    v = model.projection.T @ x.values
    b = signed_codes(model.rotation.T @ v)
    assert model.loss >= float(np.sum((b - model.rotation.T @ v) ** 2)) - 1e-9


def test_zero_vector_encodes_to_all_ones():
    model = train_itq(random_matrix(3, 4, 50), 3, iters=2)
    codes = itq_encode(model, DataMatrix(np.zeros((4, 1))))
    assert codes.code(0).to_string() == "111"


def test_encode_matches_sign_oracle():
    x = random_matrix(4, 6, 40)
    model = train_itq(x, 4, iters=5, seed=1)
    expected = (model.rotation.T @ (model.projection.T @ x.values) >= 0).astype(np.uint8)
    codes = itq_encode(model, x)
    assert np.array_equal(codes.to_bits(), expected)
    assert np.array_equal(codes.packed, itq_encode(model, x).packed)


def test_reconstruction_uses_scaled_signs():
    model = ItqModel(projection=np.eye(2), rotation=np.eye(2), scale=0.5)
    out = itq_reconstruct(model, BinaryCodeSet.from_bits(np.array([[1], [0]])))
    assert out.values[:, 0].tolist() == [0.5, -0.5]


def test_invalid_inputs():
    with pytest.raises(ValueError):
        train_itq(random_matrix(0, 4, 10), 5)
    with pytest.raises(ValueError):
        train_itq(random_matrix(0, 4, 10), 2, iters=0)
    with pytest.raises(DataError):
        ItqModel(projection=np.eye(3)[:, :2], rotation=np.eye(3))
    model = ItqModel(projection=np.eye(2), rotation=np.eye(2))
    with pytest.raises(DataError):
        itq_encode(model, random_matrix(0, 3, 2))
