import numpy as np
import pytest

from nary_retrieval.models.matrix import DataMatrix
from nary_retrieval.quantcore.error import quantization_error
from nary_retrieval.shared import DataError
from test.shared import random_matrix


def test_identical_is_zero():
    x = random_matrix(0, 3, 4)
    assert quantization_error(x, x) == 0.0


def test_shift_by_one():
    x = random_matrix(1, 2, 3)
    assert quantization_error(x, DataMatrix(x.values + 1.0)) == pytest.approx(6.0)


def test_matches_entry_loop():
    a, b = random_matrix(2, 5, 7), random_matrix(3, 5, 7)
    expected = sum((a.values[i, j] - b.values[i, j]) ** 2 for i in range(5) for j in range(7))
    assert quantization_error(a, b) == pytest.approx(expected, rel=1e-12)


def test_shape_mismatch():
    with pytest.raises(DataError):
        quantization_error(random_matrix(0, 2, 3), random_matrix(0, 3, 2))
