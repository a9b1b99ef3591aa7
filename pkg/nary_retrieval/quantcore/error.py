import numpy as np

from nary_retrieval.models.matrix import DataMatrix
from nary_retrieval.shared import DataError, reject_if


def quantization_error(x: DataMatrix, reconstruction: DataMatrix) -> float:
    """Squared Frobenius norm ||X - Q(X)||_F^2."""
    reject_if(x.values.shape != reconstruction.values.shape,
              f"shape mismatch: {x.values.shape} vs {reconstruction.values.shape}", DataError)
    return float(np.sum((x.values - reconstruction.values) ** 2))
