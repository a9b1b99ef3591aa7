"""Mean-centering followed by optional projection of every point onto the unit hyper-sphere."""
import logging

import numpy as np

from nary_retrieval.models.matrix import DataMatrix, PreprocessModel
from nary_retrieval.shared import DataError, reject_if

logger = logging.getLogger(__name__)


def fit_preprocess(x: DataMatrix, normalize: bool = True) -> PreprocessModel:
    """Learns the column mean of the (training) data."""
    return PreprocessModel(mean=x.values.mean(axis=1), normalize_to_sphere=normalize)


def apply_preprocess(model: PreprocessModel, x: DataMatrix) -> DataMatrix:
    """Centers every column with the stored mean; with normalization each non-zero column is
    divided by its L2 norm, so every coordinate ends up in [-1, 1]. Columns that are exactly
    zero after centering stay zero.
    """
    reject_if(model.dim != x.dim, f"preprocessing model has dim {model.dim}, data has dim {x.dim}", DataError)
    centered = x.values - model.mean[:, None]
    if model.normalize_to_sphere:
        norms = np.linalg.norm(centered, axis=0)
        nonzero = norms > 0.0
        centered[:, nonzero] /= norms[nonzero]
        if not np.all(nonzero):
            logger.debug(f"{int(np.sum(~nonzero))} zero columns left unnormalized")
    return DataMatrix(centered)
