import numpy as np

from nary_retrieval.encoders.lsq import LsqModel
from nary_retrieval.shared import DataError, reject_if


def code_euclidean(model: LsqModel, a, b) -> float:
    """Squared Euclidean distance between the level values of two LSQ codes."""
    a = np.asarray(a)
    b = np.asarray(b)
    reject_if(a.shape != (model.m,) or b.shape != (model.m,),
              f"codes must have length {model.m}, got {a.shape} and {b.shape}", DataError)
    q = model.quantizer
    return float(np.sum((q.level_values(a) - q.level_values(b)) ** 2))
