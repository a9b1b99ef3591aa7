"""Codes read back as real feature vectors, for learning tasks directly on the codes."""
from enum import Enum
from typing import Optional

import numpy as np

from nary_retrieval.encoders.subspace import SubspaceCodebooks
from nary_retrieval.models.codes import NaryCodeSet
from nary_retrieval.models.matrix import DataMatrix
from nary_retrieval.quantcore.quantizer import UniformQuantizer
from nary_retrieval.shared import DataError, reject_if


class FeatureSource(str, Enum):
    LSQ_LEVELS = "lsq-levels"
    CK_REFINED = "ck-refined"
    RAW_INDICES = "raw-indices"


def codes_as_features(codes: NaryCodeSet, source: FeatureSource,
                      codebooks: Optional[SubspaceCodebooks] = None) -> DataMatrix:
    """Maps an m×N code set to an m×N real matrix.

    :param codes: The codes.
    :param source: lsq-levels reads entries through theta_n, ck-refined through the refined index
        values of the given codebooks, raw-indices uses the 1-based indices as they are.
    :param codebooks: Codebooks carrying index_values, required for ck-refined.
    """
    source = FeatureSource(source)
    if source == FeatureSource.LSQ_LEVELS:
        return DataMatrix(UniformQuantizer(codes.n).level_values(codes.codes))
    if source == FeatureSource.RAW_INDICES:
        return DataMatrix(codes.codes.astype(np.float64))

    reject_if(codebooks is None or codebooks.index_values is None,
              "ck-refined features need codebooks with refined index values", DataError)
    reject_if(codebooks.m != codes.m or codebooks.n != codes.n,
              f"codes are {codes.m}-dim {codes.n}-ary, codebooks are {codebooks.m}-dim {codebooks.n}-ary",
              DataError)
    return DataMatrix(np.vstack([values[row - 1] for values, row in zip(codebooks.index_values, codes.codes)]))
