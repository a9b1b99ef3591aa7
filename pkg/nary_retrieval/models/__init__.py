from nary_retrieval.models.codes import BinaryCode, BinaryCodeSet, NaryCodeSet, nary_to_binary
from nary_retrieval.models.matrix import DataMatrix, NeighborList, PreprocessModel

__all__ = ["BinaryCode", "BinaryCodeSet", "DataMatrix", "NaryCodeSet", "NeighborList", "PreprocessModel",
           "nary_to_binary"]
