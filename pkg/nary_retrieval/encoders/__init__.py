from nary_retrieval.encoders.embedding import FeatureSource, codes_as_features
from nary_retrieval.encoders.itq import ItqModel, itq_encode, itq_reconstruct, train_itq
from nary_retrieval.encoders.lsq import (LsqModel, lsq_encode, lsq_encode_binary, lsq_objective, lsq_project,
                                         lsq_reconstruct, lsq_reconstruct_binary, lsq_requantize, train_lsq,
                                         train_lsq_binary)
from nary_retrieval.encoders.subspace import (SubspaceCodebooks, refine_ck_indices, sc_encode, sc_reconstruct,
                                              split_dims, train_ckmeans, train_okmeans, train_pq)

__all__ = ["FeatureSource", "ItqModel", "LsqModel", "SubspaceCodebooks", "codes_as_features", "itq_encode",
           "itq_reconstruct", "lsq_encode", "lsq_encode_binary", "lsq_objective", "lsq_project", "lsq_reconstruct",
           "lsq_reconstruct_binary", "lsq_requantize", "refine_ck_indices", "sc_encode", "sc_reconstruct",
           "split_dims", "train_ckmeans", "train_itq", "train_lsq", "train_lsq_binary", "train_okmeans", "train_pq"]
