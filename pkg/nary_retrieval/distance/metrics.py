"""Code-space metrics used by the exhaustive ranker and by multi-index-hash queries.

A metric computes one-to-many distances between a query code and base codes, and the cost
of substituting each table key of a query, which orders the expansion of index queries.
Table keys are 0-based bucket numbers: level index - 1 for n-ary codes, the integer value
of a bit chunk for binary codes.
"""
from abc import ABC, abstractmethod
from typing import Optional

import numpy as np

from nary_retrieval.distance.hamming import bit_count64, hamming_distances
from nary_retrieval.distance.tables import LookupTables, symmetric_distances
from nary_retrieval.models.codes import BinaryCode, BinaryCodeSet, NaryCodeSet
from nary_retrieval.quantcore.quantizer import UniformQuantizer
from nary_retrieval.shared import DataError, reject_if


class CodeMetric(ABC):
    name: str = ""

    @abstractmethod
    def distances(self, query, base) -> np.ndarray:
        """Distance from the query code to every code of the base set."""

    @abstractmethod
    def key_costs(self, query_keys: np.ndarray, bucket_count: int,
                  query_projection: Optional[np.ndarray] = None) -> np.ndarray:
        """T×bucket_count cost of probing bucket v of table t instead of the query's own key."""


class SymmetricMetric(CodeMetric):
    """Lookup-table distance for subspace-clustering codes."""

    name = "symmetric"

    def __init__(self, tables: LookupTables):
        self.tables = tables

    def distances(self, query, base: NaryCodeSet) -> np.ndarray:
        reject_if(base.n != self.tables.n, f"codes are {base.n}-ary, tables are {self.tables.n}-ary", DataError)
        return symmetric_distances(self.tables, query, base.codes)

    def key_costs(self, query_keys, bucket_count, query_projection=None) -> np.ndarray:
        reject_if(bucket_count != self.tables.n, f"{bucket_count} buckets for {self.tables.n}-ary tables", DataError)
        return np.stack([t[key] for t, key in zip(self.tables.tables, query_keys)])


class HammingMetric(CodeMetric):
    """Hamming distance on packed binary codes; bucket costs are the Hamming distance between bit chunks."""

    name = "hamming"

    def distances(self, query: BinaryCode, base: BinaryCodeSet) -> np.ndarray:
        return hamming_distances(query, base).astype(np.float64)

    def key_costs(self, query_keys, bucket_count, query_projection=None) -> np.ndarray:
        keys = np.arange(bucket_count, dtype=np.uint64)
        return np.stack([bit_count64(keys ^ np.uint64(key)) for key in query_keys]).astype(np.float64)


class CodeEuclideanMetric(CodeMetric):
    """Squared Euclidean distance between the level values of subspace-reduction codes.

    Bucket costs are |theta_n(v) - y_t| against the query's unquantized projection y, or
    against its own level value when no projection is given.
    """

    name = "code-euclidean"

    def __init__(self, quantizer: UniformQuantizer):
        self.quantizer = quantizer

    def distances(self, query, base: NaryCodeSet) -> np.ndarray:
        query = np.asarray(query)
        reject_if(base.n != self.quantizer.arity or query.shape != (base.m,),
                  f"query of shape {query.shape} does not fit {base.m}-dim {base.n}-ary codes", DataError)
        levels = self.quantizer.levels
        diff = levels[base.codes - 1] - levels[query - 1][:, None]
        return np.sum(diff ** 2, axis=0)

    def key_costs(self, query_keys, bucket_count, query_projection=None) -> np.ndarray:
        reject_if(bucket_count != self.quantizer.arity,
                  f"{bucket_count} buckets for a {self.quantizer.arity}-level quantizer", DataError)
        levels = self.quantizer.levels
        if query_projection is None:
            targets = levels[np.asarray(query_keys)]
        else:
            targets = np.asarray(query_projection, dtype=np.float64).reshape(-1)
            reject_if(len(targets) != len(query_keys),
                      f"projection has {len(targets)} entries for {len(query_keys)} tables", DataError)
        return np.abs(levels[None, :] - targets[:, None])
