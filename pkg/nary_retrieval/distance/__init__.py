from nary_retrieval.distance.euclidean import code_euclidean
from nary_retrieval.distance.hamming import bit_count64, hamming, hamming_distances
from nary_retrieval.distance.metrics import CodeEuclideanMetric, CodeMetric, HammingMetric, SymmetricMetric
from nary_retrieval.distance.ranking import RankedList, exhaustive_rank
from nary_retrieval.distance.tables import LookupTables, build_lookup_tables, symmetric_distance, symmetric_distances

__all__ = ["CodeEuclideanMetric", "CodeMetric", "HammingMetric", "LookupTables", "RankedList", "SymmetricMetric",
           "bit_count64", "build_lookup_tables", "code_euclidean", "exhaustive_rank", "hamming",
           "hamming_distances", "symmetric_distance", "symmetric_distances"]
