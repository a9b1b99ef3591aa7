from nary_retrieval.mih.index import CodeKind, MultiIndexHash, build_binary_index, build_nary_index, chunk_keys
from nary_retrieval.mih.search import CandidateSet, collect_candidates, expand, expansion_order, query

__all__ = ["CandidateSet", "CodeKind", "MultiIndexHash", "build_binary_index", "build_nary_index", "chunk_keys",
           "collect_candidates", "expand", "expansion_order", "query"]
