"""Multi-index hashing over code dimensions (n-ary codes) or b-bit chunks (binary codes)."""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from nary_retrieval.models.codes import BinaryCode, BinaryCodeSet, NaryCodeSet
from nary_retrieval.shared import DataError, reject_if

logger = logging.getLogger(__name__)

MAX_CHUNK_BITS = 24


class CodeKind(str, Enum):
    NARY = "nary"
    BINARY = "binary"


@dataclass(frozen=True)
class MultiIndexHash:
    """T hash tables over N base codes.

    Table t maps every bucket v (0-based: level index - 1, or the value of the t-th bit chunk)
    to the posting list of base ids whose key in that table is v, in ascending id order.

    :ivar kind: n-ary or binary.
    :ivar bucket_count: n for n-ary codes, 2^b for binary codes.
    :ivar chunk_bits: b for binary codes, 0 for n-ary codes.
    :ivar table_keys: T×N bucket of every base id in every table.
    :ivar base_codes: the indexed codes, kept for tie-breaking distances.
    """

    kind: CodeKind
    bucket_count: int
    chunk_bits: int
    table_keys: np.ndarray
    base_codes: Union[NaryCodeSet, BinaryCodeSet]

    def __post_init__(self):
        keys = np.array(self.table_keys, dtype=np.int64, copy=True)
        reject_if(keys.ndim != 2 or keys.shape[1] != self.base_codes.count,
                  f"table keys must be T×{self.base_codes.count}, got {keys.shape}", DataError)
        reject_if(keys.size and (keys.min() < 0 or keys.max() >= self.bucket_count),
                  f"bucket numbers must lie in 0..{self.bucket_count - 1}", DataError)
        keys.setflags(write=False)
        object.__setattr__(self, "kind", CodeKind(self.kind))
        object.__setattr__(self, "table_keys", keys)
        object.__setattr__(self, "postings", tuple(_posting_lists(row, self.bucket_count) for row in keys))

    @property
    def table_count(self) -> int:
        return self.table_keys.shape[0]

    @property
    def count(self) -> int:
        return self.table_keys.shape[1]

    def bucket(self, table: int, key: int) -> np.ndarray:
        return self.postings[table][key]

    def query_keys(self, query_code) -> np.ndarray:
        """The key of a query code in every table."""
        if self.kind == CodeKind.BINARY:
            reject_if(not isinstance(query_code, BinaryCode) or query_code.bits != self.base_codes.bits,
                      f"query must be a {self.base_codes.bits}-bit binary code", DataError)
            bits = np.unpackbits(query_code.packed)[:query_code.bits].reshape(-1, 1)
            return chunk_keys(bits, self.chunk_bits)[:, 0]
        code = np.asarray(query_code)
        reject_if(isinstance(query_code, BinaryCode) or code.shape != (self.table_count,),
                  f"query must be an n-ary code of length {self.table_count}", DataError)
        reject_if(code.min() < 1 or code.max() > self.bucket_count,
                  f"query entries must lie in 1..{self.bucket_count}", DataError)
        return code.astype(np.int64) - 1


def _posting_lists(keys: np.ndarray, bucket_count: int) -> tuple[np.ndarray, ...]:
    order = np.argsort(keys, kind="stable")
    bounds = np.cumsum(np.bincount(keys, minlength=bucket_count))[:-1]
    lists = tuple(np.split(order, bounds))
    for ids in lists:
        ids.setflags(write=False)
    return lists


def chunk_keys(bits: np.ndarray, b: int) -> np.ndarray:
    """Reads an m×N bit matrix as (m/b)×N integers, most significant bit first within each chunk."""
    m, count = bits.shape
    weights = (1 << np.arange(b - 1, -1, -1, dtype=np.int64))
    return np.einsum("tjn,j->tn", bits.reshape(m // b, b, count).astype(np.int64), weights)


def build_nary_index(codes: NaryCodeSet) -> MultiIndexHash:
    """One table per code dimension, bucket = level index."""
    logger.debug(f"Indexing {codes.count} {codes.m}-dim {codes.n}-ary codes")
    return MultiIndexHash(kind=CodeKind.NARY, bucket_count=codes.n, chunk_bits=0,
                          table_keys=codes.codes - 1, base_codes=codes)


def build_binary_index(codes: BinaryCodeSet, b: int) -> MultiIndexHash:
    """One table per chunk of b consecutive bits, read as a b-bit integer.

    :param codes: The base codes.
    :param b: Chunk width; must divide the code length.
    """
    reject_if(b < 1 or codes.bits % b, f"chunk width {b} does not divide {codes.bits} bits", ValueError)
    reject_if(b > MAX_CHUNK_BITS, f"chunk width {b} exceeds {MAX_CHUNK_BITS} bits", ValueError)
    logger.debug(f"Indexing {codes.count} {codes.bits}-bit codes in {codes.bits // b} chunks of {b} bits")
    return MultiIndexHash(kind=CodeKind.BINARY, bucket_count=1 << b, chunk_bits=b,
                          table_keys=chunk_keys(codes.to_bits(), b), base_codes=codes)
