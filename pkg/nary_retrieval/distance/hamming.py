"""Hamming distance on bit-packed codes through a SWAR popcount over 64-bit words."""
import numpy as np

from nary_retrieval.models.codes import BinaryCode, BinaryCodeSet
from nary_retrieval.shared import DataError, reject_if

s55 = np.uint64(0x5555555555555555)
s33 = np.uint64(0x3333333333333333)
s0F = np.uint64(0x0F0F0F0F0F0F0F0F)
s01 = np.uint64(0x0101010101010101)


def bit_count64(arr: np.ndarray) -> np.ndarray:
    """Element-wise population count of a uint64 array."""
    arr = np.asarray(arr, dtype=np.uint64)
    arr = arr - ((arr >> np.uint64(1)) & s55)
    arr = (arr & s33) + ((arr >> np.uint64(2)) & s33)
    arr = (arr + (arr >> np.uint64(4))) & s0F
    return (arr * s01) >> np.uint64(56)


def hamming(a: BinaryCode, b: BinaryCode) -> int:
    reject_if(a.bits != b.bits, f"cannot compare a {a.bits}-bit code with a {b.bits}-bit code", DataError)
    return int(bit_count64(a.packed.view(np.uint64) ^ b.packed.view(np.uint64)).sum())


def hamming_distances(query: BinaryCode, base: BinaryCodeSet) -> np.ndarray:
    """Hamming distance from one codeword to every codeword of a set."""
    reject_if(query.bits != base.bits, f"cannot compare a {query.bits}-bit code with {base.bits}-bit codes",
              DataError)
    return bit_count64(base.words ^ query.packed.view(np.uint64)).sum(axis=1).astype(np.int64)
