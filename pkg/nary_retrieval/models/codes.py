"""Code sets produced by the encoders: n-ary index matrices and bit-packed binary codes."""
from dataclasses import dataclass

import numpy as np

from nary_retrieval.shared import DataError, reject_if

WORD_BYTES = 8
"""Binary codewords are padded to whole 64-bit words."""


@dataclass(frozen=True)
class NaryCodeSet:
    """N codes of length m with 1-based entries in 1..n, stored as an m×N int32 matrix."""

    n: int
    codes: np.ndarray

    def __post_init__(self):
        codes = np.array(self.codes, dtype=np.int32, copy=True)
        if codes.ndim == 1:
            codes = codes.reshape(-1, 1)
        reject_if(codes.ndim != 2, f"n-ary codes must be an m×N matrix, got shape {codes.shape}", DataError)
        reject_if(self.n < 1, f"arity must be positive, got {self.n}", DataError)
        reject_if(codes.size > 0 and (codes.min() < 1 or codes.max() > self.n),
                  f"n-ary code entries must lie in 1..{self.n}", DataError)
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)

    @property
    def m(self) -> int:
        return self.codes.shape[0]

    @property
    def count(self) -> int:
        return self.codes.shape[1]

    @property
    def bits_per_point(self) -> float:
        return self.m * float(np.log2(self.n)) if self.n > 1 else 0.0

    def code(self, i: int) -> np.ndarray:
        return self.codes[:, i]


@dataclass(frozen=True)
class BinaryCode:
    """One m-bit codeword, MSB-first within each byte, padding bits zero."""

    bits: int
    packed: np.ndarray

    @staticmethod
    def from_string(bit_string: str) -> "BinaryCode":
        """Builds a codeword from text such as '110000' (first character is bit 0)."""
        reject_if(any(c not in "01" for c in bit_string), f"not a bit string: '{bit_string}'", DataError)
        bits = np.array([[int(c)] for c in bit_string], dtype=np.uint8)
        return BinaryCodeSet.from_bits(bits).code(0)

    def to_string(self) -> str:
        unpacked = np.unpackbits(self.packed)[:self.bits]
        return "".join(str(b) for b in unpacked)


@dataclass(frozen=True)
class BinaryCodeSet:
    """N codewords of m bits, packed row-wise into N × (8·words) uint8 with zeroed padding."""

    bits: int
    packed: np.ndarray

    def __post_init__(self):
        packed = np.array(self.packed, dtype=np.uint8, copy=True)
        reject_if(self.bits < 1, f"binary codes need at least one bit, got {self.bits}", DataError)
        reject_if(packed.ndim != 2 or packed.shape[1] != self.row_bytes,
                  f"packed codes must have {self.row_bytes} bytes per codeword, got shape {packed.shape}",
                  DataError)
        packed &= _padding_mask(self.bits)
        packed.setflags(write=False)
        object.__setattr__(self, "packed", packed)

    @property
    def row_bytes(self) -> int:
        return packed_row_bytes(self.bits)

    @property
    def count(self) -> int:
        return self.packed.shape[0]

    @property
    def words(self) -> np.ndarray:
        """N × words view as uint64 for XOR/popcount scans."""
        return self.packed.view(np.uint64)

    @staticmethod
    def from_bits(bits) -> "BinaryCodeSet":
        """Packs an m×N matrix of 0/1 values; row j of the input is bit j of every codeword."""
        bits = np.asarray(bits)
        reject_if(bits.ndim != 2, f"bit matrix must be m×N, got shape {bits.shape}", DataError)
        m, count = bits.shape
        row_bytes = packed_row_bytes(m)
        packed = np.packbits(bits.T.astype(bool), axis=1)
        padded = np.zeros((count, row_bytes), dtype=np.uint8)
        padded[:, :packed.shape[1]] = packed
        return BinaryCodeSet(bits=m, packed=padded)

    def to_bits(self) -> np.ndarray:
        """Unpacks to an m×N uint8 matrix of 0/1 values."""
        return np.unpackbits(self.packed, axis=1)[:, :self.bits].T.copy()

    def code(self, i: int) -> BinaryCode:
        return BinaryCode(bits=self.bits, packed=self.packed[i])


def packed_row_bytes(bits: int) -> int:
    words = -(-bits // (8 * WORD_BYTES))
    return words * WORD_BYTES


def _padding_mask(bits: int) -> np.ndarray:
    """Byte mask keeping the first `bits` bits of a padded row."""
    mask_bits = np.zeros(packed_row_bytes(bits) * 8, dtype=np.uint8)
    mask_bits[:bits] = 1
    return np.packbits(mask_bits)


def nary_to_binary(codes: NaryCodeSet) -> BinaryCodeSet:
    """Reads a 2-ary code set as bits, index 1 -> 0 and index 2 -> 1."""
    reject_if(codes.n != 2, f"only 2-ary codes map to bits, got n={codes.n}", DataError)
    return BinaryCodeSet.from_bits(codes.codes - 1)
