"""Binary containers for trained models, code sets and multi-index hashes.

All integers are little-endian u32. Matrices are written as u32 rows, u32 cols and the
values as little-endian float32 in column-major order. Strings are a u32 length followed
by UTF-8 bytes.

    NARYMDL: magic, method tag, preprocessing block, method payload
    NARYCOD: magic, code set
    NARYIDX: magic, kind, T, bucket count, chunk bits, T·buckets posting lists
             (u32 length + u32 ids), base code set
"""
import logging
import os
import struct
from typing import Final, Optional, Union

import numpy as np

from nary_retrieval.encoders.encoder_factory import Model, canonical_method
from nary_retrieval.encoders.itq import ItqModel
from nary_retrieval.encoders.lsq import LsqModel
from nary_retrieval.encoders.subspace import SubspaceCodebooks
from nary_retrieval.mih.index import CodeKind, MultiIndexHash
from nary_retrieval.models.codes import BinaryCodeSet, NaryCodeSet, packed_row_bytes
from nary_retrieval.models.matrix import PreprocessModel
from nary_retrieval.quantcore.quantizer import UniformQuantizer
from nary_retrieval.shared import DataError, reject_if

logger = logging.getLogger(__name__)

MODEL_MAGIC: Final[bytes] = b"NARYMDL"
CODES_MAGIC: Final[bytes] = b"NARYCOD"
INDEX_MAGIC: Final[bytes] = b"NARYIDX"
U32: Final[struct.Struct] = struct.Struct("<I")

CODE_KINDS = {CodeKind.NARY: 0, CodeKind.BINARY: 1}

PathLike = Union[str, os.PathLike]


class _Writer:
    def __init__(self, magic: bytes):
        self.buffer = bytearray(magic)

    def u32(self, value: int):
        self.buffer += U32.pack(int(value))

    def text(self, value: str):
        raw = value.encode("utf-8")
        self.u32(len(raw))
        self.buffer += raw

    def matrix(self, values: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        rows, cols = values.shape
        self.u32(rows)
        self.u32(cols)
        self.buffer += values.astype("<f4").tobytes(order="F")

    def raw(self, payload: bytes):
        self.buffer += payload

    def save(self, path: PathLike):
        if path is None or str(path) == "":
            raise OSError("empty path")
        with open(path, "wb") as f:
            f.write(bytes(self.buffer))


class _Reader:
    def __init__(self, path: PathLike, magic: bytes):
        if path is None or str(path) == "":
            raise OSError("empty path")
        with open(path, "rb") as f:
            self.data = f.read()
        self.path = path
        self.offset = 0
        found = self.take(len(magic))
        reject_if(found != magic, f"'{path}' has bad magic {found!r}, expected {magic!r}", DataError)

    def take(self, size: int) -> bytes:
        reject_if(self.offset + size > len(self.data), f"'{self.path}' is truncated", DataError)
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def u32(self) -> int:
        return U32.unpack(self.take(U32.size))[0]

    def text(self) -> str:
        try:
            return self.take(self.u32()).decode("utf-8")
        except UnicodeDecodeError as e:
            raise DataError(f"'{self.path}' holds a malformed string: {e}") from e

    def matrix(self) -> np.ndarray:
        rows, cols = self.u32(), self.u32()
        values = np.frombuffer(self.take(4 * rows * cols), dtype="<f4")
        return values.reshape((rows, cols), order="F").astype(np.float64)

    def finish(self):
        reject_if(self.offset != len(self.data), f"'{self.path}' has trailing bytes", DataError)


def _write_preprocess(w: _Writer, preprocess: Optional[PreprocessModel]):
    w.u32(preprocess is not None)
    if preprocess is not None:
        w.matrix(preprocess.mean)
        w.u32(preprocess.normalize_to_sphere)


def _read_preprocess(r: _Reader) -> Optional[PreprocessModel]:
    if not r.u32():
        return None
    mean = r.matrix()
    return PreprocessModel(mean=mean[:, 0], normalize_to_sphere=bool(r.u32()))


def save_model(model: Model, path: PathLike, method: str, preprocess: Optional[PreprocessModel] = None):
    """Writes a trained model with its method tag and the preprocessing it expects."""
    method = canonical_method(method)
    w = _Writer(MODEL_MAGIC)
    w.text(method)
    _write_preprocess(w, preprocess)
    if isinstance(model, LsqModel):
        w.u32(model.n)
        w.matrix(np.array([[model.lam]]))
        w.matrix(model.W)
        w.matrix(model.V)
        w.u32(model.pinv_fallback)
    elif isinstance(model, ItqModel):
        w.matrix(model.projection)
        w.matrix(model.rotation)
        w.matrix(np.array([[model.scale]]))
    elif isinstance(model, SubspaceCodebooks):
        w.u32(model.n)
        w.u32(model.m)
        for d in model.subspace_dims:
            w.u32(d)
        for c in model.codebooks:
            w.matrix(c)
        w.u32(model.rotation is not None)
        if model.rotation is not None:
            w.matrix(model.rotation)
        w.u32(model.index_values is not None)
        if model.index_values is not None:
            w.matrix(np.vstack(model.index_values))
            for flag in model.degenerate_subspaces:
                w.u32(flag)
    else:
        raise DataError(f"cannot serialize a {type(model).__name__}")
    w.save(path)
    logger.debug(f"Saved {method} model to {path}")


def load_model(path: PathLike) -> tuple[str, Model, Optional[PreprocessModel]]:
    """Reads a model file.

    :return: (method tag, model, preprocessing or None).
    """
    r = _Reader(path, MODEL_MAGIC)
    tag = r.text()
    try:
        method = canonical_method(tag)
    except ValueError as e:
        raise DataError(f"'{path}' has unknown method tag '{tag}'") from e
    preprocess = _read_preprocess(r)

    if method in ("lsq-nary", "lsq-binary"):
        n = r.u32()
        lam = float(r.matrix()[0, 0])
        w, v = r.matrix(), r.matrix()
        model = LsqModel(W=w, V=v, quantizer=UniformQuantizer(n), lam=lam, pinv_fallback=bool(r.u32()))
    elif method == "itq":
        projection, rotation = r.matrix(), r.matrix()
        model = ItqModel(projection=projection, rotation=rotation, scale=float(r.matrix()[0, 0]))
    else:
        n, m = r.u32(), r.u32()
        dims = [r.u32() for _ in range(m)]
        codebooks = [r.matrix() for _ in range(m)]
        rotation = r.matrix() if r.u32() else None
        index_values, degenerate = None, ()
        if r.u32():
            index_values = list(r.matrix())
            degenerate = [bool(r.u32()) for _ in range(m)]
        model = SubspaceCodebooks(n=n, subspace_dims=dims, codebooks=codebooks, rotation=rotation,
                                  index_values=index_values, degenerate_subspaces=degenerate)
    r.finish()
    return method, model, preprocess


def _write_codes(w: _Writer, codes: Union[NaryCodeSet, BinaryCodeSet]):
    if isinstance(codes, BinaryCodeSet):
        w.u32(CODE_KINDS[CodeKind.BINARY])
        w.u32(codes.bits)
        w.u32(2)
        w.u32(codes.count)
        w.raw(codes.packed.tobytes())
    else:
        w.u32(CODE_KINDS[CodeKind.NARY])
        w.u32(codes.m)
        w.u32(codes.n)
        w.u32(codes.count)
        w.raw(codes.codes.astype("<u4").tobytes(order="F"))


def _read_codes(r: _Reader) -> Union[NaryCodeSet, BinaryCodeSet]:
    kind, m, n, count = r.u32(), r.u32(), r.u32(), r.u32()
    if kind == CODE_KINDS[CodeKind.BINARY]:
        row_bytes = packed_row_bytes(m)
        packed = np.frombuffer(r.take(row_bytes * count), dtype=np.uint8).reshape(count, row_bytes)
        return BinaryCodeSet(bits=m, packed=packed)
    reject_if(kind != CODE_KINDS[CodeKind.NARY], f"'{r.path}' has unknown code kind {kind}", DataError)
    values = np.frombuffer(r.take(4 * m * count), dtype="<u4").reshape((m, count), order="F")
    reject_if(values.size and values.max() > np.iinfo(np.int32).max, f"'{r.path}' holds oversized codes", DataError)
    return NaryCodeSet(n=n, codes=values.astype(np.int32))


def save_codes(codes: Union[NaryCodeSet, BinaryCodeSet], path: PathLike):
    w = _Writer(CODES_MAGIC)
    _write_codes(w, codes)
    w.save(path)


def load_codes(path: PathLike) -> Union[NaryCodeSet, BinaryCodeSet]:
    r = _Reader(path, CODES_MAGIC)
    codes = _read_codes(r)
    r.finish()
    return codes


def save_index(index: MultiIndexHash, path: PathLike):
    w = _Writer(INDEX_MAGIC)
    w.u32(CODE_KINDS[index.kind])
    w.u32(index.table_count)
    w.u32(index.bucket_count)
    w.u32(index.chunk_bits)
    for lists in index.postings:
        for ids in lists:
            w.u32(len(ids))
            w.raw(ids.astype("<u4").tobytes())
    _write_codes(w, index.base_codes)
    w.save(path)
    logger.debug(f"Saved index with {index.table_count} tables to {path}")


def load_index(path: PathLike) -> MultiIndexHash:
    r = _Reader(path, INDEX_MAGIC)
    kind_value, tables, bucket_count, chunk_bits = r.u32(), r.u32(), r.u32(), r.u32()
    kinds = {v: k for k, v in CODE_KINDS.items()}
    reject_if(kind_value not in kinds, f"'{path}' has unknown code kind {kind_value}", DataError)
    postings = []
    for _ in range(tables):
        lists = []
        for key in range(bucket_count):
            length = r.u32()
            lists.append(np.frombuffer(r.take(4 * length), dtype="<u4").astype(np.int64))
        postings.append(lists)
    base_codes = _read_codes(r)
    r.finish()

    table_keys = np.full((tables, base_codes.count), -1, dtype=np.int64)
    for t, lists in enumerate(postings):
        reject_if(sum(len(ids) for ids in lists) != base_codes.count,
                  f"'{path}': table {t} does not hold every base id exactly once", DataError)
        for key, ids in enumerate(lists):
            reject_if(ids.size and ids.max() >= base_codes.count, f"'{path}': posting id out of range", DataError)
            table_keys[t, ids] = key
        reject_if(np.any(table_keys[t] < 0), f"'{path}': table {t} does not hold every base id exactly once",
                  DataError)
    return MultiIndexHash(kind=kinds[kind_value], bucket_count=bucket_count, chunk_bits=chunk_bits,
                          table_keys=table_keys, base_codes=base_codes)
