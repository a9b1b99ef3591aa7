"""Reading and writing data matrices as raw little-endian float32 files or headerless CSV.

raw-f32 layout: magic b"NARY", u32 D, u32 N (little-endian), then D·N float32 values in
column-major order (point after point).
"""
import logging
import os
import struct
from enum import Enum
from typing import Final, Union

import numpy as np
import pandas as pd

from nary_retrieval.models.matrix import DataMatrix
from nary_retrieval.shared import DataError, ensure_finite, reject_if

logger = logging.getLogger(__name__)

MAGIC: Final[bytes] = b"NARY"
HEADER: Final[struct.Struct] = struct.Struct("<4sII")


class MatrixFormat(str, Enum):
    RAW_F32 = "raw-f32"
    CSV = "csv"


def _check_path(path: Union[str, os.PathLike]):
    if path is None or str(path) == "":
        raise OSError("empty path")


def load_matrix(path: Union[str, os.PathLike], fmt: MatrixFormat = MatrixFormat.RAW_F32) -> DataMatrix:
    """Loads a data matrix from disk.

    :param path: File to read.
    :param fmt: raw-f32 (header + column-major payload) or csv (one point per row, no header).
    :return: The matrix with one column per point.
    :raises OSError: when the file cannot be read.
    :raises DataError: on a malformed header, a payload of the wrong size or non-finite values.
    """
    _check_path(path)
    fmt = MatrixFormat(fmt)
    if fmt == MatrixFormat.CSV:
        try:
            df = pd.read_csv(path, header=None, dtype=np.float64, float_precision="round_trip")
        except (ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise DataError(f"Malformed csv matrix '{path}': {e}") from e
        values = df.to_numpy().T
        ensure_finite(values, f"matrix file '{path}'")
        logger.debug(f"Loaded csv matrix {values.shape} from {path}")
        return DataMatrix(values)

    with open(path, "rb") as f:
        raw = f.read()
    reject_if(len(raw) < HEADER.size, f"'{path}' is too short for a matrix header", DataError)
    magic, dim, count = HEADER.unpack_from(raw, 0)
    reject_if(magic != MAGIC, f"'{path}' has bad magic {magic!r}", DataError)
    reject_if(dim < 1 or count < 1, f"'{path}' declares an empty matrix ({dim}x{count})", DataError)
    payload = raw[HEADER.size:]
    expected = 4 * dim * count
    reject_if(len(payload) != expected,
              f"'{path}' declares {dim}x{count} values ({expected} bytes) but holds {len(payload)} bytes",
              DataError)
    values = np.frombuffer(payload, dtype="<f4").reshape((dim, count), order="F")
    ensure_finite(values, f"matrix file '{path}'")
    logger.debug(f"Loaded raw-f32 matrix {dim}x{count} from {path}")
    return DataMatrix(values.astype(np.float64))


def save_matrix(m: DataMatrix, path: Union[str, os.PathLike], fmt: MatrixFormat = MatrixFormat.RAW_F32):
    """Writes a data matrix so that load_matrix returns identical contents.

    raw-f32 stores float32, so values are rounded to single precision on the way out.
    """
    _check_path(path)
    fmt = MatrixFormat(fmt)
    if fmt == MatrixFormat.CSV:
        pd.DataFrame(m.points).to_csv(path, header=False, index=False, float_format="%.17g")
    else:
        with open(path, "wb") as f:
            f.write(HEADER.pack(MAGIC, m.dim, m.count))
            f.write(np.asarray(m.values, dtype="<f4").tobytes(order="F"))
    logger.debug(f"Wrote {fmt.value} matrix {m.dim}x{m.count} to {path}")


def split_columns(x: DataMatrix, counts: list[int]) -> list[DataMatrix]:
    """Splits the columns of a matrix into consecutive parts of the given sizes."""
    reject_if(sum(counts) > x.count, f"cannot split {x.count} points into parts {counts}", DataError)
    reject_if(any(c < 1 for c in counts), f"split sizes must be positive, got {counts}", ValueError)
    bounds = np.cumsum([0] + list(counts))
    return [x.columns(slice(int(a), int(b))) for a, b in zip(bounds, bounds[1:])]
