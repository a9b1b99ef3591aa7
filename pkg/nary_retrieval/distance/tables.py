"""Per-subspace lookup tables and the symmetric distance between subspace-clustering codes."""
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from nary_retrieval.encoders.subspace import SubspaceCodebooks
from nary_retrieval.shared import DataError, reject_if


@dataclass(frozen=True)
class LookupTables:
    """m tables of n×n squared distances, table i entry (a, b) = ||C_i[:, a] - C_i[:, b]||^2 (0-based a, b)."""

    tables: tuple[np.ndarray, ...]

    def __post_init__(self):
        tables = tuple(np.array(t, dtype=np.float64, copy=True) for t in self.tables)
        reject_if(not tables, "lookup tables need at least one subspace", DataError)
        n = tables[0].shape[0]
        for t in tables:
            reject_if(t.shape != (n, n), f"every table must be {n}×{n}, got {t.shape}", DataError)
            t.setflags(write=False)
        object.__setattr__(self, "tables", tables)

    @property
    def m(self) -> int:
        return len(self.tables)

    @property
    def n(self) -> int:
        return self.tables[0].shape[0]

    def stacked(self) -> np.ndarray:
        """m×n×n array of all tables."""
        return np.stack(self.tables)


def build_lookup_tables(cb: SubspaceCodebooks) -> LookupTables:
    return LookupTables(tables=tuple(cdist(c.T, c.T, "sqeuclidean") for c in cb.codebooks))


def _check_code(tables: LookupTables, code: np.ndarray):
    reject_if(code.shape != (tables.m,), f"code must have length {tables.m}, got shape {code.shape}", DataError)
    reject_if(code.min() < 1 or code.max() > tables.n, f"code entries must lie in 1..{tables.n}", DataError)


def symmetric_distance(tables: LookupTables, a, b) -> float:
    """Sum over subspaces i of L_i(a_i, b_i) for two 1-based codes of length m."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    _check_code(tables, a)
    _check_code(tables, b)
    return float(sum(t[i - 1, j - 1] for t, i, j in zip(tables.tables, a, b)))


def symmetric_distances(tables: LookupTables, query, base_codes: np.ndarray) -> np.ndarray:
    """Symmetric distance from one code to every column of an m×N code matrix."""
    query = np.asarray(query, dtype=np.int64)
    _check_code(tables, query)
    reject_if(base_codes.shape[0] != tables.m, f"base codes must have {tables.m} rows", DataError)
    total = np.zeros(base_codes.shape[1])
    for t, q, row in zip(tables.tables, query, base_codes):
        total += t[q - 1, row - 1]
    return total
