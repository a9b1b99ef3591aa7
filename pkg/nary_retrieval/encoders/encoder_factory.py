"""One encoder object per coding method, built for a bit budget or around a loaded model."""
import configparser
import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from nary_retrieval.distance.metrics import CodeEuclideanMetric, CodeMetric, HammingMetric, SymmetricMetric
from nary_retrieval.distance.tables import build_lookup_tables
from nary_retrieval.encoders.itq import ItqModel, itq_encode, itq_reconstruct, train_itq
from nary_retrieval.encoders.lsq import (LsqModel, lsq_encode, lsq_encode_binary, lsq_project, lsq_reconstruct,
                                         lsq_reconstruct_binary, train_lsq)
from nary_retrieval.encoders.subspace import (SubspaceCodebooks, sc_encode, sc_reconstruct, train_ckmeans,
                                              train_pq)
from nary_retrieval.mih.index import MultiIndexHash, build_binary_index, build_nary_index
from nary_retrieval.models.codes import BinaryCodeSet, NaryCodeSet, nary_to_binary
from nary_retrieval.models.matrix import DataMatrix
from nary_retrieval.shared import DataError, reject_if

logger = logging.getLogger(__name__)

NARY_METHODS = ("lsq-nary", "pq", "ckmeans")
BINARY_METHODS = ("lsq-binary", "itq", "okmeans")
METHODS = NARY_METHODS + BINARY_METHODS
METHOD_ALIASES = {"lsq": "lsq-nary"}

Model = Union[LsqModel, ItqModel, SubspaceCodebooks]
CodeSet = Union[NaryCodeSet, BinaryCodeSet]


def canonical_method(method: str) -> str:
    method = METHOD_ALIASES.get(method.strip().lower(), method.strip().lower())
    reject_if(method not in METHODS, f"unknown method '{method}', expected one of {METHODS}", ValueError)
    return method


@dataclass(frozen=True)
class CodeLayout:
    """How a bit budget is spent by a method.

    n-ary methods use m = bit_budget / bits_per_dim dimensions of n = 2^bits_per_dim levels.
    Binary methods use bit_budget bits; bits_per_dim is then the chunk width b of their index.
    """

    method: str
    bit_budget: int
    bits_per_dim: int

    def __post_init__(self):
        object.__setattr__(self, "method", canonical_method(self.method))
        reject_if(self.bit_budget < 1 or self.bits_per_dim < 1,
                  f"bit budget and bits per dimension must be positive, got {self.bit_budget}, {self.bits_per_dim}",
                  ValueError)
        reject_if(self.bit_budget % self.bits_per_dim,
                  f"bit budget {self.bit_budget} is not divisible by {self.bits_per_dim} bits per dimension",
                  ValueError)

    @property
    def binary(self) -> bool:
        return self.method in BINARY_METHODS

    @property
    def m(self) -> int:
        """Code length: dimensions for n-ary methods, bits for binary ones."""
        return self.bit_budget if self.binary else self.bit_budget // self.bits_per_dim

    @property
    def n(self) -> int:
        return 2 if self.binary else 1 << self.bits_per_dim

    @property
    def chunk_bits(self) -> int:
        return self.bits_per_dim if self.binary else 0


@dataclass
class EncoderParams:
    lam: float = 1.0
    max_iters: int = 100
    tol: float = 1e-6
    itq_iters: int = 50
    kmeans_iters: int = 25
    ck_iters: int = 20
    ck_init: str = "random"
    seed: int = 0

    @staticmethod
    def from_config(cfg: configparser.RawConfigParser, seed: int = 0) -> "EncoderParams":
        return EncoderParams(lam=cfg.getfloat("LSQ", "lambda", fallback=1.0),
                             max_iters=cfg.getint("LSQ", "max_iters", fallback=100),
                             tol=cfg.getfloat("LSQ", "tol", fallback=1e-6),
                             itq_iters=cfg.getint("ITQ", "iters", fallback=50),
                             kmeans_iters=cfg.getint("KMEANS", "max_iters", fallback=25),
                             ck_iters=cfg.getint("CKMEANS", "iters", fallback=20),
                             ck_init=cfg.get("CKMEANS", "init", fallback="random"),
                             seed=seed)


class Encoder:
    """Trains, applies and inverts one coding method and knows how its codes are compared and indexed."""

    method = ""

    def __init__(self, layout: CodeLayout, params: Optional[EncoderParams] = None, model: Optional[Model] = None):
        self.layout = layout
        self.params = params or EncoderParams()
        self.model = model

    @property
    def binary(self) -> bool:
        return self.layout.binary

    @property
    def trained(self) -> bool:
        return self.model is not None

    def train(self, x: DataMatrix) -> "Encoder":
        logger.info(f"Training {self.method} with m={self.layout.m}, n={self.layout.n} "
                    f"({self.layout.bit_budget} bits)")
        self.model = self._train(x)
        return self

    def encode(self, x: DataMatrix) -> CodeSet:
        reject_if(not self.trained, f"{self.method} encoder is not trained", RuntimeError)
        return self._encode(x)

    def reconstruct(self, codes: CodeSet) -> DataMatrix:
        reject_if(not self.trained, f"{self.method} encoder is not trained", RuntimeError)
        return self._reconstruct(codes)

    def projection(self, x: DataMatrix) -> Optional[np.ndarray]:
        """Unquantized per-dimension values of the queries, if the method has them."""
        return None

    def metric(self) -> CodeMetric:
        return HammingMetric()

    def build_index(self, codes: CodeSet) -> MultiIndexHash:
        if self.binary:
            return build_binary_index(codes, self.layout.chunk_bits)
        return build_nary_index(codes)

    def convergence(self) -> list[float]:
        """Training-set reconstruction error per iteration."""
        return []

    def _train(self, x: DataMatrix) -> Model:
        raise NotImplementedError

    def _encode(self, x: DataMatrix) -> CodeSet:
        raise NotImplementedError

    def _reconstruct(self, codes: CodeSet) -> DataMatrix:
        raise NotImplementedError


class LsqNaryEncoder(Encoder):
    method = "lsq-nary"

    def _train(self, x):
        p = self.params
        return train_lsq(x, self.layout.m, self.layout.n, lam=p.lam, max_iters=p.max_iters, tol=p.tol)

    def _encode(self, x):
        return lsq_encode(self.model, x)

    def _reconstruct(self, codes):
        return lsq_reconstruct(self.model, codes)

    def projection(self, x):
        return lsq_project(self.model, x)

    def metric(self):
        return CodeEuclideanMetric(self.model.quantizer)

    def convergence(self):
        return list(self.model.reconstruction_history)


class LsqBinaryEncoder(LsqNaryEncoder):
    method = "lsq-binary"

    def _encode(self, x):
        return lsq_encode_binary(self.model, x)

    def _reconstruct(self, codes):
        return lsq_reconstruct_binary(self.model, codes)

    def projection(self, x):
        return None

    def metric(self):
        return HammingMetric()


class ItqEncoder(Encoder):
    method = "itq"

    def _train(self, x):
        return train_itq(x, self.layout.m, iters=self.params.itq_iters, seed=self.params.seed)

    def _encode(self, x):
        return itq_encode(self.model, x)

    def _reconstruct(self, codes):
        return itq_reconstruct(self.model, codes)

    def convergence(self):
        # the rotation loss ||B - R^T P^T X||^2, the quantity ITQ descends on
        return list(self.model.loss_history)


class PqEncoder(Encoder):
    method = "pq"

    def _train(self, x):
        return train_pq(x, self.layout.m, self.layout.n, seed=self.params.seed, max_iters=self.params.kmeans_iters)

    def _encode(self, x):
        return sc_encode(self.model, x)

    def _reconstruct(self, codes):
        return sc_reconstruct(self.model, codes)

    def metric(self):
        return SymmetricMetric(build_lookup_tables(self.model))

    def convergence(self):
        return list(self.model.objective_history)


class CkmeansEncoder(PqEncoder):
    method = "ckmeans"

    def _train(self, x):
        p = self.params
        return train_ckmeans(x, self.layout.m, self.layout.n, iters=p.ck_iters, seed=p.seed, init=p.ck_init,
                             max_iters=p.kmeans_iters)


class OkmeansEncoder(CkmeansEncoder):
    method = "okmeans"

    def _encode(self, x):
        return nary_to_binary(sc_encode(self.model, x))

    def _reconstruct(self, codes):
        return sc_reconstruct(self.model, NaryCodeSet(n=2, codes=codes.to_bits().astype(np.int32) + 1))

    def metric(self):
        return HammingMetric()


ENCODERS = {
    "lsq-nary": LsqNaryEncoder,
    "lsq-binary": LsqBinaryEncoder,
    "itq": ItqEncoder,
    "pq": PqEncoder,
    "ckmeans": CkmeansEncoder,
    "okmeans": OkmeansEncoder,
}


def encoder_factory(method: str, bit_budget: int, bits_per_dim: int,
                    params: Optional[EncoderParams] = None) -> Encoder:
    layout = CodeLayout(method, bit_budget, bits_per_dim)
    return ENCODERS[layout.method](layout, params)


def encoder_from_model(method: str, model: Model, chunk_bits: int = 1) -> Encoder:
    """Wraps a trained model; chunk_bits is the index chunk width for binary methods."""
    method = canonical_method(method)
    expected = {"lsq-nary": LsqModel, "lsq-binary": LsqModel, "itq": ItqModel}.get(method, SubspaceCodebooks)
    reject_if(not isinstance(model, expected), f"a {method} encoder needs a {expected.__name__}", DataError)
    if method in BINARY_METHODS:
        bits = model.m_bits if isinstance(model, ItqModel) else model.m
        layout = CodeLayout(method, bits, chunk_bits)
    else:
        n = model.n
        reject_if(n < 2 or n & (n - 1), f"{method} model arity {n} is not a power of two", DataError)
        bpd = n.bit_length() - 1
        layout = CodeLayout(method, model.m * bpd, bpd)
    return ENCODERS[method](layout, model=model)
