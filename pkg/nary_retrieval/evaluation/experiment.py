"""One retrieval experiment: train on the train split, code base and queries, retrieve, measure recall."""
import configparser
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np
from tqdm import tqdm

from nary_retrieval.containers import save_index, save_model
from nary_retrieval.dataset.ground_truth import brute_force_knn
from nary_retrieval.dataset.matrix_io import MatrixFormat, load_matrix, split_columns
from nary_retrieval.dataset.preprocess import apply_preprocess, fit_preprocess
from nary_retrieval.dataset.synthetic import generate_labeled_synthetic
from nary_retrieval.distance.ranking import RankedList, exhaustive_rank
from nary_retrieval.encoders.encoder_factory import CodeLayout, Encoder, EncoderParams, encoder_factory
from nary_retrieval.evaluation.recall import RecallCurve, auc_recall, recall_at_r
from nary_retrieval.evaluation.report import write_artifacts
from nary_retrieval.mih.search import query
from nary_retrieval.models.matrix import DataMatrix, PreprocessModel
from nary_retrieval.quantcore.error import quantization_error
from nary_retrieval.shared import config as default_config
from nary_retrieval.shared import parse_int_list, reject_if, str_to_bool

logger = logging.getLogger(__name__)

EXPERIMENT_SECTION = "experiment"


class Strategy(str, Enum):
    DISTANCE_ESTIMATION = "distance-estimation"
    SUBSET_INDEXING = "subset-indexing"


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a single run depends on. Synthetic data is drawn with the run's seed unless
    data points to a matrix file, which is then split into train, base and query columns.
    """

    method: str = "lsq-nary"
    strategy: Strategy = Strategy.DISTANCE_ESTIMATION
    bit_budget: int = 64
    bits_per_dim: int = 4
    lam: float = 1.0
    max_iters: int = 100
    tol: float = 1e-6
    iters: int = 20
    itq_iters: int = 50
    kmeans_iters: int = 25
    seed: int = 7
    k: int = 100
    r_grid: tuple[int, ...] = (1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024)
    data: Optional[str] = None
    data_format: MatrixFormat = MatrixFormat.RAW_F32
    dim: int = 32
    n_train: int = 5000
    n_base: int = 10000
    n_query: int = 500
    clusters: int = 50
    spread: float = 0.05
    latent_dim: Optional[int] = None
    normalize: bool = True
    threads: int = 1
    layout: CodeLayout = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        object.__setattr__(self, "data_format", MatrixFormat(self.data_format))
        object.__setattr__(self, "r_grid", tuple(int(r) for r in self.r_grid))
        object.__setattr__(self, "layout", CodeLayout(self.method, self.bit_budget, self.bits_per_dim))
        object.__setattr__(self, "method", self.layout.method)
        reject_if(self.k < 1, f"k must be >= 1, got {self.k}", ValueError)
        reject_if(self.threads < 1, f"threads must be >= 1, got {self.threads}", ValueError)
        reject_if(min(self.n_train, self.n_base, self.n_query) < 1, "split sizes must be positive", ValueError)
        reject_if(self.latent_dim is not None and not 1 <= self.latent_dim <= self.dim,
                  f"latent_dim must lie in 1..{self.dim}, got {self.latent_dim}", ValueError)

    @property
    def evaluated_r_grid(self) -> tuple[int, ...]:
        """The Recall@R grid actually measured. Subset indexing returns at most k ids, so its grid stops at k."""
        if self.strategy != Strategy.SUBSET_INDEXING:
            return self.r_grid
        return tuple(r for r in self.r_grid if r <= self.k) or (self.k,)

    @property
    def label(self) -> str:
        return f"{self.method}_{self.strategy.value}_b{self.bit_budget}_d{self.bits_per_dim}_s{self.seed}"

    def encoder_params(self) -> EncoderParams:
        return EncoderParams(lam=self.lam, max_iters=self.max_iters, tol=self.tol, itq_iters=self.itq_iters,
                             kmeans_iters=self.kmeans_iters, ck_iters=self.iters, seed=self.seed)

    def with_run(self, method: str, strategy: Strategy, bit_budget: int, bits_per_dim: int,
                 seed: int) -> "ExperimentConfig":
        return replace(self, method=method, strategy=strategy, bit_budget=bit_budget, bits_per_dim=bits_per_dim,
                       seed=seed)

    @staticmethod
    def from_section(section: configparser.SectionProxy,
                     defaults: configparser.RawConfigParser = default_config) -> "ExperimentConfig":
        """Reads experiment keys, falling back to the package defaults for missing ones."""

        def get(key: str, default_section: str, default_key: Optional[str] = None, fallback=None):
            if key in section:
                return section[key]
            return defaults.get(default_section, default_key or key, fallback=fallback)

        grid = parse_int_list(get("r_grid", "EVAL"))
        return ExperimentConfig(
            method=section.get("method", "lsq-nary"),
            strategy=section.get("strategy", Strategy.DISTANCE_ESTIMATION.value),
            bit_budget=int(section.get("bit_budget", "64")),
            bits_per_dim=int(section.get("bits_per_dim", "4")),
            lam=float(get("lambda", "LSQ", fallback="1.0")),
            max_iters=int(get("max_iters", "LSQ", fallback="100")),
            tol=float(get("tol", "LSQ", fallback="1e-6")),
            iters=int(get("iters", "CKMEANS", fallback="20")),
            itq_iters=int(get("itq_iters", "ITQ", "iters", fallback="50")),
            kmeans_iters=int(get("kmeans_iters", "KMEANS", "max_iters", fallback="25")),
            seed=int(get("seed", "DATASET", fallback="7")),
            k=int(get("k", "EVAL", fallback="100")),
            r_grid=grid or ExperimentConfig.r_grid,
            data=section.get("data") or None,
            data_format=section.get("data_format", MatrixFormat.RAW_F32.value),
            dim=int(get("dim", "DATASET", fallback="32")),
            n_train=int(get("n_train", "DATASET", fallback="5000")),
            n_base=int(get("n_base", "DATASET", fallback="10000")),
            n_query=int(get("n_query", "DATASET", fallback="500")),
            clusters=int(get("clusters", "DATASET", fallback="50")),
            spread=float(get("spread", "DATASET", fallback="0.05")),
            latent_dim=int(get("latent_dim", "DATASET", fallback="0")) or None,
            normalize=str_to_bool(get("normalize", "DATASET", fallback="true")),
            threads=int(get("threads", "EVAL", fallback="1")),
        )

    @staticmethod
    def from_file(path) -> "ExperimentConfig":
        """Parses a key=value experiment file (no section header needed)."""
        return ExperimentConfig.from_section(read_key_value_file(path)[EXPERIMENT_SECTION])


def read_key_value_file(path) -> configparser.RawConfigParser:
    """Reads key=value lines into an implicit [experiment] section."""
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    parser = configparser.RawConfigParser()
    try:
        parser.read_string(f"[{EXPERIMENT_SECTION}]\n{text}", source=str(path))
    except configparser.Error as e:
        raise ValueError(f"Malformed config file '{path}': {e}") from e
    return parser


@dataclass(frozen=True)
class Splits:
    train: DataMatrix
    base: DataMatrix
    queries: DataMatrix
    preprocess: PreprocessModel
    train_labels: Optional[np.ndarray] = None
    query_labels: Optional[np.ndarray] = None


def prepare_splits(cfg: ExperimentConfig) -> Splits:
    """Loads or generates the data, splits it and preprocesses all splits with the train-split model."""
    counts = [cfg.n_train, cfg.n_base, cfg.n_query]
    labels = None
    if cfg.data:
        data = load_matrix(cfg.data, cfg.data_format)
    else:
        data, labels, _ = generate_labeled_synthetic(cfg.seed, cfg.dim, sum(counts), cfg.clusters, cfg.spread,
                                                    cfg.latent_dim)
    train, base, queries = split_columns(data, counts)
    preprocess = fit_preprocess(train, cfg.normalize)
    train_labels = query_labels = None
    if labels is not None:
        train_labels = labels[:cfg.n_train]
        query_labels = labels[cfg.n_train + cfg.n_base:sum(counts)]
    return Splits(train=apply_preprocess(preprocess, train), base=apply_preprocess(preprocess, base),
                  queries=apply_preprocess(preprocess, queries), preprocess=preprocess,
                  train_labels=train_labels, query_labels=query_labels)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    curve: RecallCurve
    auc: float
    train_error: float
    convergence: list[float]
    timings: dict[str, float] = field(default_factory=dict)
    artifacts: dict[str, str] = field(default_factory=dict)


def retrieve(encoder: Encoder, strategy: Strategy, base: DataMatrix, queries: DataMatrix, k: int,
             threads: int = 1, base_codes=None) -> list[RankedList]:
    """Ranks the base for every query, exhaustively by code distance or through a multi-index hash.

    :param k: Result length per query, capped at the base size.
    :param threads: Worker threads over queries; the output does not depend on it.
    """
    base_codes = base_codes if base_codes is not None else encoder.encode(base)
    query_codes = encoder.encode(queries)
    metric = encoder.metric()
    k = min(k, base.count)
    if strategy == Strategy.SUBSET_INDEXING:
        index = encoder.build_index(base_codes)
        projection = encoder.projection(queries)

        def run(i: int) -> RankedList:
            y = None if projection is None else projection[:, i]
            return query(index, query_codes.code(i), k, metric, y)
    else:
        def run(i: int) -> RankedList:
            return exhaustive_rank(query_codes.code(i), base_codes, metric, k)

    ids = range(queries.count)
    quiet = not logger.isEnabledFor(logging.INFO)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(tqdm(pool.map(run, ids), total=queries.count, desc=strategy.value, disable=quiet))
    return [run(i) for i in tqdm(ids, desc=strategy.value, disable=quiet)]


def run_experiment(cfg: ExperimentConfig, output_dir: Optional[str] = None) -> ExperimentResult:
    """Runs one configuration end to end.

    Ground truth is the exact nearest neighbor in the preprocessed feature space. With an
    output_dir the report, recall CSV, timing file and model (plus index for subset indexing)
    are written there, named after cfg.label.
    """
    timings = {}
    started = time.perf_counter()
    splits = prepare_splits(cfg)
    timings["data"] = time.perf_counter() - started

    started = time.perf_counter()
    encoder = encoder_factory(cfg.method, cfg.bit_budget, cfg.bits_per_dim, cfg.encoder_params())
    encoder.train(splits.train)
    timings["train"] = time.perf_counter() - started
    train_error = quantization_error(splits.train, encoder.reconstruct(encoder.encode(splits.train)))

    started = time.perf_counter()
    base_codes = encoder.encode(splits.base)
    timings["encode"] = time.perf_counter() - started

    started = time.perf_counter()
    truth = brute_force_knn(splits.base, splits.queries, 1, threads=cfg.threads)
    timings["ground_truth"] = time.perf_counter() - started

    k = cfg.k if cfg.strategy == Strategy.SUBSET_INDEXING else max(cfg.r_grid)
    started = time.perf_counter()
    ranked = retrieve(encoder, cfg.strategy, splits.base, splits.queries, k, cfg.threads, base_codes)
    timings["retrieve"] = time.perf_counter() - started

    grid = cfg.evaluated_r_grid
    if grid != cfg.r_grid:
        logger.info(f"{cfg.label}: subset indexing returns {k} ids per query, Recall@R measured up to R={grid[-1]}")
    curve = recall_at_r(ranked, truth, grid, method=cfg.method, bit_budget=cfg.bit_budget)
    result = ExperimentResult(config=cfg, curve=curve, auc=auc_recall(curve), train_error=train_error,
                              convergence=encoder.convergence(), timings=timings)
    logger.info(f"{cfg.label}: AUC {result.auc:.4f}, recall@1 {curve.recall[0]:.4f}")

    if output_dir:
        os.makedirs(output_dir, exist_ok=True)
        result.artifacts = write_artifacts(result, output_dir)
        model_path = os.path.join(output_dir, f"{cfg.label}.model")
        save_model(encoder.model, model_path, cfg.method, splits.preprocess)
        result.artifacts["model"] = model_path
        if cfg.strategy == Strategy.SUBSET_INDEXING:
            index_path = os.path.join(output_dir, f"{cfg.label}.index")
            save_index(encoder.build_index(base_codes), index_path)
            result.artifacts["index"] = index_path
    return result
