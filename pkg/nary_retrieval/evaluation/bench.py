"""Budget sweeps over methods, retrieval strategies, bits per dimension and seeds.

Every run becomes one row of a pandas frame; the trend summary counts, per qualitative
comparison, the seeds on which it holds.
"""
import configparser
import logging
import os
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import pandas as pd
from tqdm import tqdm

from nary_retrieval.dataset.matrix_io import load_matrix
from nary_retrieval.encoders.encoder_factory import BINARY_METHODS, canonical_method
from nary_retrieval.evaluation.embedding_eval import compare_feature_sources
from nary_retrieval.evaluation.experiment import (EXPERIMENT_SECTION, ExperimentConfig, Strategy,
                                                  read_key_value_file, run_experiment)
from nary_retrieval.mih.index import MAX_CHUNK_BITS
from nary_retrieval.shared import config as default_config
from nary_retrieval.shared import parse_int_list, parse_str_list, reject_if, str_to_bool

logger = logging.getLogger(__name__)

TREND_BUDGET = 64
NARY_TREND_BITS = (4, 5)
SUBSET_TREND_BITS = (5, 4)
SWEEP_KEYS = ("methods", "strategies", "bit_budgets", "bits_per_dim", "seeds", "embedding", "embedding_budget",
              "embedding_bits_per_dim")
BENCH_DATA_KEYS = ("dim", "latent_dim")
CLUSTERING_METHODS = ("pq", "ckmeans")
RESULT_COLUMNS = ["seed", "method", "strategy", "bit_budget", "bits_per_dim", "m", "n", "auc", "recall_at_1",
                  "recall_at_max", "train_error"]


@dataclass(frozen=True)
class BenchConfig:
    base: ExperimentConfig
    methods: tuple[str, ...]
    strategies: tuple[Strategy, ...]
    bit_budgets: tuple[int, ...]
    bits_per_dim: tuple[int, ...]
    seeds: tuple[int, ...]
    embedding: bool = True
    embedding_budget: int = 32
    embedding_bits_per_dim: int = 4

    @staticmethod
    def from_file(path) -> "BenchConfig":
        """key=value file; sweep keys fall back to the [BENCH] defaults, the rest as for eval.

        Unless the file sets dim or latent_dim, the synthetic data takes both from [BENCH], which
        keeps the 64-bit binary runs of the trends within the data dimension.
        """
        section = read_key_value_file(path)[EXPERIMENT_SECTION]

        def get(key: str) -> Optional[str]:
            return section[key] if key in section else default_config.get("BENCH", key, fallback=None)

        base_values = {key: value for key, value in section.items() if key not in SWEEP_KEYS}
        if not any(key in base_values for key in BENCH_DATA_KEYS):
            base_values.update({key: default_config.get("BENCH", key) for key in BENCH_DATA_KEYS
                                if default_config.has_option("BENCH", key)})
        base_parser = configparser.RawConfigParser()
        base_parser.read_dict({EXPERIMENT_SECTION: base_values})

        return BenchConfig(
            base=ExperimentConfig.from_section(base_parser[EXPERIMENT_SECTION]),
            methods=tuple(canonical_method(m) for m in parse_str_list(get("methods"))),
            strategies=tuple(Strategy(s) for s in parse_str_list(get("strategies"))),
            bit_budgets=tuple(parse_int_list(get("bit_budgets"))),
            bits_per_dim=tuple(parse_int_list(get("bits_per_dim"))),
            seeds=tuple(parse_int_list(get("seeds"))),
            embedding=str_to_bool(get("embedding") or "true"),
            embedding_budget=int(get("embedding_budget") or 32),
            embedding_bits_per_dim=int(get("embedding_bits_per_dim") or 4),
        )

    def runs(self) -> list[tuple[int, str, Strategy, int, int]]:
        """(seed, method, strategy, budget, bits_per_dim) of every run.

        Binary codes under distance estimation do not depend on the chunk width, so they run
        once per budget with the first bits_per_dim value.
        """
        runs = []
        for seed in self.seeds:
            for method in self.methods:
                for strategy in self.strategies:
                    for budget in self.bit_budgets:
                        widths = self.bits_per_dim
                        if method in BINARY_METHODS and strategy == Strategy.DISTANCE_ESTIMATION:
                            widths = widths[:1]
                        runs += [(seed, method, strategy, budget, bpd) for bpd in widths]
        return runs


def unsupported_run(cfg: ExperimentConfig, dim: int) -> Optional[str]:
    """Why the data cannot support this run, or None if it can."""
    layout = cfg.layout
    if layout.m > dim:
        return f"code length {layout.m} exceeds the data dimension {dim}"
    if layout.method in CLUSTERING_METHODS and layout.n > cfg.n_train:
        return f"{layout.n} clusters per subspace exceed the {cfg.n_train} training points"
    if layout.binary and cfg.strategy == Strategy.SUBSET_INDEXING and layout.chunk_bits > MAX_CHUNK_BITS:
        return f"chunk width {layout.chunk_bits} exceeds {MAX_CHUNK_BITS} bits"
    return None


def _bench_run(bench: BenchConfig, dim: int, method: str, strategy: Strategy, budget: int, bpd: int,
               seed: int) -> Optional[ExperimentConfig]:
    try:
        cfg = bench.base.with_run(method, strategy, budget, bpd, seed)
    except ValueError as e:
        reason = str(e)
    else:
        reason = unsupported_run(cfg, dim)
        if reason is None:
            return cfg
    logger.warning(f"Skipping {method}/{strategy.value} budget={budget} bits_per_dim={bpd}: {reason}")
    return None


def run_bench(bench: BenchConfig, output_dir: Optional[str] = None) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Runs the sweep and writes bench.csv and trends.csv into output_dir when given.

    Combinations that are invalid for the data (budget not divisible, code longer than D,
    more clusters than training points) are skipped with a warning. Every other error,
    such as unreadable or non-finite data, ends the bench.
    """
    reject_if(not bench.runs(), "the bench sweep is empty", ValueError)
    dim = bench.base.dim if bench.base.data is None else load_matrix(bench.base.data, bench.base.data_format).dim
    rows = []
    for seed, method, strategy, budget, bpd in tqdm(bench.runs(), desc="bench"):
        cfg = _bench_run(bench, dim, method, strategy, budget, bpd, seed)
        if cfg is None:
            continue
        result = run_experiment(cfg)
        rows.append({
            "seed": seed, "method": method, "strategy": strategy.value, "bit_budget": budget,
            "bits_per_dim": bpd, "m": cfg.layout.m, "n": cfg.layout.n, "auc": result.auc,
            "recall_at_1": result.curve.recall[0], "recall_at_max": result.curve.recall[-1],
            "train_error": result.train_error,
        })
    results = pd.DataFrame(rows, columns=RESULT_COLUMNS)

    embedding = {}
    if bench.embedding and bench.base.data is None:
        for seed in bench.seeds:
            cfg = _bench_run(bench, dim, "lsq-nary", Strategy.DISTANCE_ESTIMATION, bench.embedding_budget,
                             bench.embedding_bits_per_dim, seed)
            if cfg is not None and _bench_run(bench, dim, "ckmeans", Strategy.DISTANCE_ESTIMATION,
                                              bench.embedding_budget, bench.embedding_bits_per_dim, seed):
                embedding[seed] = compare_feature_sources(cfg)

    trends = trend_summary(results, embedding)
    if output_dir:
        os.makedirs(output_dir, exist_ok=True)
        results.to_csv(os.path.join(output_dir, "bench.csv"), index=False, float_format="%.10g",
                       lineterminator="\n")
        trends.to_csv(os.path.join(output_dir, "trends.csv"), index=False, lineterminator="\n")
        logger.info(f"Wrote {len(results)} bench rows and {len(trends)} trends to {output_dir}")
    return results, trends


def _value(results: pd.DataFrame, seed: int, method: str, column: str, strategy: Optional[Strategy] = None,
           budget: Optional[int] = None, bpd: Optional[int] = None) -> Optional[float]:
    rows = results[(results["seed"] == seed) & (results["method"] == method)]
    if strategy is not None:
        rows = rows[rows["strategy"] == strategy.value]
    if budget is not None:
        rows = rows[rows["bit_budget"] == budget]
    if bpd is not None:
        rows = rows[rows["bits_per_dim"] == bpd]
    return None if rows.empty else float(rows[column].iloc[0])


def _first_present(values) -> Optional[float]:
    present = [v for v in values if v is not None]
    return present[0] if present else None


def _nary_vs_binary_lsq(results, seed) -> Optional[bool]:
    de = Strategy.DISTANCE_ESTIMATION
    nary = [_value(results, seed, "lsq-nary", "auc", de, TREND_BUDGET, b) for b in NARY_TREND_BITS]
    nary = [v for v in nary if v is not None]
    binary = _value(results, seed, "lsq-binary", "auc", de, TREND_BUDGET)
    if not nary or binary is None:
        return None
    return max(nary) >= binary


def _lsq_vs_ckmeans(results, seed) -> Optional[bool]:
    de = Strategy.DISTANCE_ESTIMATION
    pairs = [(_value(results, seed, "lsq-nary", "auc", de, TREND_BUDGET, b),
              _value(results, seed, "ckmeans", "auc", de, TREND_BUDGET, b)) for b in NARY_TREND_BITS]
    pairs = [(a, b) for a, b in pairs if a is not None and b is not None]
    return all(a >= b for a, b in pairs) if pairs else None


def _subset_binary_lsq_vs_ckmeans(results, seed) -> Optional[bool]:
    si = Strategy.SUBSET_INDEXING
    for b in SUBSET_TREND_BITS:
        lsq = _value(results, seed, "lsq-binary", "auc", si, TREND_BUDGET, b)
        ck = _value(results, seed, "ckmeans", "auc", si, TREND_BUDGET, b)
        if lsq is not None and ck is not None:
            return lsq >= ck
    return None


def _reconstruction_vs(other: str) -> Callable[[pd.DataFrame, int], Optional[bool]]:
    def check(results, seed) -> Optional[bool]:
        pairs = []
        for budget in sorted(results["bit_budget"].unique()):
            lsq = _value(results, seed, "lsq-binary", "train_error", budget=int(budget))
            theirs = _value(results, seed, other, "train_error", budget=int(budget))
            if lsq is not None and theirs is not None:
                pairs.append((lsq, theirs))
        return all(a <= b for a, b in pairs) if pairs else None
    return check


TRENDS = [
    ("de-nary-lsq-vs-binary-lsq",
     f"distance estimation at {TREND_BUDGET} bits: n-ary LSQ (bits per dim {NARY_TREND_BITS}) AUC >= binary LSQ",
     _nary_vs_binary_lsq),
    ("de-nary-lsq-vs-ckmeans",
     f"distance estimation at {TREND_BUDGET} bits: n-ary LSQ AUC >= CK-means at matched bits per dim",
     _lsq_vs_ckmeans),
    ("si-binary-lsq-vs-ckmeans",
     f"subset indexing at {TREND_BUDGET} bits: binary LSQ AUC >= n-ary CK-means at matched chunk width",
     _subset_binary_lsq_vs_ckmeans),
    ("reconstruction-lsq-binary-vs-itq", "training reconstruction error: binary LSQ <= ITQ at every budget",
     _reconstruction_vs("itq")),
    ("reconstruction-lsq-binary-vs-okmeans", "training reconstruction error: binary LSQ <= OK-means at every budget",
     _reconstruction_vs("okmeans")),
]


def trend_summary(results: pd.DataFrame, embedding: Optional[dict[int, dict[str, float]]] = None) -> pd.DataFrame:
    """Per trend: how many seeds satisfy it out of the seeds where both sides were measured."""
    rows = []
    seeds = sorted(int(s) for s in results["seed"].unique()) if not results.empty else []
    for name, description, check in TRENDS:
        outcomes = [check(results, seed) for seed in seeds]
        evaluated = [o for o in outcomes if o is not None]
        rows.append({"trend": name, "description": description, "seeds_satisfied": int(np.sum(evaluated)),
                     "seeds_evaluated": len(evaluated)})

    embedding = embedding or {}
    for name, description, left, right in [
        ("embedding-lsq-vs-ck-refined", "1-NN accuracy: LSQ levels >= refined CK-means indices",
         "lsq-levels", "ck-refined"),
        ("embedding-ck-refined-vs-raw", "1-NN accuracy: refined CK-means indices >= raw indices",
         "ck-refined", "ck-raw"),
    ]:
        outcomes = [acc[left] >= acc[right] for acc in embedding.values()]
        rows.append({"trend": name, "description": description, "seeds_satisfied": int(np.sum(outcomes)),
                     "seeds_evaluated": len(outcomes)})
    return pd.DataFrame(rows, columns=["trend", "description", "seeds_satisfied", "seeds_evaluated"])
