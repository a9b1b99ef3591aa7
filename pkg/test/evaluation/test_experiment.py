import os
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

from nary_retrieval.containers import load_index, load_model
from nary_retrieval.evaluation.experiment import (ExperimentConfig, Strategy, prepare_splits, read_key_value_file,
                                                  run_experiment)
from nary_retrieval.evaluation.report import format_report
from test.shared import small_experiment, write_config_file


def config(tmp_path, **overrides) -> ExperimentConfig:
    return ExperimentConfig.from_file(write_config_file(tmp_path / "experiment.cfg", **small_experiment(**overrides)))


def test_config_from_file(tmp_path):
    cfg = config(tmp_path, method="lsq", bit_budget=16, bits_per_dim=4, strategy="subset-indexing")
    assert cfg.method == "lsq-nary"
    assert cfg.strategy == Strategy.SUBSET_INDEXING
    assert (cfg.layout.m, cfg.layout.n) == (4, 16)
    assert cfg.r_grid == (1, 2, 4, 8, 16, 32)
    assert (cfg.dim, cfg.n_train, cfg.n_base, cfg.n_query) == (8, 300, 200, 40)
    assert cfg.iters == 5 and cfg.itq_iters == 10
    assert cfg.label == "lsq-nary_subset-indexing_b16_d4_s3"


def test_config_defaults_come_from_config_ini(tmp_path):
    cfg = ExperimentConfig.from_file(write_config_file(tmp_path / "empty.cfg", method="pq"))
    assert cfg.lam == 1.0
    assert cfg.n_base == 10000
    assert cfg.r_grid[-1] == 1024
    assert cfg.normalize


@pytest.mark.parametrize("overrides", [dict(bit_budget=64, bits_per_dim=5), dict(method="opq"), dict(k=0),
                                       dict(strategy="lsh"), dict(latent_dim=9)])
def test_invalid_configs(tmp_path, overrides):
    with pytest.raises(ValueError):
        config(tmp_path, **overrides)


def test_malformed_config_file(tmp_path):
    path = tmp_path / "broken.cfg"
    path.write_text("[section]\nmethod = pq\n[section]\n", encoding="utf-8")
    with pytest.raises(ValueError):
        read_key_value_file(path)


def test_splits_are_preprocessed_with_the_train_mean(tmp_path):
    splits = prepare_splits(config(tmp_path, normalize="false"))
    assert (splits.train.count, splits.base.count, splits.queries.count) == (300, 200, 40)
    assert np.allclose(splits.train.values.mean(axis=1), 0.0, atol=1e-12)
    assert len(splits.train_labels) == 300 and len(splits.query_labels) == 40
    assert not splits.preprocess.normalize_to_sphere


def test_near_lossless_codes_mimic_exact_search(tmp_path):
    cfg = config(tmp_path, method="lsq", bit_budget=128, bits_per_dim=16, **{"lambda": 0.0})
    assert (cfg.layout.m, cfg.layout.n) == (cfg.dim, 65536)
    assert cfg.lam == 0.0
    result = run_experiment(cfg)
    assert result.curve.at(1) >= 0.95
    assert list(result.curve.recall) == sorted(result.curve.recall)


def test_subset_indexing_to_exhaustion_finds_everything(tmp_path):
    cfg = config(tmp_path, method="lsq", bit_budget=16, bits_per_dim=4, strategy="subset-indexing", k=200,
                 r_grid="1,4,16,64,200")
    result = run_experiment(cfg)
    assert result.curve.at(200) == 1.0


def test_binary_subset_indexing(tmp_path):
    cfg = config(tmp_path, method="itq", bit_budget=8, bits_per_dim=2, strategy="subset-indexing")
    result = run_experiment(cfg)
    assert 0.0 < result.auc <= 1.0
    assert len(result.convergence) == 10


def test_reports_are_deterministic_across_runs_and_threads(tmp_path):
    cfg = config(tmp_path, method="ckmeans", bit_budget=16, bits_per_dim=4)
    first = run_experiment(cfg, str(tmp_path / "a"))
    second = run_experiment(cfg, str(tmp_path / "b"))
    threaded = run_experiment(replace(cfg, threads=3))

    with open(first.artifacts["report"], "rb") as a, open(second.artifacts["report"], "rb") as b:
        assert a.read() == b.read()
    assert threaded.curve.recall == first.curve.recall
    assert format_report(threaded) == format_report(first)


def test_artifacts(tmp_path):
    cfg = config(tmp_path, method="lsq", bit_budget=16, bits_per_dim=4, strategy="subset-indexing")
    result = run_experiment(cfg, str(tmp_path / "out"))
    assert set(result.artifacts) == {"report", "curve", "timing", "model", "index"}
    for path in result.artifacts.values():
        assert os.path.isfile(path)

    with open(result.artifacts["report"], encoding="utf-8") as f:
        report = dict(line.rstrip("\n").split("=", 1) for line in f)
    assert report["method"] == "lsq-nary"
    assert report["code_length"] == "4"
    assert float(report["auc"]) == pytest.approx(result.auc, rel=1e-9)
    assert "recall_definition" in report

    curve = pd.read_csv(result.artifacts["curve"])
    assert curve["R"].tolist() == list(cfg.evaluated_r_grid) == [1, 2, 4, 8, 16]
    assert report["r_grid"] == "1,2,4,8,16"
    assert curve["recall"].tolist() == pytest.approx(list(result.curve.recall))

    method, model, preprocess = load_model(result.artifacts["model"])
    assert method == "lsq-nary" and model.m == 4
    assert np.allclose(preprocess.mean, prepare_splits(cfg).preprocess.mean, atol=1e-6)
    assert load_index(result.artifacts["index"]).count == 200


def test_subset_indexing_grid_stops_at_k(tmp_path):
    cfg = config(tmp_path, method="lsq", bit_budget=16, bits_per_dim=4, strategy="subset-indexing", k=10)
    assert cfg.evaluated_r_grid == (1, 2, 4, 8)
    result = run_experiment(cfg)
    assert result.curve.r_grid == (1, 2, 4, 8)
    assert "recall@16=" not in format_report(result)
    assert "r_grid=1,2,4,8\n" in format_report(result)


def test_grid_truncation_only_applies_to_subset_indexing(tmp_path):
    assert config(tmp_path, k=5, r_grid="8,16").evaluated_r_grid == (8, 16)
    assert config(tmp_path, k=5, r_grid="8,16", strategy="subset-indexing").evaluated_r_grid == (5,)
