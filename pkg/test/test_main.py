from unittest import TestCase

import pandas as pd
import pytest

from main import EXIT_DATA, EXIT_OK, EXIT_USAGE, main, parse_args
from test.shared import small_experiment, write_config_file


class TestCommandLineArguments(TestCase):
    def test_parse_train_args(self):
        arguments = parse_args('train --method lsq --bits 64 --bits-per-dim 4 --lambda 0.5 --data d.f32 '
                               '--model-out m.bin'.split())
        self.assertEqual("train", arguments.command)
        self.assertEqual("lsq", arguments.method)
        self.assertEqual(64, arguments.bits)
        self.assertEqual(4, arguments.bits_per_dim)
        self.assertEqual(0.5, arguments.lam)
        self.assertIsNone(arguments.iters)
        self.assertFalse(arguments.no_normalize)

    def test_parse_query_args(self):
        arguments = parse_args('query --index i.bin --model m.bin --queries q.csv --format csv --k 5 '
                               '--out r.csv'.split())
        self.assertEqual(5, arguments.k)
        self.assertEqual("csv", arguments.format)

    def test_parse_gen_defaults(self):
        arguments = parse_args('gen --out data.f32'.split())
        self.assertEqual(7, arguments.seed)
        self.assertEqual(32, arguments.dim)
        self.assertEqual("raw-f32", arguments.format)
        self.assertEqual(0, arguments.latent_dim)
        self.assertIsNone(arguments.labels_out)

    def test_parse_verbose_arg(self):
        arguments = parse_args('-v trace --method itq --config c.cfg'.split())
        self.assertTrue(arguments.verbose)

    def test_parse_no_command_arg(self):
        with self.assertRaises(SystemExit) as raised:
            parse_args([])
        self.assertEqual(EXIT_USAGE, raised.exception.code)

    def test_parse_invalid_method_arg(self):
        with self.assertRaises(SystemExit) as raised:
            parse_args('train --method sh --bits 64 --data d.f32 --model-out m.bin'.split())
        self.assertEqual(EXIT_USAGE, raised.exception.code)

    def test_parse_invalid_index_kind(self):
        with self.assertRaises(SystemExit):
            parse_args('index --codes c.bin --kind ternary --index-out i.bin'.split())


def run(*args) -> int:
    return main([str(a) for a in args])


@pytest.fixture
def data_files(tmp_path):
    data, queries, labels = tmp_path / "data.f32", tmp_path / "queries.f32", tmp_path / "labels.csv"
    assert run("gen", "--seed", 1, "--dim", 8, "--count", 400, "--clusters", 5, "--out", data,
               "--labels-out", labels) == EXIT_OK
    assert run("gen", "--seed", 2, "--dim", 8, "--count", 20, "--clusters", 5, "--out", queries) == EXIT_OK
    return data, queries, labels


def check_results(path, queries, k, count):
    results = pd.read_csv(path)
    assert list(results.columns) == ["query", "rank", "id", "score"]
    assert len(results) == queries * k
    assert results.groupby("query")["rank"].apply(list).tolist() == [list(range(k))] * queries
    assert results["id"].between(0, count - 1).all()
    assert (results.groupby("query")["id"].nunique() == k).all()


def test_nary_pipeline(tmp_path, data_files):
    data, queries, labels = data_files
    model, codes, index, out = (tmp_path / name for name in ("m.bin", "c.bin", "i.bin", "r.csv"))
    assert len(pd.read_csv(labels)) == 400

    assert run("train", "--method", "lsq", "--bits", 16, "--bits-per-dim", 4, "--iters", 10, "--data", data,
               "--model-out", model) == EXIT_OK
    assert run("encode", "--model", model, "--data", data, "--codes-out", codes) == EXIT_OK
    assert run("index", "--codes", codes, "--kind", "nary", "--index-out", index) == EXIT_OK
    assert run("query", "--index", index, "--model", model, "--queries", queries, "--k", 5, "--out", out) == EXIT_OK
    check_results(out, 20, 5, 400)


def test_binary_pipeline(tmp_path, data_files):
    data, queries, _ = data_files
    model, codes, index, out = (tmp_path / name for name in ("m.bin", "c.bin", "i.bin", "r.csv"))

    assert run("train", "--method", "itq", "--bits", 8, "--bits-per-dim", 4, "--data", data,
               "--model-out", model) == EXIT_OK
    assert run("encode", "--model", model, "--data", data, "--codes-out", codes) == EXIT_OK
    assert run("index", "--codes", codes, "--kind", "binary", "--b", 4, "--index-out", index) == EXIT_OK
    assert run("query", "--index", index, "--model", model, "--queries", queries, "--k", 7, "--out", out) == EXIT_OK
    check_results(out, 20, 7, 400)


def test_exit_codes(tmp_path, data_files):
    data, _, _ = data_files
    model, codes = tmp_path / "m.bin", tmp_path / "c.bin"
    assert run("encode", "--model", tmp_path / "missing.bin", "--data", data, "--codes-out", codes) == EXIT_DATA
    assert run("train", "--method", "pq", "--bits", 10, "--bits-per-dim", 4, "--data", data,
               "--model-out", model) == EXIT_USAGE

    assert run("train", "--method", "pq", "--bits", 8, "--bits-per-dim", 2, "--data", data,
               "--model-out", model) == EXIT_OK
    assert run("encode", "--model", model, "--data", data, "--codes-out", codes) == EXIT_OK
    assert run("index", "--codes", codes, "--kind", "binary", "--index-out", tmp_path / "i.bin") == EXIT_DATA
    assert run("encode", "--model", codes, "--data", data, "--codes-out", codes) == EXIT_DATA


def test_usage_errors_exit_with_code_one():
    with pytest.raises(SystemExit) as raised:
        main(["query", "--k", "5"])
    assert raised.value.code == EXIT_USAGE


def test_eval_and_trace(tmp_path):
    cfg = write_config_file(tmp_path / "run.cfg", **small_experiment(bit_budget=16, bits_per_dim=4))
    assert run("eval", "--config", cfg, "--output-dir", tmp_path / "out") == EXIT_OK
    assert sorted(p.suffix for p in (tmp_path / "out").iterdir()) == [".csv", ".model", ".txt", ".txt"]

    trace, trace_cfg = tmp_path / "trace.csv", tmp_path / "trace.cfg"
    write_config_file(trace_cfg, **small_experiment(bit_budget=8, bits_per_dim=4))
    assert run("trace", "--method", "itq", "--config", trace_cfg, "--out", trace) == EXIT_OK
    frame = pd.read_csv(trace)
    assert list(frame.columns) == ["iteration", "error"]
    assert frame["iteration"].tolist() == list(range(1, 11))
