import argparse
import logging
import sys
from dataclasses import replace

import numpy as np
import pandas as pd
from tqdm import tqdm

from nary_retrieval import settings
from nary_retrieval.containers import load_codes, load_index, load_model, save_codes, save_index, save_model
from nary_retrieval.dataset.matrix_io import MatrixFormat, load_matrix, save_matrix
from nary_retrieval.dataset.preprocess import apply_preprocess, fit_preprocess
from nary_retrieval.dataset.synthetic import generate_labeled_synthetic
from nary_retrieval.encoders.encoder_factory import (BINARY_METHODS, METHODS, EncoderParams, encoder_factory,
                                                     encoder_from_model)
from nary_retrieval.evaluation.bench import BenchConfig, run_bench
from nary_retrieval.evaluation.convergence import CONVERGENCE_METHODS, convergence_trace
from nary_retrieval.evaluation.experiment import ExperimentConfig, run_experiment
from nary_retrieval.mih.index import CodeKind, build_binary_index, build_nary_index
from nary_retrieval.mih.search import query
from nary_retrieval.models.codes import BinaryCodeSet
from nary_retrieval.shared import DataError, NumericError, config, reject_if

logger = logging.getLogger("nary_retrieval.main")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class CliParser(argparse.ArgumentParser):
    """Argument parser that reports usage errors with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_args(args):
    formats = [f.value for f in MatrixFormat]
    parser = CliParser(
            description='nary-retrieval trains n-ary and binary vector codes (LSQ, ITQ, PQ, CK-means, OK-means), '
                        'retrieves approximate nearest neighbors by exhaustive code-distance scans or by '
                        'multi-index hashing, and measures Recall@R at fixed bit budgets.',
            epilog='Example: python main.py gen --out data.f32 && '
                   'python main.py train --method lsq --bits 64 --bits-per-dim 4 --data data.f32 --model-out m.bin',
    )
    parser.add_argument('-v', '--verbose', action='store_true',
                        help='makes nary-retrieval verbose during operations. Useful for debugging.')
    commands = parser.add_subparsers(dest='command', metavar='<command>', required=True)

    gen = commands.add_parser('gen', help='generate a seeded Gaussian-mixture data matrix.')
    gen.add_argument('--seed', type=int, default=config.getint('DATASET', 'seed', fallback=7))
    gen.add_argument('--dim', type=int, default=config.getint('DATASET', 'dim', fallback=32))
    gen.add_argument('--count', type=int, default=config.getint('DATASET', 'n_base', fallback=10000))
    gen.add_argument('--clusters', type=int, default=config.getint('DATASET', 'clusters', fallback=50))
    gen.add_argument('--spread', type=float, default=config.getfloat('DATASET', 'spread', fallback=0.05))
    gen.add_argument('--latent-dim', type=int, default=config.getint('DATASET', 'latent_dim', fallback=0),
                     help='place the mixture on a random subspace of this dimension (0: the full space).')
    gen.add_argument('--out', required=True, metavar='<file>')
    gen.add_argument('--labels-out', metavar='<file>', help='optional csv with the cluster label of every point.')
    gen.add_argument('--format', choices=formats, default=MatrixFormat.RAW_F32.value)

    train = commands.add_parser('train', help='fit preprocessing and a coding model on a data matrix.')
    train.add_argument('--method', choices=list(METHODS) + ['lsq'], required=True,
                       help='lsq is short for lsq-nary.')
    train.add_argument('--bits', type=int, required=True, help='bit budget per point.')
    train.add_argument('--bits-per-dim', type=int, default=1,
                       help='bits per code dimension for n-ary methods, index chunk width for binary ones.')
    train.add_argument('--lambda', dest='lam', type=float, default=config.getfloat('LSQ', 'lambda', fallback=1.0))
    train.add_argument('--iters', type=int, help='iterations of the trainer; defaults come from config.ini.')
    train.add_argument('--seed', type=int, default=0)
    train.add_argument('--data', required=True, metavar='<file>')
    train.add_argument('--format', choices=formats, default=MatrixFormat.RAW_F32.value)
    train.add_argument('--no-normalize', action='store_true', help='only center the data.')
    train.add_argument('--model-out', required=True, metavar='<file>')

    encode = commands.add_parser('encode', help='encode a data matrix with a trained model.')
    encode.add_argument('--model', required=True, metavar='<file>')
    encode.add_argument('--data', required=True, metavar='<file>')
    encode.add_argument('--format', choices=formats, default=MatrixFormat.RAW_F32.value)
    encode.add_argument('--codes-out', required=True, metavar='<file>')

    index = commands.add_parser('index', help='build a multi-index hash over encoded base points.')
    index.add_argument('--codes', required=True, metavar='<file>')
    index.add_argument('--kind', choices=[k.value for k in CodeKind], required=True)
    index.add_argument('--b', type=int, default=1, help='bit chunk width for binary codes.')
    index.add_argument('--index-out', required=True, metavar='<file>')

    search = commands.add_parser('query', help='retrieve the top-k base ids for every query point.')
    search.add_argument('--index', required=True, metavar='<file>')
    search.add_argument('--model', required=True, metavar='<file>')
    search.add_argument('--queries', required=True, metavar='<file>')
    search.add_argument('--format', choices=formats, default=MatrixFormat.RAW_F32.value)
    search.add_argument('--k', type=int, default=config.getint('EVAL', 'k', fallback=100))
    search.add_argument('--out', required=True, metavar='<file>', help='csv with query, rank, id and score.')

    evaluate = commands.add_parser('eval', help='run one experiment from a key=value config file.')
    evaluate.add_argument('--config', required=True, metavar='<file>')
    evaluate.add_argument('--output-dir', metavar='<dir>')

    bench = commands.add_parser('bench', help='sweep budgets, bits per dimension, methods and seeds.')
    bench.add_argument('--config', required=True, metavar='<file>')
    bench.add_argument('--output-dir', metavar='<dir>')

    trace = commands.add_parser('trace', help='per-iteration training error of a binary coder.')
    trace.add_argument('--method', choices=CONVERGENCE_METHODS, required=True)
    trace.add_argument('--config', required=True, metavar='<file>')
    trace.add_argument('--out', metavar='<file>', help='csv of iteration and error; printed if omitted.')

    return parser.parse_args(args)


def output_dir(cli_dir):
    return cli_dir or settings.output_dir or config.get('EVAL', 'output_dir', fallback='results')


def with_env_threads(cfg: ExperimentConfig) -> ExperimentConfig:
    if settings.threads:
        return replace(cfg, threads=int(settings.threads))
    return cfg


def run_gen(cli_args):
    data, labels, _ = generate_labeled_synthetic(cli_args.seed, cli_args.dim, cli_args.count, cli_args.clusters,
                                                 cli_args.spread, cli_args.latent_dim or None)
    save_matrix(data, cli_args.out, cli_args.format)
    if cli_args.labels_out:
        pd.DataFrame({"label": labels}).to_csv(cli_args.labels_out, index=False)
    logger.info(f"Generated {data.count} points of dim {data.dim} into {cli_args.out}")


def run_train(cli_args):
    data = load_matrix(cli_args.data, cli_args.format)
    preprocess = fit_preprocess(data, normalize=not cli_args.no_normalize)
    params = EncoderParams.from_config(config, seed=cli_args.seed)
    params.lam = cli_args.lam
    if cli_args.iters is not None:
        params.max_iters = params.itq_iters = params.ck_iters = cli_args.iters
    encoder = encoder_factory(cli_args.method, cli_args.bits, cli_args.bits_per_dim, params)
    encoder.train(apply_preprocess(preprocess, data))
    save_model(encoder.model, cli_args.model_out, encoder.method, preprocess)
    logger.info(f"Saved {encoder.method} model to {cli_args.model_out}")


def load_encoder(path, chunk_bits=1):
    method, model, preprocess = load_model(path)
    return encoder_from_model(method, model, chunk_bits), preprocess


def preprocessed(path, fmt, preprocess):
    data = load_matrix(path, fmt)
    return apply_preprocess(preprocess, data) if preprocess is not None else data


def run_encode(cli_args):
    encoder, preprocess = load_encoder(cli_args.model)
    codes = encoder.encode(preprocessed(cli_args.data, cli_args.format, preprocess))
    save_codes(codes, cli_args.codes_out)
    logger.info(f"Encoded {codes.count} points into {cli_args.codes_out}")


def run_index(cli_args):
    codes = load_codes(cli_args.codes)
    if cli_args.kind == CodeKind.BINARY.value:
        reject_if(not isinstance(codes, BinaryCodeSet), "binary indexes need binary codes", DataError)
        index = build_binary_index(codes, cli_args.b)
    else:
        reject_if(isinstance(codes, BinaryCodeSet), "n-ary indexes need n-ary codes", DataError)
        index = build_nary_index(codes)
    save_index(index, cli_args.index_out)
    logger.info(f"Indexed {index.count} codes in {index.table_count} tables into {cli_args.index_out}")


def run_query(cli_args):
    index = load_index(cli_args.index)
    encoder, preprocess = load_encoder(cli_args.model, max(index.chunk_bits, 1))
    reject_if((index.kind == CodeKind.BINARY) != (encoder.method in BINARY_METHODS),
              f"a {encoder.method} model does not match a {index.kind.value} index", DataError)
    queries = preprocessed(cli_args.queries, cli_args.format, preprocess)
    query_codes = encoder.encode(queries)
    projection = encoder.projection(queries)
    metric = encoder.metric()

    rows = []
    for i in tqdm(range(queries.count), desc="query"):
        y = None if projection is None else projection[:, i]
        ranked = query(index, query_codes.code(i), cli_args.k, metric, y)
        rows += [(i, rank, int(j), float(s)) for rank, (j, s) in enumerate(zip(ranked.ids, ranked.scores))]
    pd.DataFrame(rows, columns=["query", "rank", "id", "score"]).to_csv(cli_args.out, index=False)
    logger.info(f"Wrote results of {queries.count} queries to {cli_args.out}")


def run_eval(cli_args):
    cfg = with_env_threads(ExperimentConfig.from_file(cli_args.config))
    result = run_experiment(cfg, output_dir(cli_args.output_dir))
    logger.info(f"AUC {result.auc:.4f}, report at {result.artifacts.get('report')}")


def run_bench_command(cli_args):
    bench = BenchConfig.from_file(cli_args.config)
    bench = replace(bench, base=with_env_threads(bench.base))
    _, trends = run_bench(bench, output_dir(cli_args.output_dir))
    for row in trends.itertuples():
        logger.info(f"{row.trend}: {row.seeds_satisfied}/{row.seeds_evaluated} seeds")


def run_trace(cli_args):
    trace = convergence_trace(cli_args.method, ExperimentConfig.from_file(cli_args.config))
    frame = pd.DataFrame(trace, columns=["iteration", "error"])
    if cli_args.out:
        frame.to_csv(cli_args.out, index=False, float_format="%.10g")
    else:
        print(frame.to_csv(index=False, float_format="%.10g"), end="")


COMMANDS = {
    "gen": run_gen,
    "train": run_train,
    "encode": run_encode,
    "index": run_index,
    "query": run_query,
    "eval": run_eval,
    "bench": run_bench_command,
    "trace": run_trace,
}


def main(argv=None) -> int:
    cli_args = parse_args(sys.argv[1:] if argv is None else argv)

    if cli_args.verbose:
        app_logger = logging.getLogger("nary_retrieval")
        app_logger.setLevel(logging.DEBUG)
        for handler in app_logger.handlers:
            handler.setLevel(logging.DEBUG)

    logger.info("Running command " + cli_args.command)
    try:
        COMMANDS[cli_args.command](cli_args)
    except DataError as e:
        logger.error(f"Data error: {e}")
        return EXIT_DATA
    except (NumericError, np.linalg.LinAlgError) as e:
        logger.error(f"Numeric failure: {e}")
        return EXIT_NUMERIC
    except ValueError as e:
        logger.error(f"Usage error: {e}")
        return EXIT_USAGE
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
