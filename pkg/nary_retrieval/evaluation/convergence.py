"""Per-iteration training error of the binary coders."""
import logging

from nary_retrieval.encoders.encoder_factory import canonical_method, encoder_factory
from nary_retrieval.evaluation.experiment import ExperimentConfig, prepare_splits
from nary_retrieval.shared import reject_if

logger = logging.getLogger(__name__)

CONVERGENCE_METHODS = ("lsq-binary", "itq", "okmeans")


def convergence_trace(method: str, cfg: ExperimentConfig) -> list[tuple[int, float]]:
    """Trains a binary coder with cfg.bit_budget bits on the train split and returns its trace.

    LSQ reports ||X - V^T q_2(W^T X)||^2 after every iteration, OK-means its reconstruction
    objective after initialization and every round, ITQ its rotation loss ||B - R^T P^T X||^2.

    :return: (1-based iteration, error) pairs.
    """
    method = canonical_method(method)
    reject_if(method not in CONVERGENCE_METHODS,
              f"convergence traces are available for {CONVERGENCE_METHODS}, got '{method}'", ValueError)
    splits = prepare_splits(cfg)
    encoder = encoder_factory(method, cfg.bit_budget, 1, cfg.encoder_params()).train(splits.train)
    trace = encoder.convergence()
    logger.info(f"{method}: {len(trace)} iterations, final error {trace[-1]:.6g}")
    return [(i + 1, error) for i, error in enumerate(trace)]
