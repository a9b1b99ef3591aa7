"""1-NN classification with codes used as feature vectors."""
import logging

import numpy as np
from scipy.spatial.distance import cdist

from nary_retrieval.encoders.embedding import FeatureSource, codes_as_features
from nary_retrieval.encoders.encoder_factory import Encoder, encoder_factory
from nary_retrieval.encoders.subspace import SubspaceCodebooks, refine_ck_indices
from nary_retrieval.evaluation.experiment import ExperimentConfig, prepare_splits
from nary_retrieval.models.matrix import DataMatrix
from nary_retrieval.shared import DataError, reject_if

logger = logging.getLogger(__name__)


def nearest_neighbor_accuracy(train_features: DataMatrix, train_labels, test_features: DataMatrix,
                              test_labels) -> float:
    """Accuracy of labelling every test column with the label of its nearest training column."""
    train_labels = np.asarray(train_labels)
    test_labels = np.asarray(test_labels)
    reject_if(len(train_labels) != train_features.count or len(test_labels) != test_features.count,
              "label counts do not match the feature counts", DataError)
    nearest = np.argmin(cdist(test_features.points, train_features.points, "sqeuclidean"), axis=1)
    return float(np.mean(train_labels[nearest] == test_labels))


def embedding_classification(train_x: DataMatrix, train_labels, test_x: DataMatrix, test_labels,
                             encoder: Encoder, source: FeatureSource = FeatureSource.LSQ_LEVELS) -> float:
    """Encodes both splits, maps the codes to features and classifies the test split by 1-NN.

    An untrained encoder is trained on train_x first. ck-refined features refine the codebooks
    of a subspace-clustering encoder before use.
    """
    if not encoder.trained:
        encoder.train(train_x)
    reject_if(encoder.binary, f"{encoder.method} produces binary codes, not n-ary ones", ValueError)
    codebooks = None
    if FeatureSource(source) == FeatureSource.CK_REFINED:
        reject_if(not isinstance(encoder.model, SubspaceCodebooks),
                  f"{encoder.method} has no codebooks to refine", ValueError)
        codebooks = encoder.model if encoder.model.index_values is not None else refine_ck_indices(encoder.model)
    train_features = codes_as_features(encoder.encode(train_x), source, codebooks)
    test_features = codes_as_features(encoder.encode(test_x), source, codebooks)
    return nearest_neighbor_accuracy(train_features, train_labels, test_features, test_labels)


def compare_feature_sources(cfg: ExperimentConfig) -> dict[str, float]:
    """Accuracies of LSQ levels, refined CK-means indices and raw CK-means indices on labeled
    synthetic clusters; the train split is the labeled training set, the query split the test set.
    """
    reject_if(cfg.data is not None, "feature comparison needs labeled synthetic data", ValueError)
    splits = prepare_splits(cfg)
    params = cfg.encoder_params()
    lsq = encoder_factory("lsq-nary", cfg.bit_budget, cfg.bits_per_dim, params).train(splits.train)
    ck = encoder_factory("ckmeans", cfg.bit_budget, cfg.bits_per_dim, params).train(splits.train)
    ck_refined = encoder_factory("ckmeans", cfg.bit_budget, cfg.bits_per_dim, params)
    ck_refined.model = refine_ck_indices(ck.model)

    args = (splits.train, splits.train_labels, splits.queries, splits.query_labels)
    accuracies = {
        "lsq-levels": embedding_classification(*args, lsq, FeatureSource.LSQ_LEVELS),
        "ck-refined": embedding_classification(*args, ck_refined, FeatureSource.CK_REFINED),
        "ck-raw": embedding_classification(*args, ck, FeatureSource.RAW_INDICES),
    }
    logger.info(f"Codes-as-features accuracy (seed {cfg.seed}): "
                + ", ".join(f"{k}={v:.3f}" for k, v in accuracies.items()))
    return accuracies
