from nary_retrieval.evaluation.bench import BenchConfig, run_bench, trend_summary
from nary_retrieval.evaluation.convergence import convergence_trace
from nary_retrieval.evaluation.embedding_eval import (compare_feature_sources, embedding_classification,
                                                      nearest_neighbor_accuracy)
from nary_retrieval.evaluation.experiment import ExperimentConfig, ExperimentResult, Strategy, run_experiment
from nary_retrieval.evaluation.recall import RecallCurve, auc_recall, recall_at_r

__all__ = ["BenchConfig", "ExperimentConfig", "ExperimentResult", "RecallCurve", "Strategy", "auc_recall",
           "compare_feature_sources", "convergence_trace", "embedding_classification", "nearest_neighbor_accuracy",
           "recall_at_r", "run_bench", "run_experiment", "trend_summary"]
