from nary_retrieval.dataset.ground_truth import brute_force_knn
from nary_retrieval.dataset.matrix_io import MatrixFormat, load_matrix, save_matrix, split_columns
from nary_retrieval.dataset.preprocess import apply_preprocess, fit_preprocess
from nary_retrieval.dataset.synthetic import generate_labeled_synthetic, generate_synthetic

__all__ = ["MatrixFormat", "apply_preprocess", "brute_force_knn", "fit_preprocess", "generate_labeled_synthetic",
           "generate_synthetic", "load_matrix", "save_matrix", "split_columns"]
