from nary_retrieval.quantcore.error import quantization_error
from nary_retrieval.quantcore.kmeans import KmeansModel, assign_to_centers, kmeans
from nary_retrieval.quantcore.quantizer import UniformQuantizer, quantize_matrix, quantize_scalar

__all__ = ["KmeansModel", "UniformQuantizer", "assign_to_centers", "kmeans", "quantization_error",
           "quantize_matrix", "quantize_scalar"]
