from .loaders import RawTable, load_csv, load_libsvm, write_libsvm, format_libsvm_row
from .encoding import BinaryEncoder, OneHotEncoder, one_hot
from .dataset import Dataset, Splits, Standardizer, encode_labels, split, standardize
from .registry import REGISTRY, DatasetEntry, available, data_dir, locate, resolve
from .synthetic import piecewise_linear_1d, separable_blobs, generate

__all__ = [
    "RawTable",
    "load_csv",
    "load_libsvm",
    "write_libsvm",
    "format_libsvm_row",
    "BinaryEncoder",
    "OneHotEncoder",
    "one_hot",
    "Dataset",
    "Splits",
    "Standardizer",
    "encode_labels",
    "split",
    "standardize",
    "REGISTRY",
    "DatasetEntry",
    "available",
    "data_dir",
    "locate",
    "resolve",
    "piecewise_linear_1d",
    "separable_blobs",
    "generate",
]
