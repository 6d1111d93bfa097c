from .params import DecisionParams, LeafPayloads, affine_columns
from .tree import (
    TreeStructure,
    DecisionTree,
    build_balanced,
    build_class_subtree,
    graft_classifier,
    class_depth,
    leaf_decisions,
    traverse,
    traverse_batch,
    satisfied_leaves,
    predict,
    predict_batch,
)

__all__ = [
    "DecisionParams",
    "LeafPayloads",
    "affine_columns",
    "TreeStructure",
    "DecisionTree",
    "build_balanced",
    "build_class_subtree",
    "graft_classifier",
    "class_depth",
    "leaf_decisions",
    "traverse",
    "traverse_batch",
    "satisfied_leaves",
    "predict",
    "predict_batch",
]
