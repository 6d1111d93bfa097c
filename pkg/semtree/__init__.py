from __future__ import annotations

__version__ = "0.1.0"
__author__ = "SemTree Team"
__license__ = "MIT"

from .types import (
    NodeID,
    LeafIndex,
    ClassLabel,
    ConfigHash,
    TaskType,
    OptimizerType,
    SchedulerType,
    DataFormat,
    DecisionSign,
    InternalNode,
    Leaf,
    SignedDecision,
    OptimConfig,
    RunConfig,
    IHardPredictor,
)

from .exceptions import (
    SemTreeError,
    InvalidArgument,
    InvalidState,
    NumericFailure,
    DataError,
    ParseError,
    EncodeError,
    SplitError,
    DatasetNotFound,
    ChecksumMismatch,
    ConfigError,
    CheckpointCorruption,
    MissingStandardizer,
)

from .core import (
    TreeStructure,
    DecisionTree,
    DecisionParams,
    LeafPayloads,
    build_balanced,
    graft_classifier,
    traverse,
    predict,
)

from .network import (
    SemNet,
    encode,
    forward,
    decode,
    check_equivalence,
    backward_classification,
    backward_regression,
    add_l1,
    run_gradcheck,
)

from .optim import ParameterOptimizer, decay_lr, clip_grads, step

from .data import Dataset, Standardizer, load_csv, load_libsvm, one_hot, split, standardize

from .codecs.codec import CheckpointCodec

from .training import AggregateResult, fit, run_seeds

from .factory import (
    create_classifier,
    create_regressor,
    create_network_for,
    preset_config,
)

from .profiling import RunProfiler

__all__ = [
    # Types
    "NodeID",
    "LeafIndex",
    "ClassLabel",
    "ConfigHash",
    "TaskType",
    "OptimizerType",
    "SchedulerType",
    "DataFormat",
    "DecisionSign",
    "InternalNode",
    "Leaf",
    "SignedDecision",
    "OptimConfig",
    "RunConfig",
    "IHardPredictor",

    # Exceptions
    "SemTreeError",
    "InvalidArgument",
    "InvalidState",
    "NumericFailure",
    "DataError",
    "ParseError",
    "EncodeError",
    "SplitError",
    "DatasetNotFound",
    "ChecksumMismatch",
    "ConfigError",
    "CheckpointCorruption",
    "MissingStandardizer",

    # Trees
    "TreeStructure",
    "DecisionTree",
    "DecisionParams",
    "LeafPayloads",
    "build_balanced",
    "graft_classifier",
    "traverse",
    "predict",

    # Network
    "SemNet",
    "encode",
    "forward",
    "decode",
    "check_equivalence",
    "backward_classification",
    "backward_regression",
    "add_l1",
    "run_gradcheck",

    # Optimization
    "ParameterOptimizer",
    "decay_lr",
    "clip_grads",
    "step",

    # Data
    "Dataset",
    "Standardizer",
    "load_csv",
    "load_libsvm",
    "one_hot",
    "split",
    "standardize",

    # Codecs
    "CheckpointCodec",

    # Training
    "AggregateResult",
    "fit",
    "run_seeds",

    # Factory Functions
    "create_classifier",
    "create_regressor",
    "create_network_for",
    "preset_config",

    # Profiling
    "RunProfiler",
]

VERSION_INFO = tuple(map(int, __version__.split('.')))

def get_version() -> str:
    return __version__

def get_version_info() -> tuple[int, ...]:
    return VERSION_INFO
