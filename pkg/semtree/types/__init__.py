from .aliases import NodeID, LeafIndex, ClassLabel, ConfigHash
from .enums import TaskType, OptimizerType, SchedulerType, DataFormat, DecisionSign
from .descriptors import (
    InternalNode,
    Leaf,
    SignedDecision,
    SignedDecisionSet,
    OptimConfig,
    RunConfig,
    OPTIM_KEYS,
)
from .protocols import IHardPredictor

__all__ = [
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
    "SignedDecisionSet",
    "OptimConfig",
    "RunConfig",
    "OPTIM_KEYS",
    "IHardPredictor",
]
