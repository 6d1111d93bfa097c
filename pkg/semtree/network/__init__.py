from .semnet import (
    DTYPE,
    SemNet,
    ForwardRecord,
    encode,
    forward,
    decode,
    check_equivalence,
    boundary_points,
)
from .estimators import ArgmaxOneHotSTE, STECounter, argmax_one_hot, ste_counter
from .backprop import (
    Gradients,
    LossReport,
    loss_cross_entropy,
    backward_classification,
    backward_regression,
    add_l1,
    l1_penalty,
)
from .gradcheck import GradcheckReport, GradcheckSummary, finite_difference_check, run_gradcheck

__all__ = [
    "DTYPE",
    "SemNet",
    "ForwardRecord",
    "encode",
    "forward",
    "decode",
    "check_equivalence",
    "boundary_points",
    "ArgmaxOneHotSTE",
    "STECounter",
    "argmax_one_hot",
    "ste_counter",
    "Gradients",
    "LossReport",
    "loss_cross_entropy",
    "backward_classification",
    "backward_regression",
    "add_l1",
    "l1_penalty",
    "GradcheckReport",
    "GradcheckSummary",
    "finite_difference_check",
    "run_gradcheck",
]
