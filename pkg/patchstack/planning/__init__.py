from .policy import ZERO_ACTION, Action, clip_action, select_action, select_target, snap_action
from .stability import (
    StabilityVerdict,
    StackLayer,
    assess,
    ground_truth_stable,
    stack_stable,
    support_stable,
    support_verdict,
)

__all__ = [
    "ZERO_ACTION",
    "Action",
    "StabilityVerdict",
    "StackLayer",
    "assess",
    "clip_action",
    "ground_truth_stable",
    "select_action",
    "select_target",
    "snap_action",
    "stack_stable",
    "support_stable",
    "support_verdict",
]
