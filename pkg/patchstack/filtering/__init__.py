from .belief import (
    BeliefMap,
    GripperPose,
    batch_update,
    belief_iou,
    belief_to_patch,
    covered_cells,
    init_belief,
    measurement_update,
    patch_at,
    predict_step,
    snapshot_rows,
    write_snapshot,
)

__all__ = [
    "BeliefMap",
    "GripperPose",
    "batch_update",
    "belief_iou",
    "belief_to_patch",
    "covered_cells",
    "init_belief",
    "measurement_update",
    "patch_at",
    "predict_step",
    "snapshot_rows",
    "write_snapshot",
]
