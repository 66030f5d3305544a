from .episode import EpisodeConfig, EpisodeLog, ProbeRecord, build_estimator, run_episode, sample_initial_pose
from .evaluation import (
    BatchSummary,
    ContactRow,
    StabilityRow,
    Trial,
    TrialResult,
    belief_iou_vs_n,
    evaluate_patch_models,
    make_trials,
    run_batch,
    run_trial,
    run_trials,
    stability_accuracy_vs_n,
)
from .scenarios import Placement, Tower, one_bottom, towers_for, two_bottoms
from .state_machine import EpisodePhase, EpisodeStateMachine, InvalidTransition

__all__ = [
    "BatchSummary",
    "ContactRow",
    "EpisodeConfig",
    "EpisodeLog",
    "EpisodePhase",
    "EpisodeStateMachine",
    "InvalidTransition",
    "Placement",
    "ProbeRecord",
    "StabilityRow",
    "Tower",
    "Trial",
    "TrialResult",
    "belief_iou_vs_n",
    "build_estimator",
    "evaluate_patch_models",
    "make_trials",
    "one_bottom",
    "run_batch",
    "run_episode",
    "run_trial",
    "run_trials",
    "sample_initial_pose",
    "stability_accuracy_vs_n",
    "towers_for",
    "two_bottoms",
]
