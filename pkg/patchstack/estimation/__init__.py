"""Patch estimators and metrics. The torch-backed model lives in `patchstack.estimation.trainer`."""

from .base import BaseEstimator, OracleEstimator
from .bayes import BayesEstimator, estimate_bayes
from .metrics import cell_accuracy, iou, mask_iou
from .types import DisplacementHypothesisGrid, ModelConfig, PatchEstimate

__all__ = [
    "BaseEstimator",
    "BayesEstimator",
    "DisplacementHypothesisGrid",
    "ModelConfig",
    "OracleEstimator",
    "PatchEstimate",
    "cell_accuracy",
    "estimate_bayes",
    "iou",
    "mask_iou",
]
