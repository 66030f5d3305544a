"""Patch metrics, evaluated over the grasped face's footprint cells"""

import numpy as np

from patchstack.core.constants import DEFAULT_DELTA
from patchstack.estimation.types import PatchEstimate
from patchstack.geometry import PatchMask, require_same_grid


def mask_iou(pred: np.ndarray, truth: np.ndarray) -> float:
    """IoU of two boolean arrays; 1 when both are empty"""
    union = np.count_nonzero(pred | truth)
    if union == 0:
        return 1.0
    return np.count_nonzero(pred & truth) / union


def iou(est: PatchEstimate, truth: PatchMask, delta: float = DEFAULT_DELTA) -> float:
    require_same_grid(est.grid, truth.grid)
    fp = est.footprint
    return mask_iou(est.thresholded(delta), truth.contact & fp)


def cell_accuracy(est: PatchEstimate, truth: PatchMask, delta: float = DEFAULT_DELTA) -> float:
    require_same_grid(est.grid, truth.grid)
    fp = est.footprint
    if not fp.any():
        return 1.0
    return float(np.mean((est.probs[fp] >= delta) == truth.contact[fp]))
