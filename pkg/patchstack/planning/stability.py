"""
Release decisions from a support patch.

A placement is quasi-statically stable when the CoM projection lies inside
(or on) the convex hull of the supporting contact points. Degenerate hulls
never support.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from patchstack.core.exceptions import ConfigurationError
from patchstack.estimation.types import PatchEstimate
from patchstack.geometry import DegenerateHull, Hull, PatchMask, Point2, contains, convex_hull, signed_distance


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    hull: Hull
    margin: float  # mm, positive inside
    n_support: int


def support_verdict(points: np.ndarray, com: Point2) -> StabilityVerdict:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    hull = convex_hull(pts)
    margin = signed_distance(hull, com, pts)
    stable = not isinstance(hull, DegenerateHull) and contains(hull, com)
    return StabilityVerdict(stable, hull, margin, len(pts))


def support_stable(points: np.ndarray, com: Point2) -> bool:
    return support_verdict(points, com).stable


def assess(est: PatchEstimate, delta: float, com_projection: Point2) -> StabilityVerdict:
    if not 0.0 < delta < 1.0:
        raise ConfigurationError(f"delta must be inside (0, 1), got {delta}", field="delta")
    points = est.grid.cell_centers()[est.thresholded(delta)]
    return support_verdict(points, com_projection)


def ground_truth_stable(truth: PatchMask, com_projection: Point2) -> bool:
    return support_stable(truth.points(), com_projection)


@dataclass(frozen=True)
class StackLayer:
    """Contact points under one piece and that piece's CoM/mass, all in world coordinates"""
    contact: np.ndarray
    com: Point2
    mass: float


def stack_stable(layers: Sequence[StackLayer]) -> bool:
    """
    Layers ordered top-down. Every contact must support the combined CoM of
    all pieces resting on it.
    """
    total_mass = 0.0
    moment = np.zeros(2)
    for layer in layers:
        total_mass += layer.mass
        moment += layer.mass * layer.com.as_array()
        combined = Point2(*(moment / total_mass))
        if not support_stable(layer.contact, combined):
            return False
    return True
