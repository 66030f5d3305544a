import math
from dataclasses import dataclass

import numpy as np

from patchstack.core.constants import D_MOVE, DEFAULT_DELTA
from patchstack.core.exceptions import ConfigurationError
from patchstack.filtering.belief import BeliefMap, GripperPose, belief_to_patch
from patchstack.geometry import DegenerateHull, Point2, centroid, convex_hull


@dataclass(frozen=True)
class Action:
    dx: float
    dy: float

    def norm(self) -> float:
        return math.hypot(self.dx, self.dy)

    def as_point(self) -> Point2:
        return Point2(self.dx, self.dy)


ZERO_ACTION = Action(0.0, 0.0)


def clip_action(vx: float, vy: float, d_move: float) -> Action:
    n = math.hypot(vx, vy)
    if n <= d_move:
        return Action(vx, vy)
    scale = d_move / n
    return Action(vx * scale, vy * scale)


def _most_probable_cell(belief: BeliefMap) -> Point2:
    best = int(np.argmax(belief.log_odds))
    return Point2.of(belief.grid.cell_centers()[best])


def select_target(belief: BeliefMap, delta: float = DEFAULT_DELTA) -> Point2:
    """
    Area centroid of the hull of confident support cells; without a hull,
    the centre of the most probable cell (lowest row-major index on ties).
    """
    hull = convex_hull(belief_to_patch(belief, delta))
    if not isinstance(hull, DegenerateHull):
        return centroid(hull)
    return _most_probable_cell(belief)


def select_action(
    belief: BeliefMap,
    pose: GripperPose,
    delta: float = DEFAULT_DELTA,
    d_move: float = D_MOVE,
) -> Action:
    """
    Move toward the support centroid, clipped to d_move. Without a support
    hull the move is a full d_move step toward the most probable cell.
    """
    if not d_move > 0:
        raise ConfigurationError(f"d_move must be > 0, got {d_move}", field="d_move")
    hull = convex_hull(belief_to_patch(belief, delta))
    if not isinstance(hull, DegenerateHull):
        target = centroid(hull)
        return clip_action(target.x - pose.position.x, target.y - pose.position.y, d_move)

    target = _most_probable_cell(belief)
    vx, vy = target.x - pose.position.x, target.y - pose.position.y
    n = math.hypot(vx, vy)
    if n == 0.0:
        return ZERO_ACTION
    return Action(vx * d_move / n, vy * d_move / n)


def snap_action(action: Action, spacing: float, d_move: float = D_MOVE) -> Action:
    """
    Round to the belief lattice, then shrink the larger component one cell
    at a time until the move fits inside d_move.
    """
    kx = round(action.dx / spacing)
    ky = round(action.dy / spacing)
    while math.hypot(kx, ky) * spacing > d_move + 1e-9:
        if abs(kx) >= abs(ky):
            kx -= int(math.copysign(1, kx))
        else:
            ky -= int(math.copysign(1, ky))
    return Action(kx * spacing, ky * spacing)
