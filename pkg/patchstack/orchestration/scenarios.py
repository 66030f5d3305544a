"""
Bottom arrangements for stacking runs.

`one` places a single bottom piece at the world origin. `two` stacks the
upper bottom on the lower one, shifted TOWER_OFFSET along +x. The grasped
piece always lands on the last (uppermost) bottom.
"""

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from patchstack.core.constants import DEFAULT_SPACING, TOWER_OFFSET, Scenario
from patchstack.geometry import (
    DisplacementRange,
    GridSpec,
    PatchMask,
    Piece,
    Point2,
    ground_truth_patch,
    patch_grid,
)
from patchstack.planning.stability import StackLayer, stack_stable, support_verdict


@dataclass(frozen=True)
class Placement:
    piece: Piece
    position: Point2

    def bounds(self) -> Tuple[float, float, float, float]:
        x0, y0, x1, y1 = self.piece.shape.bounds()
        return (x0 + self.position.x, y0 + self.position.y, x1 + self.position.x, y1 + self.position.y)


@dataclass(frozen=True)
class Tower:
    scenario: Scenario
    bottoms: Tuple[Placement, ...]

    @property
    def support(self) -> Placement:
        return self.bottoms[-1]

    @property
    def label(self) -> str:
        return "-on-".join(p.piece.name for p in reversed(self.bottoms))

    def contact(self, top: Piece, position: Point2, grid: GridSpec) -> PatchMask:
        """True patch of the grasped face with its origin at world `position`"""
        return ground_truth_patch(top.shape, self.support.piece.shape, position - self.support.position, grid)

    def surface_mask(self, grid: GridSpec) -> np.ndarray:
        """World cells on the supporting surface"""
        q = grid.cell_centers() - self.support.position.as_array()
        return self.support.piece.shape.contains_xy(q)

    def release_stable(self, top: Piece, position: Point2, patch: PatchMask, spacing: float = DEFAULT_SPACING) -> bool:
        """Quasi-static outcome of releasing `top` at `position`; the lowest bottom rests on the table"""
        offset = position.as_array()
        layers = [StackLayer(patch.points() + offset, top.com + position, top.mass)]
        for upper, lower in zip(reversed(self.bottoms[1:]), reversed(self.bottoms[:-1])):
            grid = patch_grid(upper.piece.shape, spacing)
            contact = ground_truth_patch(upper.piece.shape, lower.piece.shape, upper.position - lower.position, grid)
            layers.append(
                StackLayer(contact.points() + upper.position.as_array(), upper.piece.com + upper.position, upper.piece.mass)
            )
        return stack_stable(layers)

    def top_margin(self, top: Piece, patch: PatchMask) -> float:
        return support_verdict(patch.points(), top.com).margin

    def pose_range(self, top: Piece) -> DisplacementRange:
        """Lattice-free box of grasped origins (world) that can touch the support"""
        x0, y0, x1, y1 = self.support.bounds()
        r = top.reach()
        return DisplacementRange(x0 - r, x1 + r, y0 - r, y1 + r)

    def init_range(self, top: Piece) -> DisplacementRange:
        """Default sampling box, centred on the support"""
        base = DisplacementRange.around(top.shape, self.support.piece.shape)
        p = self.support.position
        return DisplacementRange(base.x_min + p.x, base.x_max + p.x, base.y_min + p.y, base.y_max + p.y)

    def belief_grid(self, top: Piece, spacing: float = DEFAULT_SPACING) -> GridSpec:
        """World grid large enough for the grasped face at any clamped pose"""
        box = self.pose_range(top)
        x0, y0, x1, y1 = top.shape.bounds()
        return GridSpec.covering(
            (box.x_min + x0 - spacing, box.y_min + y0 - spacing, box.x_max + x1 + spacing, box.y_max + y1 + spacing),
            spacing,
        )

    def clamp(self, top: Piece, position: Point2, spacing: float = DEFAULT_SPACING) -> Point2:
        """Keep the pose inside the lattice-aligned workspace"""
        box = self.pose_range(top)
        lo_x, hi_x = math.ceil(box.x_min / spacing) * spacing, math.floor(box.x_max / spacing) * spacing
        lo_y, hi_y = math.ceil(box.y_min / spacing) * spacing, math.floor(box.y_max / spacing) * spacing
        return Point2(min(max(position.x, lo_x), hi_x), min(max(position.y, lo_y), hi_y))


def one_bottom(bottom: Piece) -> Tower:
    return Tower(Scenario.ONE, (Placement(bottom, Point2(0.0, 0.0)),))


def two_bottoms(lower: Piece, upper: Piece, offset: float = TOWER_OFFSET) -> Tower:
    return Tower(Scenario.TWO, (Placement(lower, Point2(0.0, 0.0)), Placement(upper, Point2(offset, 0.0))))


def towers_for(scenarios: Sequence[Scenario], bottoms: Sequence[Piece]) -> List[Tower]:
    """
    `one` yields a tower per bottom piece; `two` stacks the second listed
    bottom on the first (long on short with the default catalog).
    """
    towers: List[Tower] = []
    for scenario in scenarios:
        if scenario == Scenario.ONE:
            towers.extend(one_bottom(b) for b in bottoms)
        elif len(bottoms) >= 2:
            towers.append(two_bottoms(bottoms[0], bottoms[1]))
    return towers
