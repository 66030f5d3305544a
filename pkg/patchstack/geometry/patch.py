import numpy as np

from patchstack.geometry.grid import GridSpec, PatchMask
from patchstack.geometry.shapes import Point2, Shape2


def patch_grid(top: Shape2, spacing: float) -> GridSpec:
    """Lattice-aligned grid over the grasped face's bounding box"""
    return GridSpec.covering(top.bounds(), spacing)


def footprint_mask(top: Shape2, grid: GridSpec) -> np.ndarray:
    """Cells whose centre lies on the grasped face"""
    return top.contains_xy(grid.cell_centers())


def ground_truth_patch(top: Shape2, bottom: Shape2, offset: Point2, grid: GridSpec) -> PatchMask:
    """
    Contact cells for the grasped face `top` resting on `bottom`.

    `grid` is in the grasped-object frame; `offset` is the grasped-object
    origin expressed in the bottom-object frame.
    """
    q = grid.cell_centers()
    on_top = top.contains_xy(q)
    on_bottom = bottom.contains_xy(q + np.array([offset.x, offset.y]))
    return PatchMask(grid, on_top & on_bottom)
