from .displacement import DisplacementRange, quantize, snap
from .grid import GridSpec, PatchMask, require_same_grid
from .hull import DegenerateHull, Hull, centroid, convex_hull, hull_area, signed_distance
from .patch import footprint_mask, ground_truth_patch, patch_grid
from .piece import Piece
from .shapes import ORIGIN, ConvexPolygon, Disc, Point2, Shape2, contains, shape_from_config

__all__ = [
    "ORIGIN",
    "ConvexPolygon",
    "DegenerateHull",
    "Disc",
    "DisplacementRange",
    "GridSpec",
    "Hull",
    "PatchMask",
    "Piece",
    "Point2",
    "Shape2",
    "centroid",
    "contains",
    "convex_hull",
    "footprint_mask",
    "ground_truth_patch",
    "hull_area",
    "patch_grid",
    "quantize",
    "require_same_grid",
    "shape_from_config",
    "signed_distance",
    "snap",
]
