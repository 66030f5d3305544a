"""Convex hulls, area centroids and signed distances, backed by shapely"""

from dataclasses import dataclass
from typing import Union

import numpy as np
import shapely
from shapely.geometry import MultiPoint, Point, Polygon
from shapely.geometry.polygon import orient

from patchstack.geometry.shapes import ConvexPolygon, Point2, contains


@dataclass(frozen=True)
class DegenerateHull:
    """No support polygon: fewer than 3 distinct points, or all collinear"""
    n_distinct: int


Hull = Union[ConvexPolygon, DegenerateHull]


def _strip_collinear(v: np.ndarray) -> np.ndarray:
    keep = []
    n = len(v)
    for i in range(n):
        a, b, c = v[i - 1], v[i], v[(i + 1) % n]
        cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        if cross > 1e-12:
            keep.append(b)
    return np.array(keep)


def convex_hull(points) -> Hull:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n_distinct = len(np.unique(pts, axis=0)) if len(pts) else 0
    if n_distinct < 3:
        return DegenerateHull(n_distinct)

    hull = MultiPoint(pts).convex_hull
    if not isinstance(hull, Polygon) or hull.area <= 0:
        return DegenerateHull(n_distinct)

    ring = np.asarray(orient(hull, sign=1.0).exterior.coords)[:-1]
    ring = _strip_collinear(ring)
    if len(ring) < 3:
        return DegenerateHull(n_distinct)
    return ConvexPolygon.from_xy(ring)


def to_shapely(poly: ConvexPolygon) -> Polygon:
    return Polygon(poly.as_array())


def centroid(poly: ConvexPolygon) -> Point2:
    """Area centroid"""
    c = to_shapely(poly).centroid
    return Point2(c.x, c.y)


def signed_distance(hull: Hull, p: Point2, points=None) -> float:
    """
    Distance from p to the hull boundary, positive inside.

    For degenerate hulls the value is minus the distance to the supplied
    points (or -inf when there are none).
    """
    if isinstance(hull, DegenerateHull):
        pts = np.asarray(points if points is not None else [], dtype=float).reshape(-1, 2)
        if len(pts) == 0:
            return float("-inf")
        return -float(np.min(np.hypot(pts[:, 0] - p.x, pts[:, 1] - p.y)))

    d = to_shapely(hull).exterior.distance(Point(p.x, p.y))
    return d if contains(hull, p) else -d


def hull_area(hull: Hull) -> float:
    return 0.0 if isinstance(hull, DegenerateHull) else float(shapely.area(to_shapely(hull)))
