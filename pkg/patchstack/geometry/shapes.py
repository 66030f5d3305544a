"""
Planar shapes in millimetres: points, discs and strictly convex polygons.

All values are immutable. Containment is vectorized over point arrays and
counts the boundary as inside (tolerance BOUNDARY_TOL).
"""

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

from patchstack.core.constants import BOUNDARY_TOL
from patchstack.core.exceptions import ConfigurationError, InvalidShapeError


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ConfigurationError(f"Point must be finite, got ({self.x}, {self.y})")

    def __add__(self, other: "Point2") -> "Point2":
        return Point2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Point2") -> "Point2":
        return Point2(self.x - other.x, self.y - other.y)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    @classmethod
    def of(cls, xy: Sequence[float]) -> "Point2":
        return cls(float(xy[0]), float(xy[1]))


ORIGIN = Point2(0.0, 0.0)


@dataclass(frozen=True)
class Disc:
    center: Point2
    radius: float

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise InvalidShapeError(f"radius must be > 0, got {self.radius}", shape="disc")

    def contains_xy(self, xy: np.ndarray) -> np.ndarray:
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        d = np.hypot(xy[:, 0] - self.center.x, xy[:, 1] - self.center.y)
        return d <= self.radius + BOUNDARY_TOL

    def bounds(self) -> Tuple[float, float, float, float]:
        c, r = self.center, self.radius
        return (c.x - r, c.y - r, c.x + r, c.y + r)

    def reach(self) -> float:
        """Largest distance from the local origin to the shape"""
        return self.center.norm() + self.radius

    def to_config(self) -> dict:
        return {"kind": "disc", "cx": self.center.x, "cy": self.center.y, "r": self.radius}


@dataclass(frozen=True)
class ConvexPolygon:
    vertices: Tuple[Point2, ...]

    def __post_init__(self):
        n = len(self.vertices)
        if n < 3:
            raise InvalidShapeError(f"polygon needs at least 3 vertices, got {n}", shape="polygon")
        v = self.as_array()
        edges = np.roll(v, -1, axis=0) - v
        nxt = np.roll(edges, -1, axis=0)
        cross = edges[:, 0] * nxt[:, 1] - edges[:, 1] * nxt[:, 0]
        if not np.all(cross > 0):
            raise InvalidShapeError("polygon must be counter-clockwise and strictly convex", shape="polygon")

    @classmethod
    def from_xy(cls, vertices: Iterable[Sequence[float]]) -> "ConvexPolygon":
        return cls(tuple(Point2.of(v) for v in vertices))

    def as_array(self) -> np.ndarray:
        return np.array([[p.x, p.y] for p in self.vertices], dtype=float)

    def contains_xy(self, xy: np.ndarray) -> np.ndarray:
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        v = self.as_array()
        a = v
        b = np.roll(v, -1, axis=0)
        edge = b - a
        length = np.hypot(edge[:, 0], edge[:, 1])
        # signed distance of every point to every edge line, positive on the inner side
        rel_x = xy[:, None, 0] - a[None, :, 0]
        rel_y = xy[:, None, 1] - a[None, :, 1]
        dist = (edge[None, :, 0] * rel_y - edge[None, :, 1] * rel_x) / length[None, :]
        return np.all(dist >= -BOUNDARY_TOL, axis=1)

    def bounds(self) -> Tuple[float, float, float, float]:
        v = self.as_array()
        return (v[:, 0].min(), v[:, 1].min(), v[:, 0].max(), v[:, 1].max())

    def reach(self) -> float:
        v = self.as_array()
        return float(np.max(np.hypot(v[:, 0], v[:, 1])))

    def to_config(self) -> dict:
        return {"kind": "polygon", "vertices": [[p.x, p.y] for p in self.vertices]}


Shape2 = Union[Disc, ConvexPolygon]


def contains(shape: Shape2, p: Point2) -> bool:
    """True iff p is inside shape or on its boundary"""
    return bool(shape.contains_xy(np.array([[p.x, p.y]]))[0])


def shape_from_config(data: dict) -> Shape2:
    kind = data.get("kind")
    if kind == "disc":
        return Disc(Point2(float(data["cx"]), float(data["cy"])), float(data["r"]))
    if kind == "polygon":
        return ConvexPolygon.from_xy(data["vertices"])
    raise InvalidShapeError(f"unknown shape kind {kind!r}")
