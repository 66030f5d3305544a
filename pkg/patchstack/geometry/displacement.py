import math
from dataclasses import dataclass

import numpy as np

from patchstack.core.exceptions import ConfigurationError
from patchstack.geometry.shapes import Point2, Shape2


def quantize(value: float) -> float:
    """Round to the 9 significant digits used in every persisted file"""
    return float(f"{value:.9g}")


@dataclass(frozen=True)
class DisplacementRange:
    """Axis-aligned box of grasped-origin offsets in the bottom frame (mm)"""
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        values = (self.x_min, self.x_max, self.y_min, self.y_max)
        if not all(math.isfinite(v) for v in values):
            raise ConfigurationError("displacement range must be finite", field="range")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ConfigurationError(f"displacement range needs min < max on both axes, got {values}", field="range")

    @classmethod
    def around(cls, top: Shape2, bottom: Shape2, scale: float = 0.6) -> "DisplacementRange":
        """Default range: +/- scale * (reach_top + reach_bottom) on each axis"""
        half = scale * (top.reach() + bottom.reach())
        return cls(-half, half, -half, half)

    def sample(self, rng: np.random.Generator) -> Point2:
        return Point2(quantize(rng.uniform(self.x_min, self.x_max)), quantize(rng.uniform(self.y_min, self.y_max)))

    def contains(self, p: Point2) -> bool:
        return self.x_min <= p.x <= self.x_max and self.y_min <= p.y <= self.y_max

    def as_list(self) -> list:
        return [self.x_min, self.x_max, self.y_min, self.y_max]

    @classmethod
    def of(cls, values) -> "DisplacementRange":
        return cls(*(float(v) for v in values))


def snap(p: Point2, spacing: float) -> Point2:
    """Nearest lattice point (multiples of spacing)"""
    return Point2(round(p.x / spacing) * spacing, round(p.y / spacing) * spacing)
