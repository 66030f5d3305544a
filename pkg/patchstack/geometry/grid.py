import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from patchstack.core.exceptions import ConfigurationError, GridMismatchError
from patchstack.geometry.shapes import Point2


@dataclass(frozen=True)
class GridSpec:
    """Regular grid; origin is the lower-left corner, cells are row-major (iy * nx + ix)"""
    origin: Point2
    spacing: float
    nx: int
    ny: int

    def __post_init__(self):
        if not self.spacing > 0:
            raise ConfigurationError(f"grid spacing must be > 0, got {self.spacing}", field="spacing")
        if self.nx < 1 or self.ny < 1:
            raise ConfigurationError(f"grid needs nx, ny >= 1, got {self.nx}x{self.ny}")

    @classmethod
    def covering(cls, bounds: Tuple[float, float, float, float], spacing: float) -> "GridSpec":
        """Smallest lattice-aligned grid (corners on multiples of spacing) covering bounds"""
        xmin, ymin, xmax, ymax = bounds
        ix0 = math.floor(xmin / spacing + 1e-9)
        iy0 = math.floor(ymin / spacing + 1e-9)
        ix1 = math.ceil(xmax / spacing - 1e-9)
        iy1 = math.ceil(ymax / spacing - 1e-9)
        return cls(
            origin=Point2(ix0 * spacing, iy0 * spacing),
            spacing=spacing,
            nx=max(1, ix1 - ix0),
            ny=max(1, iy1 - iy0),
        )

    @property
    def size(self) -> int:
        return self.nx * self.ny

    def cell_centers(self) -> np.ndarray:
        """(size, 2) array of cell centres in row-major order"""
        xs = self.origin.x + (np.arange(self.nx) + 0.5) * self.spacing
        ys = self.origin.y + (np.arange(self.ny) + 0.5) * self.spacing
        gx, gy = np.meshgrid(xs, ys)
        return np.column_stack([gx.ravel(), gy.ravel()])

    def cell_index(self, xy: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Integer (ix, iy) of the cells containing each point; may fall outside the grid"""
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        ix = np.floor((xy[:, 0] - self.origin.x) / self.spacing + 1e-9).astype(int)
        iy = np.floor((xy[:, 1] - self.origin.y) / self.spacing + 1e-9).astype(int)
        return ix, iy

    def inside(self, ix: np.ndarray, iy: np.ndarray) -> np.ndarray:
        return (ix >= 0) & (ix < self.nx) & (iy >= 0) & (iy < self.ny)

    def to_config(self) -> dict:
        return {"origin": [self.origin.x, self.origin.y], "spacing": self.spacing, "nx": self.nx, "ny": self.ny}

    @classmethod
    def from_config(cls, data: dict) -> "GridSpec":
        return cls(Point2.of(data["origin"]), float(data["spacing"]), int(data["nx"]), int(data["ny"]))


def require_same_grid(left: GridSpec, right: GridSpec) -> None:
    if left != right:
        raise GridMismatchError(left, right)


@dataclass(frozen=True, eq=False)
class PatchMask:
    """Boolean contact value per grid cell (row-major)"""
    grid: GridSpec
    contact: np.ndarray

    def __post_init__(self):
        contact = np.asarray(self.contact, dtype=bool).reshape(-1)
        if contact.size != self.grid.size:
            raise ConfigurationError(
                f"mask has {contact.size} cells, grid has {self.grid.size}"
            )
        object.__setattr__(self, "contact", contact)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PatchMask):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.contact, other.contact)

    @property
    def count(self) -> int:
        return int(self.contact.sum())

    def area(self) -> float:
        return self.count * self.grid.spacing ** 2

    def points(self) -> np.ndarray:
        """Centres of contact cells"""
        return self.grid.cell_centers()[self.contact]

    def to_bits(self) -> str:
        return "".join("1" if c else "0" for c in self.contact)

    @classmethod
    def from_bits(cls, grid: GridSpec, bits: str) -> "PatchMask":
        if len(bits) != grid.size or set(bits) - {"0", "1"}:
            raise ConfigurationError("contact bit string does not match grid")
        return cls(grid, np.frombuffer(bits.encode("ascii"), dtype=np.uint8) == ord("1"))
