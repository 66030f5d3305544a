from pathlib import Path

import numpy as np
import pytest

from patchstack.core.config import default_pieces
from patchstack.geometry import ORIGIN, ConvexPolygon, Disc, GridSpec, PatchMask, Piece, Point2
from patchstack.sensing import SensorParams

REPO_ROOT = Path(__file__).resolve().parents[1]
CONFIG_DIR = REPO_ROOT / "configs"


def disc(r: float, cx: float = 0.0, cy: float = 0.0) -> Disc:
    return Disc(Point2(cx, cy), r)


def square(half: float) -> ConvexPolygon:
    return ConvexPolygon.from_xy([(-half, -half), (half, -half), (half, half), (-half, half)])


def strip_grid(n: int) -> GridSpec:
    """n unit cells along +x starting at the origin"""
    return GridSpec(ORIGIN, 1.0, n, 1)


def mask(grid: GridSpec, cells) -> PatchMask:
    contact = np.zeros(grid.size, dtype=bool)
    contact[list(cells)] = True
    return PatchMask(grid, contact)


@pytest.fixture
def params() -> SensorParams:
    return SensorParams()


@pytest.fixture
def quiet() -> SensorParams:
    return SensorParams().noiseless()


@pytest.fixture(scope="session")
def pieces():
    return {name: cfg.to_piece(name) for name, cfg in default_pieces().items()}


@pytest.fixture
def block_piece() -> Piece:
    """4x4 mm square face: a 16-cell patch grid at 1 mm spacing"""
    return Piece("block", square(2.0), ORIGIN, 5.0)
