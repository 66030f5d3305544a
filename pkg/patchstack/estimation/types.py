from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from patchstack.core.constants import HYPOTHESIS_STEP, INPUT_COMPONENTS, EncoderKind, Modality
from patchstack.core.exceptions import ConfigurationError
from patchstack.geometry import DisplacementRange, GridSpec, PatchMask, Point2


class ModelConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", protected_namespaces=())

    modality: Modality = Modality.FT_TAC
    encoder: EncoderKind = EncoderKind.POOLED
    hidden_layers: int = Field(2, ge=1)
    hidden_units: int = Field(256, ge=1)
    input_components: int = Field(INPUT_COMPONENTS, ge=1)
    learning_rate: float = Field(2.0, gt=0)
    epochs: int = Field(150, ge=0)
    batch_size: int = Field(64, ge=1)
    seed: int = 0


@dataclass(frozen=True, eq=False)
class PatchEstimate:
    """
    Per-cell contact probability on the grasped face's grid.

    `footprint` marks the cells that belong to the face; metrics and belief
    updates ignore the rest.
    """
    grid: GridSpec
    probs: np.ndarray
    footprint: Optional[np.ndarray] = None

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float).reshape(-1)
        if probs.size != self.grid.size:
            raise ConfigurationError(f"estimate has {probs.size} cells, grid has {self.grid.size}")
        if not np.all(np.isfinite(probs)) or probs.min(initial=0.0) < 0.0 or probs.max(initial=0.0) > 1.0:
            raise ConfigurationError("estimate probabilities must lie in [0, 1]")
        footprint = self.footprint
        if footprint is None:
            footprint = np.ones(self.grid.size, dtype=bool)
        footprint = np.asarray(footprint, dtype=bool).reshape(-1)
        if footprint.size != self.grid.size:
            raise ConfigurationError("footprint does not match grid")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "footprint", footprint)

    def thresholded(self, delta: float) -> np.ndarray:
        return (self.probs >= delta) & self.footprint

    @classmethod
    def from_mask(cls, mask: PatchMask, footprint: Optional[np.ndarray] = None) -> "PatchEstimate":
        return cls(mask.grid, mask.contact.astype(float), footprint)


@dataclass(frozen=True, eq=False)
class DisplacementHypothesisGrid:
    """Candidate grasped-origin offsets (H, 2) in the bottom frame"""
    points: np.ndarray
    step: float = HYPOTHESIS_STEP

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if not self.step > 0:
            raise ConfigurationError(f"hypothesis step must be > 0, got {self.step}", field="hypothesis_step")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def over_range(cls, rng: DisplacementRange, step: float = HYPOTHESIS_STEP) -> "DisplacementHypothesisGrid":
        """Lattice points (multiples of step) inside the range"""
        if not step > 0:
            raise ConfigurationError(f"hypothesis step must be > 0, got {step}", field="hypothesis_step")
        xs = np.arange(np.ceil(rng.x_min / step - 1e-9), np.floor(rng.x_max / step + 1e-9) + 1) * step
        ys = np.arange(np.ceil(rng.y_min / step - 1e-9), np.floor(rng.y_max / step + 1e-9) + 1) * step
        gx, gy = np.meshgrid(xs, ys)
        return cls(np.column_stack([gx.ravel(), gy.ravel()]), step)

    @classmethod
    def of_points(cls, points: Iterable[Point2], step: float = HYPOTHESIS_STEP) -> "DisplacementHypothesisGrid":
        return cls(np.array([[p.x, p.y] for p in points], dtype=float).reshape(-1, 2), step)
