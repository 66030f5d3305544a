"""
World-frame belief over the bottom object's support surface.

Each cell holds the log-odds that support exists there. The prior is
Bernoulli(0.5) (log-odds 0), the motion model is the identity (the bottom
object never moves), and a patch estimate taken at a gripper pose adds
logit(clip(p)) to every belief cell under the grasped face, clamped to
+/- L_max.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit, logit

from patchstack.core.constants import DEFAULT_DELTA, LOG_ODDS_CLAMP, PROB_CLIP
from patchstack.core.exceptions import ConfigurationError, ExtentError
from patchstack.estimation.metrics import mask_iou
from patchstack.estimation.types import PatchEstimate
from patchstack.geometry import GridSpec, Point2


@dataclass(frozen=True)
class GripperPose:
    """Grasped-object origin in the world frame"""
    position: Point2
    probe_index: int = 0


@dataclass(frozen=True, eq=False)
class BeliefMap:
    grid: GridSpec
    log_odds: np.ndarray
    clamp: float = LOG_ODDS_CLAMP

    def __post_init__(self):
        values = np.asarray(self.log_odds, dtype=float).reshape(-1)
        if values.size != self.grid.size:
            raise ConfigurationError(f"belief has {values.size} cells, grid has {self.grid.size}")
        if not self.clamp > 0:
            raise ConfigurationError("log-odds clamp must be > 0", field="clamp")
        values = np.clip(values, -self.clamp, self.clamp)
        values.setflags(write=False)
        object.__setattr__(self, "log_odds", values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BeliefMap):
            return NotImplemented
        return self.grid == other.grid and self.clamp == other.clamp and np.array_equal(self.log_odds, other.log_odds)

    def probabilities(self) -> np.ndarray:
        return expit(self.log_odds)

    def with_log_odds(self, values: np.ndarray) -> "BeliefMap":
        return BeliefMap(self.grid, values, self.clamp)


def init_belief(grid: GridSpec, clamp: float = LOG_ODDS_CLAMP) -> BeliefMap:
    return BeliefMap(grid, np.zeros(grid.size), clamp)


def predict_step(belief: BeliefMap, action=None) -> BeliefMap:
    """Static world: the belief is unchanged by gripper motion"""
    return belief


def evidence(est: PatchEstimate, eps: float = PROB_CLIP) -> np.ndarray:
    """Per-cell log-odds contribution of an estimate (footprint cells only)"""
    return logit(np.clip(est.probs[est.footprint], eps, 1.0 - eps))


def covered_cells(belief_grid: GridSpec, patch: GridSpec, footprint: np.ndarray, pose: GripperPose) -> np.ndarray:
    """Belief cell index under each footprint cell of the grasped face at `pose`"""
    if not np.isclose(belief_grid.spacing, patch.spacing):
        raise ConfigurationError(
            f"patch spacing {patch.spacing} differs from belief spacing {belief_grid.spacing}", field="spacing"
        )
    world = patch.cell_centers()[footprint] + pose.position.as_array()
    ix, iy = belief_grid.cell_index(world)
    inside = belief_grid.inside(ix, iy)
    if not inside.all():
        x, y = world[~inside][0]
        raise ExtentError("grasped face leaves the belief grid", x=float(x), y=float(y))
    return iy * belief_grid.nx + ix


def measurement_update(belief: BeliefMap, est: PatchEstimate, pose: GripperPose) -> BeliefMap:
    cells = covered_cells(belief.grid, est.grid, est.footprint, pose)
    values = belief.log_odds.copy()
    np.add.at(values, cells, evidence(est))
    return belief.with_log_odds(values)


def batch_update(belief: BeliefMap, updates: Iterable[Tuple[PatchEstimate, GripperPose]]) -> BeliefMap:
    """One update with the per-cell sum of every estimate's log-odds"""
    total = np.zeros(belief.grid.size)
    for est, pose in updates:
        np.add.at(total, covered_cells(belief.grid, est.grid, est.footprint, pose), evidence(est))
    return belief.with_log_odds(belief.log_odds + total)


def belief_to_patch(belief: BeliefMap, delta: float = DEFAULT_DELTA) -> np.ndarray:
    """(K, 2) centres of cells with probability >= delta"""
    return belief.grid.cell_centers()[belief.probabilities() >= delta]


def patch_at(belief: BeliefMap, pose: GripperPose, grid: GridSpec, footprint: np.ndarray) -> PatchEstimate:
    """The belief seen from the grasped face at `pose`: footprint cells get the belief probability"""
    footprint = np.asarray(footprint, dtype=bool)
    probs = np.zeros(grid.size)
    probs[footprint] = belief.probabilities()[covered_cells(belief.grid, grid, footprint, pose)]
    return PatchEstimate(grid, probs, footprint)


def belief_iou(belief: BeliefMap, surface: np.ndarray, delta: float = DEFAULT_DELTA) -> float:
    """IoU between the thresholded belief and the true support-surface mask on the belief grid"""
    surface = np.asarray(surface, dtype=bool).reshape(-1)
    return mask_iou(belief.probabilities() >= delta, surface)


def snapshot_rows(belief: BeliefMap) -> List[str]:
    """Tab-separated probabilities, one line per grid row from the bottom row up"""
    probs = belief.probabilities().reshape(belief.grid.ny, belief.grid.nx)
    return ["\t".join(f"{p:.6f}" for p in row) for row in probs]


def write_snapshot(path: Path, belief: BeliefMap, header: Optional[Sequence[str]] = None) -> Path:
    g = belief.grid
    lines = list(header or [])
    lines.append(f"# grid origin={g.origin.x:g},{g.origin.y:g} spacing={g.spacing:g} nx={g.nx} ny={g.ny}")
    lines.extend(snapshot_rows(belief))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
