"""
Closed-loop stacking episodes.

Each probe runs PROBING -> ESTIMATING -> UPDATING -> ASSESSING. Assessment
thresholds the current probe's estimate (or, with aggregated_verdict, the
belief seen from the grasped face at the current pose); a stable verdict
releases the piece, otherwise the gripper moves toward the believed support
centroid. Outcomes are scored against the
quasi-static ground truth at the release pose.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import structlog

from patchstack.core.constants import (
    D_MOVE,
    DEFAULT_DELTA,
    DEFAULT_SPACING,
    HYPOTHESIS_STEP,
    MAX_PROBES,
    MAX_REJECTION_ATTEMPTS,
    SNAPSHOT_SCHEMA,
    EstimatorKind,
    Outcome,
)
from patchstack.core.exceptions import ConfigurationError, GridMismatchError
from patchstack.core.rng import derive_rng
from patchstack.estimation import (
    BaseEstimator,
    BayesEstimator,
    DisplacementHypothesisGrid,
    OracleEstimator,
    iou,
)
from patchstack.filtering import GripperPose, init_belief, measurement_update, patch_at, predict_step, write_snapshot
from patchstack.geometry import DisplacementRange, PatchMask, Piece, Point2, footprint_mask, patch_grid, snap
from patchstack.orchestration.scenarios import Tower
from patchstack.orchestration.state_machine import EpisodePhase, EpisodeStateMachine
from patchstack.planning import ZERO_ACTION, Action, assess, select_action, snap_action
from patchstack.sensing import SensorParams, simulate_probe

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class EpisodeConfig:
    top: Piece
    tower: Tower
    params: SensorParams = SensorParams()
    estimator: EstimatorKind = EstimatorKind.BAYES
    model_path: Optional[str] = None
    max_probes: int = MAX_PROBES
    delta: float = DEFAULT_DELTA
    d_move: float = D_MOVE
    spacing: float = DEFAULT_SPACING
    hypothesis_step: float = HYPOTHESIS_STEP
    release_immediately: bool = False
    seed: int = 0
    stream: int = 0
    snapshot_dir: Optional[str] = None
    aggregated_verdict: bool = False
    config_hash: str = ""

    def __post_init__(self):
        if self.max_probes < 0:
            raise ConfigurationError("max_probes must be >= 0", field="max_probes")
        if not 0.0 < self.delta < 1.0:
            raise ConfigurationError("delta must be inside (0, 1)", field="delta")
        if not self.d_move > 0:
            raise ConfigurationError("d_move must be > 0", field="d_move")
        if self.estimator == EstimatorKind.LEARNED and not self.model_path and not self.release_immediately:
            raise ConfigurationError(f"no model file for the learned estimator on {self.top.name}", field="models")

    @property
    def method(self) -> str:
        return "pick-and-place" if self.release_immediately else self.estimator.value


@dataclass
class ProbeRecord:
    index: int
    pose: Tuple[float, float]
    fz: float
    tx: float
    ty: float
    contact_cells: int
    estimate_iou: float
    support_cells: int
    stable: bool
    margin: Optional[float]
    action: Optional[Tuple[float, float]] = None
    snapshot: Optional[str] = None

    def to_record(self) -> dict:
        return {
            "index": self.index,
            "pose": list(self.pose),
            "fz": self.fz,
            "tx": self.tx,
            "ty": self.ty,
            "contact_cells": self.contact_cells,
            "estimate_iou": self.estimate_iou,
            "support_cells": self.support_cells,
            "stable": self.stable,
            "margin": self.margin,
            "action": list(self.action) if self.action is not None else None,
            "snapshot": self.snapshot,
        }


@dataclass
class EpisodeLog:
    episode: int
    top: str
    tower: str
    scenario: str
    method: str
    seed: int
    initial_pose: Tuple[float, float]
    outcome: Outcome
    probes: List[ProbeRecord] = field(default_factory=list)
    final_pose: Tuple[float, float] = (0.0, 0.0)
    phases: List[str] = field(default_factory=list)

    @property
    def n_probes(self) -> int:
        return len(self.probes)

    @property
    def success(self) -> bool:
        return self.outcome == Outcome.RELEASED_STABLE

    def to_record(self) -> dict:
        return {
            "episode": self.episode,
            "top": self.top,
            "tower": self.tower,
            "scenario": self.scenario,
            "method": self.method,
            "seed": self.seed,
            "initial_pose": list(self.initial_pose),
            "final_pose": list(self.final_pose),
            "outcome": self.outcome.value,
            "n_probes": self.n_probes,
            "probes": [p.to_record() for p in self.probes],
            "phases": self.phases,
        }


_ESTIMATORS: Dict[tuple, BaseEstimator] = {}


def build_estimator(cfg: EpisodeConfig) -> BaseEstimator:
    """Per-process cache; the Bayes table and model weights are built once per configuration"""
    key = (cfg.estimator, cfg.model_path, cfg.top, cfg.tower.support, cfg.params, cfg.spacing, cfg.hypothesis_step)
    if key in _ESTIMATORS:
        return _ESTIMATORS[key]

    grid = patch_grid(cfg.top.shape, cfg.spacing)
    footprint = footprint_mask(cfg.top.shape, grid)
    if cfg.estimator == EstimatorKind.ORACLE:
        estimator: BaseEstimator = OracleEstimator(grid, footprint)
    elif cfg.estimator == EstimatorKind.BAYES:
        support = cfg.tower.support
        box = cfg.tower.pose_range(cfg.top)
        p = support.position
        local = DisplacementRange(box.x_min - p.x, box.x_max - p.x, box.y_min - p.y, box.y_max - p.y)
        hypotheses = DisplacementHypothesisGrid.over_range(local, cfg.hypothesis_step)
        estimator = BayesEstimator(cfg.top.shape, support.piece.shape, hypotheses, cfg.params, cfg.top.com, grid)
    else:
        # torch is only needed for the learned estimator
        from patchstack.estimation.trainer import LearnedEstimator
        from patchstack.storage.model_store import load_model

        model = load_model(Path(cfg.model_path))
        if model.grid != grid:
            raise GridMismatchError(model.grid, grid)
        estimator = LearnedEstimator(model)

    _ESTIMATORS[key] = estimator
    return estimator


def sample_initial_pose(cfg: EpisodeConfig, episode: int) -> Tuple[Point2, PatchMask]:
    """Lattice pose with contact whose true support margin is <= -1 mm"""
    rng = derive_rng(cfg.seed, cfg.stream, episode)
    grid = patch_grid(cfg.top.shape, cfg.spacing)
    box = cfg.tower.init_range(cfg.top)
    for _ in range(MAX_REJECTION_ATTEMPTS):
        pose = cfg.tower.clamp(cfg.top, snap(box.sample(rng), cfg.spacing), cfg.spacing)
        patch = cfg.tower.contact(cfg.top, pose, grid)
        if patch.count == 0:
            continue
        if cfg.tower.top_margin(cfg.top, patch) <= -1.0 and not cfg.tower.release_stable(cfg.top, pose, patch, cfg.spacing):
            return pose, patch
    raise ConfigurationError(
        f"no unstable contact pose for {cfg.top.name} on {cfg.tower.label} after {MAX_REJECTION_ATTEMPTS} draws",
        field="episodes",
    )


def _margin(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def run_episode(cfg: EpisodeConfig, episode: int = 0) -> EpisodeLog:
    with structlog.contextvars.bound_contextvars(episode=episode, top=cfg.top.name, tower=cfg.tower.label):
        return _run_episode(cfg, episode)


def _run_episode(cfg: EpisodeConfig, episode: int) -> EpisodeLog:
    sm = EpisodeStateMachine()
    grid = patch_grid(cfg.top.shape, cfg.spacing)
    footprint = footprint_mask(cfg.top.shape, grid)
    pose, patch = sample_initial_pose(cfg, episode)

    log = EpisodeLog(
        episode=episode,
        top=cfg.top.name,
        tower=cfg.tower.label,
        scenario=cfg.tower.scenario.value,
        method=cfg.method,
        seed=cfg.seed,
        initial_pose=(pose.x, pose.y),
        outcome=Outcome.MAX_PROBES_EXCEEDED,
    )

    if cfg.release_immediately:
        _release(sm, cfg, pose, patch)
        return _finish(log, sm, pose)
    if cfg.max_probes == 0:
        sm.transition_to(EpisodePhase.MAX_PROBES_EXCEEDED)
        return _finish(log, sm, pose)

    estimator = build_estimator(cfg)
    belief = init_belief(cfg.tower.belief_grid(cfg.top, cfg.spacing))
    action: Action = ZERO_ACTION

    for j in range(cfg.max_probes):
        sm.transition_to(EpisodePhase.PROBING)
        patch = cfg.tower.contact(cfg.top, pose, grid)
        obs = simulate_probe(patch, cfg.top.com, cfg.params, derive_rng(cfg.seed, cfg.stream, episode, j + 1))

        sm.transition_to(EpisodePhase.ESTIMATING)
        est = estimator.estimate(obs, patch)

        sm.transition_to(EpisodePhase.UPDATING)
        gripper = GripperPose(pose, j)
        belief = measurement_update(predict_step(belief, action), est, gripper)

        sm.transition_to(EpisodePhase.ASSESSING)
        judged = patch_at(belief, gripper, grid, footprint) if cfg.aggregated_verdict else est
        verdict = assess(judged, cfg.delta, cfg.top.com)

        fz, tx, ty = obs.final_wrench()
        record = ProbeRecord(
            index=j,
            pose=(pose.x, pose.y),
            fz=fz,
            tx=tx,
            ty=ty,
            contact_cells=patch.count,
            estimate_iou=iou(est, patch, cfg.delta),
            support_cells=verdict.n_support,
            stable=verdict.stable,
            margin=_margin(verdict.margin),
        )
        if cfg.snapshot_dir:
            name = f"belief-{cfg.top.name}-{cfg.tower.label}-{cfg.method}-e{episode:04d}-p{j:02d}.tsv"
            header = [f"# patchstack {SNAPSHOT_SCHEMA} config_hash={cfg.config_hash}", f"# probe {j}"]
            write_snapshot(Path(cfg.snapshot_dir) / name, belief, header)
            record.snapshot = name
        log.probes.append(record)
        logger.debug("probe assessed", probe=j, stable=verdict.stable, support=verdict.n_support)

        if verdict.stable:
            _release(sm, cfg, pose, patch)
            break
        if j == cfg.max_probes - 1:
            sm.transition_to(EpisodePhase.MAX_PROBES_EXCEEDED)
            break

        action = snap_action(select_action(belief, gripper, cfg.delta, cfg.d_move), cfg.spacing, cfg.d_move)
        sm.transition_to(EpisodePhase.MOVING)
        new_pose = cfg.tower.clamp(cfg.top, pose + action.as_point(), cfg.spacing)
        record.action = (new_pose.x - pose.x, new_pose.y - pose.y)
        pose = new_pose

    return _finish(log, sm, pose)


def _release(sm: EpisodeStateMachine, cfg: EpisodeConfig, pose: Point2, patch: PatchMask) -> None:
    sm.transition_to(EpisodePhase.RELEASED)
    if patch.count > 0 and cfg.tower.release_stable(cfg.top, pose, patch, cfg.spacing):
        sm.transition_to(EpisodePhase.RELEASED_STABLE)
    else:
        sm.transition_to(EpisodePhase.RELEASED_UNSTABLE)


def _finish(log: EpisodeLog, sm: EpisodeStateMachine, pose: Point2) -> EpisodeLog:
    log.outcome = sm.outcome()
    log.final_pose = (pose.x, pose.y)
    log.phases = [s.value for s in sm.get_state_history()]
    logger.info("episode finished", outcome=log.outcome.value, probes=log.n_probes)
    return log
