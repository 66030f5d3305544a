"""
Batch evaluation: stacking success, stability accuracy against the number
of aggregated probes, belief IoU growth, and per-modality patch metrics.
"""

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from patchstack.core.constants import DEFAULT_DELTA, MAX_REJECTION_ATTEMPTS, PROBE_PATTERN, Outcome
from patchstack.core.exceptions import ConfigurationError, DataError
from patchstack.core.parallel import ordered_map
from patchstack.core.rng import derive_rng
from patchstack.estimation import BayesEstimator, DisplacementHypothesisGrid, cell_accuracy, iou
from patchstack.filtering import GripperPose, belief_iou, init_belief, measurement_update, patch_at
from patchstack.generation.dataset import Dataset
from patchstack.geometry import Point2, footprint_mask, patch_grid, require_same_grid, snap
from patchstack.orchestration.episode import EpisodeConfig, EpisodeLog, build_estimator, run_episode
from patchstack.planning import assess
from patchstack.sensing import simulate_probe

logger = structlog.get_logger(__name__)

# stream tag separating fixed-position trials from episodes
TRIAL_STREAM = 7


@dataclass
class BatchSummary:
    method: str
    top: str
    tower: str
    scenario: str
    episodes: int
    successes: int
    mean_probes: float
    outcomes: Dict[str, int] = field(default_factory=dict)

    @property
    def success_rate(self) -> float:
        return self.successes / self.episodes if self.episodes else 0.0


def _episode_task(task: Tuple[EpisodeConfig, int]) -> EpisodeLog:
    cfg, e = task
    return run_episode(cfg, e)


def run_batch(cfg: EpisodeConfig, n_episodes: int, jobs: int = 1) -> Tuple[BatchSummary, List[EpisodeLog]]:
    logs: List[EpisodeLog] = ordered_map(_episode_task, [(cfg, e) for e in range(n_episodes)], jobs=jobs)
    counts = Counter(log.outcome.value for log in logs)
    summary = BatchSummary(
        method=cfg.method,
        top=cfg.top.name,
        tower=cfg.tower.label,
        scenario=cfg.tower.scenario.value,
        episodes=len(logs),
        successes=counts.get(Outcome.RELEASED_STABLE.value, 0),
        mean_probes=float(np.mean([log.n_probes for log in logs])) if logs else 0.0,
        outcomes={o.value: counts.get(o.value, 0) for o in Outcome},
    )
    logger.info(
        "batch finished",
        method=summary.method,
        top=summary.top,
        tower=summary.tower,
        success_rate=round(summary.success_rate, 4),
    )
    return summary, logs


# Fixed-position trials ----------------------------------------------------------

@dataclass(frozen=True)
class Trial:
    index: int
    pose: Point2
    stable: bool


@dataclass
class TrialResult:
    index: int
    stable: bool
    verdicts: List[bool]
    belief_ious: List[float]
    implicit_p: Optional[float] = None


def make_trials(cfg: EpisodeConfig, n_trials: int) -> List[Trial]:
    """Lattice poses with contact, drawn uniformly from the support's sampling box"""
    grid = patch_grid(cfg.top.shape, cfg.spacing)
    box = cfg.tower.init_range(cfg.top)
    trials = []
    for t in range(n_trials):
        rng = derive_rng(cfg.seed, TRIAL_STREAM, cfg.stream, t)
        for _ in range(MAX_REJECTION_ATTEMPTS):
            pose = cfg.tower.clamp(cfg.top, snap(box.sample(rng), cfg.spacing), cfg.spacing)
            patch = cfg.tower.contact(cfg.top, pose, grid)
            if patch.count > 0:
                trials.append(Trial(t, pose, cfg.tower.release_stable(cfg.top, pose, patch, cfg.spacing)))
                break
        else:
            raise ConfigurationError(f"no contact pose for trial {t}", field="episodes")
    return trials


def run_trial(cfg: EpisodeConfig, trial: Trial, n_max: int, implicit_path: Optional[str] = None) -> TrialResult:
    """
    Probe at trial.pose + PROBE_PATTERN[j] for j < n_max, aggregate, and
    judge the trial pose after every probe.
    """
    if not 1 <= n_max <= len(PROBE_PATTERN):
        raise ConfigurationError(f"n must lie in 1..{len(PROBE_PATTERN)}, got {n_max}", field="n_values")
    estimator = build_estimator(cfg)
    grid = patch_grid(cfg.top.shape, cfg.spacing)
    footprint = footprint_mask(cfg.top.shape, grid)
    belief = init_belief(cfg.tower.belief_grid(cfg.top, cfg.spacing))
    surface = cfg.tower.surface_mask(belief.grid)
    home = GripperPose(trial.pose, 0)

    verdicts: List[bool] = []
    ious: List[float] = []
    implicit_p: Optional[float] = None
    for j in range(n_max):
        dx, dy = PROBE_PATTERN[j]
        pose = cfg.tower.clamp(cfg.top, snap(trial.pose + Point2(dx, dy), cfg.spacing), cfg.spacing)
        patch = cfg.tower.contact(cfg.top, pose, grid)
        obs = simulate_probe(patch, cfg.top.com, cfg.params, derive_rng(cfg.seed, TRIAL_STREAM, cfg.stream, trial.index, j + 1))
        if j == 0 and implicit_path:
            implicit_p = _implicit_probability(implicit_path, obs)
        belief = measurement_update(belief, estimator.estimate(obs, patch), GripperPose(pose, j))
        verdicts.append(assess(patch_at(belief, home, grid, footprint), cfg.delta, cfg.top.com).stable)
        ious.append(belief_iou(belief, surface, cfg.delta))
    return TrialResult(trial.index, trial.stable, verdicts, ious, implicit_p)


_IMPLICIT = {}


def _implicit_probability(path: str, obs) -> float:
    from patchstack.estimation.trainer import predict_stability
    from patchstack.storage.model_store import load_model

    if path not in _IMPLICIT:
        _IMPLICIT[path] = load_model(Path(path))
    return predict_stability(_IMPLICIT[path], obs)


def _trial_task(task) -> TrialResult:
    return run_trial(*task)


def run_trials(
    cfg: EpisodeConfig,
    trials: Sequence[Trial],
    n_max: int,
    implicit_path: Optional[str] = None,
    jobs: int = 1,
) -> List[TrialResult]:
    return ordered_map(_trial_task, [(cfg, t, n_max, implicit_path) for t in trials], jobs=jobs)


@dataclass
class StabilityRow:
    top: str
    tower: str
    trials: int
    accuracy: Dict[int, float]
    implicit: Optional[float] = None


def stability_accuracy_vs_n(results: Sequence[TrialResult], n_values: Sequence[int]) -> Tuple[Dict[int, float], Optional[float]]:
    """Binary accuracy of the aggregated verdict after n probes, and of the implicit classifier"""
    accuracy = {}
    for n in n_values:
        hits = [r.verdicts[n - 1] == r.stable for r in results]
        accuracy[n] = float(np.mean(hits)) if hits else 0.0
    implicit = [(r.implicit_p >= 0.5) == r.stable for r in results if r.implicit_p is not None]
    return accuracy, (float(np.mean(implicit)) if implicit else None)


def belief_iou_vs_n(results: Sequence[TrialResult], n_max: int) -> List[float]:
    """Mean belief IoU after n = 1..n_max probes"""
    if not results:
        return []
    return [float(np.mean([r.belief_ious[n] for r in results])) for n in range(n_max)]


# Patch metrics --------------------------------------------------------------

@dataclass
class ContactRow:
    top: str
    bottom: str
    method: str
    delta: float
    iou: float
    accuracy: float
    samples: int


def evaluate_patch_models(
    models: Sequence,
    dataset: Dataset,
    bayes: bool = True,
    hypothesis_step: float = 0.5,
    deltas: Sequence[float] = (DEFAULT_DELTA,),
) -> List[ContactRow]:
    """
    Mean IoU and cell accuracy per (top, bottom) pair for every model whose
    top matches, plus the grid-Bayes reference row.
    """
    from patchstack.estimation.trainer import LearnedEstimator

    if len(dataset) == 0:
        raise DataError("evaluation set is empty")

    rows: List[ContactRow] = []
    for pair_id, samples in dataset.by_pair().items():
        if not samples:
            continue
        pair = dataset.pair(pair_id)
        estimators = []
        for model in models:
            if model.top.name != pair.top.name:
                continue
            require_same_grid(model.grid, pair.grid)
            estimators.append((model.config.modality.value, LearnedEstimator(model)))
        if bayes:
            hyp = DisplacementHypothesisGrid.over_range(pair.range, hypothesis_step)
            estimators.append(
                ("bayes", BayesEstimator(pair.top.shape, pair.bottom.shape, hyp, dataset.params, pair.top.com, pair.grid))
            )

        truths = [s.truth for s in samples]
        for label, estimator in estimators:
            estimates = estimator.estimate_many([s.obs for s in samples], truths)
            for delta in deltas:
                rows.append(
                    ContactRow(
                        top=pair.top.name,
                        bottom=pair.bottom.name,
                        method=label,
                        delta=delta,
                        iou=float(np.mean([iou(e, t, delta) for e, t in zip(estimates, truths)])),
                        accuracy=float(np.mean([cell_accuracy(e, t, delta) for e, t in zip(estimates, truths)])),
                        samples=len(samples),
                    )
                )
        logger.info("pair evaluated", top=pair.top.name, bottom=pair.bottom.name, samples=len(samples))
    return rows
