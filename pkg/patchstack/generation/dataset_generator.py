"""
Seeded dataset generation.

Sample k of pair i draws its displacement and its sensor noise from the
stream derive_rng(seed, i, k), so the output does not depend on the worker
count. Displacements are rejection-sampled until the ground-truth patch is
non-empty.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog

from patchstack.core.constants import DEFAULT_SPACING, MAX_REJECTION_ATTEMPTS
from patchstack.core.exceptions import ConfigurationError
from patchstack.core.parallel import ordered_map
from patchstack.core.rng import derive_rng
from patchstack.generation.dataset import Dataset, PairSpec, Sample
from patchstack.geometry import DisplacementRange, PatchMask, Piece, Point2, ground_truth_patch, patch_grid
from patchstack.planning.stability import ground_truth_stable
from patchstack.sensing import SensorParams, simulate_probe

logger = structlog.get_logger(__name__)


def make_pair(
    top: Piece,
    bottom: Piece,
    spacing: float = DEFAULT_SPACING,
    displacement_range: Optional[DisplacementRange] = None,
) -> PairSpec:
    return PairSpec(
        top=top,
        bottom=bottom,
        grid=patch_grid(top.shape, spacing),
        range=displacement_range or DisplacementRange.around(top.shape, bottom.shape),
    )


def sample_contact(
    pair: PairSpec,
    rng: np.random.Generator,
    max_attempts: int = MAX_REJECTION_ATTEMPTS,
) -> Tuple[Point2, PatchMask]:
    """Draw displacements until the surfaces touch"""
    for _ in range(max_attempts):
        d = pair.range.sample(rng)
        truth = ground_truth_patch(pair.top.shape, pair.bottom.shape, d, pair.grid)
        if truth.count > 0:
            return d, truth
    raise ConfigurationError(
        f"no contact between {pair.top.name} and {pair.bottom.name} after {max_attempts} draws",
        field="range",
        attempts=max_attempts,
    )


def simulate_sample(pair: PairSpec, pair_index: int, k: int, params: SensorParams, seed: int) -> Sample:
    rng = derive_rng(seed, pair_index, k)
    d, truth = sample_contact(pair, rng)
    obs = simulate_probe(truth, pair.top.com, params, rng)
    return Sample(
        index=-1,
        pair_id=pair.pair_id,
        displacement=d,
        obs=obs,
        truth=truth,
        stable=ground_truth_stable(truth, pair.top.com),
    )


def _simulate_task(task) -> Sample:
    return simulate_sample(*task)


def generate(
    pairs: Sequence[PairSpec],
    n_per_pair: int,
    params: SensorParams,
    seed: int,
    jobs: int = 1,
) -> Dataset:
    """n_per_pair contact samples per pair, pair-major order"""
    if n_per_pair < 0:
        raise ConfigurationError("n_per_pair must be >= 0", field="n_per_pair")
    ids = [p.pair_id for p in pairs]
    if len(set(ids)) != len(ids):
        raise ConfigurationError("duplicate pair in dataset request", field="pairs")

    tasks = [(pair, i, k, params, seed) for i, pair in enumerate(pairs) for k in range(n_per_pair)]
    logger.info("generating dataset", pairs=len(pairs), samples=len(tasks), seed=seed, jobs=jobs)
    raw: List[Sample] = ordered_map(_simulate_task, tasks, jobs=jobs)
    samples = [
        Sample(i, s.pair_id, s.displacement, s.obs, s.truth, s.stable)
        for i, s in enumerate(raw)
    ]
    return Dataset(pairs={p.pair_id: p for p in pairs}, samples=samples, params=params, seed=seed)
