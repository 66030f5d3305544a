import itertools

import numpy as np
import pytest
from scipy.special import expit, logit

from conftest import strip_grid
from patchstack.core.exceptions import ConfigurationError, ExtentError
from patchstack.estimation import PatchEstimate
from patchstack.filtering import (
    BeliefMap,
    GripperPose,
    batch_update,
    belief_iou,
    belief_to_patch,
    init_belief,
    measurement_update,
    patch_at,
    predict_step,
    write_snapshot,
)
from patchstack.geometry import ORIGIN, GridSpec, Point2
from patchstack.planning import Action

WORLD = GridSpec(Point2(-2.0, -2.0), 1.0, 4, 4)
CELL = GridSpec(ORIGIN, 1.0, 1, 1)


def single_cell(p: float) -> PatchEstimate:
    return PatchEstimate(CELL, np.array([p]))


def test_fresh_belief_is_one_half():
    belief = init_belief(WORLD)
    assert np.all(belief.probabilities() == 0.5)
    assert init_belief(WORLD) == belief


def test_predict_step_is_identity():
    belief = measurement_update(init_belief(WORLD), single_cell(0.8), GripperPose(ORIGIN))
    assert predict_step(belief, Action(3.0, 0.0)) == belief
    assert predict_step(predict_step(belief, Action(1.0, 1.0)), Action(-1.0, 0.0)) == belief


def test_uninformative_estimate_leaves_belief_unchanged():
    est = PatchEstimate(strip_grid(3), np.full(3, 0.5))
    belief = measurement_update(init_belief(WORLD), est, GripperPose(Point2(-2.0, 0.0)))
    assert belief == init_belief(WORLD)


def test_two_updates_accumulate_log_odds():
    belief = init_belief(WORLD)
    for j in range(2):
        belief = measurement_update(belief, single_cell(0.9), GripperPose(ORIGIN, j))
    probs = belief.probabilities()
    # the cell at world (0.5, 0.5)
    assert probs[2 * 4 + 2] == pytest.approx(0.98780487804878, rel=1e-9)
    assert np.count_nonzero(probs != 0.5) == 1


def test_log_odds_stay_clamped():
    belief = init_belief(WORLD, clamp=12.0)
    for _ in range(10):
        belief = measurement_update(belief, single_cell(0.9999), GripperPose(ORIGIN))
    assert belief.log_odds.max() == 12.0


def test_pose_leaving_grid_is_an_extent_error():
    with pytest.raises(ExtentError):
        measurement_update(init_belief(WORLD), single_cell(0.9), GripperPose(Point2(10.0, 0.0)))


def test_spacing_mismatch_is_rejected():
    est = PatchEstimate(GridSpec(ORIGIN, 0.5, 1, 1), np.array([0.9]))
    with pytest.raises(ConfigurationError):
        measurement_update(init_belief(WORLD), est, GripperPose(ORIGIN))


def test_sequential_updates_equal_one_batch_update():
    rng = np.random.default_rng(5)
    face = GridSpec(ORIGIN, 1.0, 2, 2)
    world = GridSpec(Point2(-3.0, -3.0), 1.0, 8, 8)
    for _ in range(1000):
        updates = []
        for _ in range(rng.integers(1, 6)):
            est = PatchEstimate(face, rng.uniform(0.2, 0.8, face.size))
            pose = GripperPose(Point2(float(rng.integers(-3, 4)), float(rng.integers(-3, 4))))
            updates.append((est, pose))
        sequential = init_belief(world)
        for est, pose in updates:
            sequential = measurement_update(sequential, est, pose)
        batch = batch_update(init_belief(world), updates)
        assert np.max(np.abs(sequential.log_odds - batch.log_odds)) <= 1e-12


def test_update_order_does_not_matter():
    rng = np.random.default_rng(12)
    face = GridSpec(ORIGIN, 1.0, 3, 2)
    world = GridSpec(Point2(-4.0, -4.0), 1.0, 10, 10)
    updates = [
        (PatchEstimate(face, rng.uniform(0.2, 0.8, face.size)), GripperPose(Point2(float(x), float(y)), j))
        for j, (x, y) in enumerate(rng.integers(-4, 4, size=(6, 2)))
    ]
    reference = batch_update(init_belief(world), updates)
    for _ in range(20):
        belief = init_belief(world)
        for k in rng.permutation(len(updates)):
            belief = measurement_update(belief, *updates[k])
        assert np.max(np.abs(belief.log_odds - reference.log_odds)) <= 1e-12


def test_evidence_moves_belief_in_its_own_direction():
    rng = np.random.default_rng(13)
    face = GridSpec(ORIGIN, 1.0, 2, 2)
    belief = init_belief(WORLD)
    for j in range(30):
        probs = rng.uniform(0.01, 0.99, face.size)
        pose = GripperPose(Point2(float(rng.integers(-2, 1)), float(rng.integers(-2, 1))), j)
        updated = measurement_update(belief, PatchEstimate(face, probs), pose)
        delta = updated.log_odds - belief.log_odds
        touched = delta != 0
        assert np.count_nonzero(touched) <= face.size
        before = patch_at(belief, pose, face, np.ones(face.size, dtype=bool)).probs
        after = patch_at(updated, pose, face, np.ones(face.size, dtype=bool)).probs
        assert np.all(after[probs > 0.5] >= before[probs > 0.5])
        assert np.all(after[probs < 0.5] <= before[probs < 0.5])
        belief = updated


def test_filter_matches_brute_force_posterior():
    rng = np.random.default_rng(9)
    grid = strip_grid(3)
    estimates = [rng.uniform(0.1, 0.9, 3) for _ in range(4)]

    belief = init_belief(grid)
    for probs in estimates:
        belief = measurement_update(belief, PatchEstimate(grid, probs), GripperPose(ORIGIN))

    # enumerate joint support states under a uniform prior; each estimate is an
    # inverse sensor model with per-cell likelihood ratio p / (1 - p)
    weights = {}
    for state in itertools.product((0, 1), repeat=3):
        w = 1.0
        for probs in estimates:
            for cell, s in enumerate(state):
                w *= probs[cell] if s else 1.0 - probs[cell]
        weights[state] = w
    total = sum(weights.values())
    marginal = [sum(w for s, w in weights.items() if s[c]) / total for c in range(3)]

    assert belief.probabilities() == pytest.approx(marginal, abs=1e-9)
    assert belief.probabilities() == pytest.approx(expit(np.sum([logit(p) for p in estimates], axis=0)), abs=1e-12)


def test_belief_to_patch_thresholds():
    assert belief_to_patch(init_belief(WORLD), 0.9).shape == (0, 2)
    high = BeliefMap(WORLD, np.full(WORLD.size, 50.0))
    assert len(belief_to_patch(high, 0.9)) == WORLD.size

    values = np.linspace(-4, 4, WORLD.size)
    mixed = BeliefMap(WORLD, values)
    expected = WORLD.cell_centers()[expit(values) >= 0.7]
    assert np.array_equal(belief_to_patch(mixed, 0.7), expected)


def test_patch_at_reads_belief_under_the_face():
    values = np.arange(WORLD.size, dtype=float) - 8.0
    belief = BeliefMap(WORLD, values)
    face = GridSpec(ORIGIN, 1.0, 2, 1)
    est = patch_at(belief, GripperPose(Point2(-1.0, 0.0)), face, np.array([True, False]))
    # face cell (0.5, 0.5) lands on world (-0.5, 0.5): ix=1, iy=2
    assert est.probs[0] == pytest.approx(expit(values[2 * 4 + 1]))
    assert est.probs[1] == 0.0


def test_belief_iou_against_surface():
    surface = np.zeros(WORLD.size, dtype=bool)
    surface[:8] = True
    values = np.where(surface, 5.0, -5.0)
    assert belief_iou(BeliefMap(WORLD, values), surface) == 1.0
    assert belief_iou(init_belief(WORLD), surface) == 0.0


def test_snapshot_file(tmp_path):
    belief = measurement_update(init_belief(WORLD), single_cell(0.9), GripperPose(ORIGIN))
    path = write_snapshot(tmp_path / "belief.tsv", belief, ["# probe 0"])
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# probe 0"
    assert lines[1].startswith("# grid origin=-2,-2")
    assert len(lines) == 2 + WORLD.ny
    assert lines[2 + 2].split("\t")[2] == "0.900000"
