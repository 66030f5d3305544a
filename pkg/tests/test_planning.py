import math

import numpy as np
import pytest

from conftest import disc
from patchstack.core.exceptions import ConfigurationError
from patchstack.estimation import PatchEstimate
from patchstack.filtering import BeliefMap, GripperPose, init_belief
from patchstack.geometry import (
    ORIGIN,
    ConvexPolygon,
    DegenerateHull,
    GridSpec,
    PatchMask,
    Point2,
    footprint_mask,
    ground_truth_patch,
    patch_grid,
)
from patchstack.planning import (
    Action,
    StackLayer,
    assess,
    clip_action,
    ground_truth_stable,
    select_action,
    select_target,
    snap_action,
    stack_stable,
)

SQUARE_GRID = GridSpec(Point2(-5.0, -5.0), 1.0, 10, 10)


# Stability -------------------------------------------------------------------

def test_full_disc_support_is_stable_with_radius_margin():
    top = disc(7.5)
    grid = patch_grid(top, 1.0)
    est = PatchEstimate(grid, footprint_mask(top, grid).astype(float))
    verdict = assess(est, 0.9, ORIGIN)
    assert verdict.stable
    assert 6.4 <= verdict.margin <= 7.5


def test_fewer_than_three_cells_never_support():
    probs = np.zeros(SQUARE_GRID.size)
    probs[[44, 45]] = 1.0
    verdict = assess(PatchEstimate(SQUARE_GRID, probs), 0.9, ORIGIN)
    assert not verdict.stable
    assert isinstance(verdict.hull, DegenerateHull)
    assert verdict.n_support == 2


def test_crescent_support_with_com_outside():
    centers = SQUARE_GRID.cell_centers()
    probs = (centers[:, 0] >= 3.0).astype(float)
    verdict = assess(PatchEstimate(SQUARE_GRID, probs), 0.9, ORIGIN)
    assert not verdict.stable
    assert -4.0 <= verdict.margin <= -2.0


def test_delta_must_be_inside_unit_interval():
    est = PatchEstimate(SQUARE_GRID, np.ones(SQUARE_GRID.size))
    for delta in (0.0, 1.0, 1.5):
        with pytest.raises(ConfigurationError):
            assess(est, delta, ORIGIN)


def test_lowering_delta_never_destabilizes():
    rng = np.random.default_rng(2)
    for _ in range(200):
        est = PatchEstimate(SQUARE_GRID, rng.uniform(0, 1, SQUARE_GRID.size) ** 3)
        com = Point2(*rng.uniform(-3, 3, 2))
        if assess(est, 0.9, com).stable:
            assert assess(est, 0.5, com).stable


def test_ground_truth_concentric_and_empty():
    top = disc(10.0)
    grid = patch_grid(top, 1.0)
    assert ground_truth_stable(ground_truth_patch(top, disc(7.5), ORIGIN, grid), ORIGIN)
    assert not ground_truth_stable(PatchMask(grid, np.zeros(grid.size, dtype=bool)), ORIGIN)


def test_lens_stability_flips_at_the_geometric_crossover():
    top, bottom = disc(10.0), disc(7.5)
    grid = patch_grid(top, 1.0)

    def stable(offset: float) -> bool:
        return ground_truth_stable(ground_truth_patch(top, bottom, Point2(offset, 0.0), grid), ORIGIN)

    lo, hi = 5.0, 9.0
    assert stable(lo) and not stable(hi)
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if stable(mid) else (lo, mid)
    # the last column of cells right of the CoM leaves the lens at sqrt(7.5^2 - 0.5^2) - 0.5
    assert lo == pytest.approx(math.sqrt(7.5 ** 2 - 0.25) - 0.5, abs=1e-6)


def test_margin_changes_sign_on_the_hull_boundary():
    top = disc(7.5)
    grid = patch_grid(top, 1.0)
    est = PatchEstimate(grid, footprint_mask(top, grid).astype(float))
    rng = np.random.default_rng(3)
    for angle in rng.uniform(0, 2 * np.pi, 10):
        ray = np.array([math.cos(angle), math.sin(angle)])

        def margin(t: float) -> float:
            return assess(est, 0.9, Point2(*(t * ray))).margin

        lo, hi = 0.0, 12.0
        assert margin(lo) > 0 > margin(hi)
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if margin(mid) > 0 else (lo, mid)
        assert abs(margin(lo)) < 1e-9
        assert 6.0 <= lo <= 7.5
        assert assess(est, 0.9, Point2(*((lo - 1e-3) * ray))).stable
        assert not assess(est, 0.9, Point2(*((lo + 1e-3) * ray))).stable


def test_assessing_the_true_patch_matches_the_dataset_labels(pieces, params):
    from patchstack.generation import generate, make_pair

    pairs = [make_pair(pieces["mushroom"], pieces[b]) for b in ("circle_s", "circle_l", "square")]
    dataset = generate(pairs, 30, params, seed=4)
    labels = set()
    for sample in dataset.samples:
        pair = dataset.pair(sample.pair_id)
        est = PatchEstimate.from_mask(sample.truth, footprint_mask(pair.top.shape, pair.grid))
        assert assess(est, 0.9, pair.top.com).stable == sample.stable
        labels.add(sample.stable)
    assert labels == {True, False}


def square_points(cx: float, half: float = 1.0) -> np.ndarray:
    return np.array([[cx - half, -half], [cx + half, -half], [cx + half, half], [cx - half, half]])


def test_stack_checks_combined_center_of_mass():
    heavy_top = [
        StackLayer(square_points(5.0), Point2(5.0, 0.0), 10.0),
        StackLayer(square_points(0.0), ORIGIN, 1.0),
    ]
    light_top = [
        StackLayer(square_points(5.0), Point2(5.0, 0.0), 0.01),
        StackLayer(square_points(0.0), ORIGIN, 1.0),
    ]
    assert not stack_stable(heavy_top)
    assert stack_stable(light_top)
    assert not stack_stable([StackLayer(square_points(0.0), Point2(3.0, 0.0), 1.0)])


# Policy ---------------------------------------------------------------------

BELIEF_GRID = GridSpec(Point2(-10.0, -10.0), 1.0, 25, 20)


def block_belief(cx: float) -> BeliefMap:
    """2x2 confident block centred on (cx, 0)"""
    centers = BELIEF_GRID.cell_centers()
    block = (np.abs(centers[:, 0] - cx) < 1.0) & (np.abs(centers[:, 1]) < 1.0)
    return BeliefMap(BELIEF_GRID, np.where(block, 8.0, -8.0))


def test_action_within_clip_radius():
    action = select_action(block_belief(1.0), GripperPose(ORIGIN), 0.9, 3.0)
    assert (action.dx, action.dy) == pytest.approx((1.0, 0.0))


def test_action_is_clipped_to_d_move():
    action = select_action(block_belief(10.0), GripperPose(ORIGIN), 0.9, 3.0)
    assert (action.dx, action.dy) == pytest.approx((3.0, 0.0))


def test_action_at_target_is_zero():
    action = select_action(block_belief(4.0), GripperPose(Point2(4.0, 0.0)), 0.9, 3.0)
    assert action.norm() == pytest.approx(0.0, abs=1e-9)


def test_target_falls_back_to_most_probable_cell():
    values = np.zeros(BELIEF_GRID.size)
    values[37] = 2.0
    target = select_target(BeliefMap(BELIEF_GRID, values), 0.9)
    assert (target.x, target.y) == tuple(BELIEF_GRID.cell_centers()[37])
    assert select_target(init_belief(BELIEF_GRID), 0.9) == Point2.of(BELIEF_GRID.cell_centers()[0])


def test_fallback_steps_a_full_move_toward_the_most_probable_cell():
    values = np.zeros(BELIEF_GRID.size)
    values[37] = 2.0
    values[38] = 2.0
    belief = BeliefMap(BELIEF_GRID, values)
    cell = BELIEF_GRID.cell_centers()[37]

    action = select_action(belief, GripperPose(ORIGIN), 0.9, 3.0)
    assert action.norm() == pytest.approx(3.0)
    assert math.atan2(action.dy, action.dx) == pytest.approx(math.atan2(cell[1], cell[0]))

    snapped = snap_action(action, 1.0, 3.0)
    assert 0.0 < snapped.norm() <= 3.0 + 1e-9
    assert snapped.dx * cell[0] + snapped.dy * cell[1] > 0.0

    # a nearby cell is still approached with a full step
    near = Point2.of(cell) + Point2(1.0, 0.0)
    action = select_action(belief, GripperPose(near), 0.9, 3.0)
    assert (action.dx, action.dy) == pytest.approx((-3.0, 0.0))
    assert snap_action(action, 1.0, 3.0) == Action(-3.0, 0.0)


def test_clipped_and_snapped_actions_respect_d_move():
    rng = np.random.default_rng(8)
    for vx, vy in rng.uniform(-12, 12, size=(500, 2)):
        clipped = clip_action(vx, vy, 3.0)
        assert clipped.norm() <= 3.0 + 1e-9
        snapped = snap_action(clipped, 1.0, 3.0)
        assert snapped.norm() <= 3.0 + 1e-9
        assert snapped.dx == round(snapped.dx) and snapped.dy == round(snapped.dy)


def test_snap_action_shrinks_the_larger_component():
    assert snap_action(Action(2.2, 2.2), 1.0, 3.0) == Action(2.0, 2.0)
    assert snap_action(Action(2.6, 1.6), 1.0, 3.0) == Action(2.0, 2.0)
    assert snap_action(Action(3.0, 0.0), 1.0, 3.0) == Action(3.0, 0.0)


def test_policy_commutes_with_quarter_turns():
    grid = GridSpec(Point2(-10.0, -10.0), 1.0, 20, 20)
    centers = grid.cell_centers()
    region = ConvexPolygon.from_xy([(1, -2), (7, 0), (4, 5), (-1, 3)])

    def turned(xy: np.ndarray, k: int) -> np.ndarray:
        for _ in range(k):
            xy = np.column_stack([-xy[:, 1], xy[:, 0]])
        return xy

    pose = np.array([[-6.0, -4.0]])
    base = None
    for k in range(4):
        # a cell is confident when its preimage under k quarter turns lies in the region
        inside = region.contains_xy(turned(centers, (4 - k) % 4))
        belief = BeliefMap(grid, np.where(inside, 8.0, -8.0))
        action = select_action(belief, GripperPose(Point2(*turned(pose, k)[0])), 0.9, 3.0)
        if base is None:
            base = np.array([[action.dx, action.dy]])
            assert action.norm() == pytest.approx(3.0)
        assert (action.dx, action.dy) == pytest.approx(tuple(turned(base, k)[0]), abs=1e-9)


def test_d_move_must_be_positive():
    with pytest.raises(ConfigurationError):
        select_action(init_belief(BELIEF_GRID), GripperPose(ORIGIN), 0.9, 0.0)
