from dataclasses import replace

import numpy as np
import pytest

from patchstack.core.constants import EstimatorKind, Outcome, Scenario
from patchstack.core.exceptions import ConfigurationError, DataError
from patchstack.generation import Dataset, generate, make_pair
from patchstack.geometry import Point2, patch_grid
from patchstack.orchestration import (
    EpisodeConfig,
    belief_iou_vs_n,
    evaluate_patch_models,
    make_trials,
    one_bottom,
    run_batch,
    run_episode,
    run_trials,
    sample_initial_pose,
    stability_accuracy_vs_n,
    towers_for,
    two_bottoms,
)
from patchstack.planning import ground_truth_stable
from patchstack.sensing import SensorParams
from patchstack.storage.episode_log import read_episode_log, write_episode_log


@pytest.fixture
def oracle_cfg(pieces, params) -> EpisodeConfig:
    return EpisodeConfig(
        top=pieces["mushroom"],
        tower=one_bottom(pieces["short"]),
        params=params,
        estimator=EstimatorKind.ORACLE,
        seed=11,
        stream=1,
    )


def test_towers_and_labels(pieces):
    short, long = pieces["short"], pieces["long"]
    towers = towers_for([Scenario.ONE, Scenario.TWO], [short, long])
    assert [t.label for t in towers] == ["short", "long", "long-on-short"]
    tower = two_bottoms(short, long)
    assert tower.support.piece.name == "long"
    assert tower.support.position == Point2(6.0, 0.0)


def test_two_bottom_release(pieces):
    top = pieces["mushroom"]
    tower = two_bottoms(pieces["short"], pieces["long"])
    grid = patch_grid(top.shape, 1.0)
    centered = Point2(6.0, 0.0)
    assert tower.release_stable(top, centered, tower.contact(top, centered, grid))
    off = Point2(17.0, 0.0)
    assert not tower.release_stable(top, off, tower.contact(top, off, grid))


def test_initial_pose_is_unstable(oracle_cfg):
    grid = patch_grid(oracle_cfg.top.shape, oracle_cfg.spacing)
    for e in range(5):
        pose, patch = sample_initial_pose(oracle_cfg, e)
        assert patch.count > 0
        assert oracle_cfg.tower.top_margin(oracle_cfg.top, patch) <= -1.0
        assert not oracle_cfg.tower.release_stable(oracle_cfg.top, pose, patch)
        assert patch == oracle_cfg.tower.contact(oracle_cfg.top, pose, grid)


def test_zero_probe_budget(oracle_cfg):
    log = run_episode(replace(oracle_cfg, max_probes=0), 0)
    assert log.outcome == Outcome.MAX_PROBES_EXCEEDED
    assert log.n_probes == 0


def test_pick_and_place_always_fails(oracle_cfg):
    summary, logs = run_batch(replace(oracle_cfg, release_immediately=True), 5)
    assert summary.method == "pick-and-place"
    assert summary.successes == 0
    assert all(log.outcome == Outcome.RELEASED_UNSTABLE and log.n_probes == 0 for log in logs)


def test_oracle_episodes_mostly_succeed(oracle_cfg):
    summary, logs = run_batch(oracle_cfg, 10)
    assert summary.episodes == 10
    assert summary.success_rate >= 0.8
    pose_range = oracle_cfg.tower.pose_range(oracle_cfg.top)
    for log in logs:
        assert log.phases[0] == "initial"
        assert log.phases[-1] == log.outcome.value
        for probe in log.probes:
            assert pose_range.contains(Point2(*probe.pose))
            if probe.action is not None:
                assert np.hypot(*probe.action) <= oracle_cfg.d_move + 1e-9


def test_verdict_reads_the_current_estimate(oracle_cfg):
    top = oracle_cfg.top
    grid = patch_grid(top.shape, oracle_cfg.spacing)
    assert not oracle_cfg.aggregated_verdict
    _, logs = run_batch(oracle_cfg, 4)
    for log in logs:
        for probe in log.probes:
            truth = oracle_cfg.tower.contact(top, Point2(*probe.pose), grid)
            assert probe.stable == ground_truth_stable(truth, top.com)
            assert probe.support_cells == truth.count


def test_aggregated_verdict_is_opt_in(oracle_cfg):
    cfg = replace(oracle_cfg, aggregated_verdict=True)
    first = run_episode(cfg, 2)
    assert first.to_record() == run_episode(cfg, 2).to_record()
    assert first.n_probes >= 1


def test_snapshots_carry_a_header(tmp_path, oracle_cfg):
    cfg = replace(oracle_cfg, snapshot_dir=str(tmp_path), config_hash="feedbeef")
    log = run_episode(cfg, 0)
    assert log.n_probes >= 1
    for probe in log.probes:
        lines = (tmp_path / probe.snapshot).read_text(encoding="utf-8").splitlines()
        assert lines[0] == "# patchstack patchstack.belief/1 config_hash=feedbeef"
        assert lines[1] == f"# probe {probe.index}"
        assert lines[2].startswith("# grid origin=")


def test_empty_batch(oracle_cfg):
    summary, logs = run_batch(oracle_cfg, 0)
    assert logs == []
    assert summary.success_rate == 0.0


def test_bayes_episode_is_deterministic(pieces, params):
    cfg = EpisodeConfig(top=pieces["mushroom"], tower=one_bottom(pieces["short"]), params=params, seed=3, stream=2)
    first = run_episode(cfg, 1)
    second = run_episode(cfg, 1)
    assert first.to_record() == second.to_record()
    assert 1 <= first.n_probes <= cfg.max_probes
    assert first.outcome in set(Outcome)


def test_learned_estimator_needs_a_model(pieces):
    with pytest.raises(ConfigurationError):
        EpisodeConfig(top=pieces["mushroom"], tower=one_bottom(pieces["short"]), estimator=EstimatorKind.LEARNED)
    with pytest.raises(ConfigurationError):
        EpisodeConfig(top=pieces["mushroom"], tower=one_bottom(pieces["short"]), delta=1.0)


def test_episode_log_roundtrip(tmp_path, oracle_cfg):
    _, logs = run_batch(oracle_cfg, 2)
    path = write_episode_log(tmp_path / "episodes.jsonl", logs, "abc", {"seed": 11})
    header, records = read_episode_log(path)
    assert header["episodes"] == 2
    assert header["config_hash"] == "abc"
    assert records == [log.to_record() for log in logs]

    lines = path.read_text(encoding="utf-8").splitlines()
    path.write_text(lines[0] + "\n" + lines[1].replace(logs[0].outcome.value, "exploded") + "\n", encoding="utf-8")
    with pytest.raises(DataError):
        read_episode_log(path)


# Fixed-position trials ----------------------------------------------------------

def test_perfect_estimates_classify_every_trial(oracle_cfg):
    trials = make_trials(oracle_cfg, 6)
    results = run_trials(oracle_cfg, trials, 5)
    accuracy, implicit = stability_accuracy_vs_n(results, [1, 2, 3])
    assert accuracy == {1: 1.0, 2: 1.0, 3: 1.0}
    assert implicit is None

    curve = belief_iou_vs_n(results, 5)
    assert len(curve) == 5
    assert all(b >= a for a, b in zip(curve, curve[1:]))


def test_trials_are_deterministic(oracle_cfg):
    assert make_trials(oracle_cfg, 4) == make_trials(oracle_cfg, 4)
    with pytest.raises(ConfigurationError):
        run_trials(oracle_cfg, make_trials(oracle_cfg, 1), 6)


# Patch evaluation ---------------------------------------------------------------

@pytest.fixture
def small_eval_set(pieces, params):
    return generate([make_pair(pieces["mushroom"], pieces["circle_s"])], 4, params, seed=5)


def test_bayes_reference_rows(small_eval_set):
    rows = evaluate_patch_models([], small_eval_set, bayes=True, hypothesis_step=1.0, deltas=(0.9, 0.5))
    assert [(r.method, r.delta) for r in rows] == [("bayes", 0.9), ("bayes", 0.5)]
    for r in rows:
        assert r.samples == 4
        assert 0.0 <= r.iou <= 1.0
        assert 0.0 <= r.accuracy <= 1.0


def test_learned_rows(small_eval_set):
    from patchstack.estimation import ModelConfig
    from patchstack.estimation.trainer import train

    top = small_eval_set.pair(("mushroom", "circle_s")).top
    model = train(small_eval_set.samples, ModelConfig(hidden_units=8, epochs=2, batch_size=2), top)
    rows = evaluate_patch_models([model], small_eval_set, bayes=False)
    assert [r.method for r in rows] == ["FT+Tac"]


def test_empty_evaluation_set_is_a_data_error(params):
    with pytest.raises(DataError):
        evaluate_patch_models([], Dataset(pairs={}, samples=[], params=params))


@pytest.mark.slow
@pytest.mark.parametrize("bottom", ["short", "long"])
def test_oracle_batch_never_releases_unstably(pieces, params, bottom):
    cfg = EpisodeConfig(
        top=pieces["mushroom"],
        tower=one_bottom(pieces[bottom]),
        params=params,
        estimator=EstimatorKind.ORACLE,
        seed=21,
        stream=4,
    )
    summary, logs = run_batch(cfg, 60)
    assert summary.success_rate >= 0.9
    assert not any(log.outcome == Outcome.RELEASED_UNSTABLE for log in logs)


@pytest.mark.slow
def test_two_bottom_towers_are_not_easier(pieces, params):
    top = pieces["mushroom"]
    rates = {}
    for stream, tower in enumerate((one_bottom(pieces["short"]), two_bottoms(pieces["short"], pieces["long"])), start=1):
        cfg = EpisodeConfig(top=top, tower=tower, params=params, seed=5, stream=stream)
        summary, _ = run_batch(cfg, 20)
        rates[tower.scenario] = summary.success_rate
    assert rates[Scenario.TWO] <= rates[Scenario.ONE] + 0.05


@pytest.mark.slow
def test_belief_iou_grows_with_probes(pieces, params):
    cfg = EpisodeConfig(top=pieces["mushroom"], tower=one_bottom(pieces["short"]), params=params, seed=9, stream=3)
    curve = belief_iou_vs_n(run_trials(cfg, make_trials(cfg, 100), 5), 5)
    assert all(b >= a - 0.01 for a, b in zip(curve, curve[1:]))
    assert curve[-1] > curve[0]


# high-noise probes leave single estimates blurred; aggregation has to sharpen them
NOISY = SensorParams(noise_sigma_force=5.0, noise_sigma_torque=250.0, noise_sigma_tac=4.0)


@pytest.fixture(scope="module")
def noisy_trials(pieces):
    cfg = EpisodeConfig(top=pieces["mushroom"], tower=one_bottom(pieces["short"]), params=NOISY, seed=13, stream=1)
    return cfg, make_trials(cfg, 120)


@pytest.mark.slow
def test_aggregation_improves_stability_accuracy(noisy_trials):
    cfg, trials = noisy_trials
    accuracy, _ = stability_accuracy_vs_n(run_trials(cfg, trials, 3), [1, 2, 3])
    assert accuracy[3] >= accuracy[1] + 0.10


@pytest.mark.slow
def test_aggregated_patches_beat_the_implicit_classifier(tmp_path, pieces, noisy_trials):
    from patchstack.estimation import ModelConfig
    from patchstack.estimation.trainer import train_implicit
    from patchstack.storage.model_store import write_model

    cfg, trials = noisy_trials
    top = pieces["mushroom"]
    board = generate([make_pair(top, pieces[b]) for b in ("circle_s", "circle_l", "square")], 400, NOISY, seed=6)
    model = train_implicit(board.samples, ModelConfig(epochs=60), top)
    path = write_model(tmp_path / "implicit-mushroom.jsonl", model)

    accuracy, implicit = stability_accuracy_vs_n(run_trials(cfg, trials, 3, str(path)), [3])
    assert implicit is not None
    assert accuracy[3] >= implicit + 0.10
