import json

import pytest

from conftest import CONFIG_DIR
from patchstack.cli import main, model_filename
from patchstack.core.constants import Modality
from patchstack.storage import load_dataset
from patchstack.storage.episode_log import read_episode_log

TOY = str(CONFIG_DIR / "toy.json")


def run(*args) -> int:
    return main([*args, "--log-level", "WARNING"])


def write_config(path, data) -> str:
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def header(path) -> str:
    return path.read_text(encoding="utf-8").splitlines()[0]


def test_missing_output_directory_exits_2(tmp_path):
    assert run("gen-data", "--config", TOY, "--out", str(tmp_path / "absent")) == 2


def test_generative_command_without_seed_exits_2(tmp_path):
    config = write_config(tmp_path / "c.json", {"dataset": {"n_per_pair": 1}})
    assert run("gen-data", "--config", config, "--out", str(tmp_path)) == 2


def test_bad_config_exits_2(tmp_path):
    config = write_config(tmp_path / "c.json", {"episodes": {"n_episodes": -1}})
    assert run("episodes", "--config", config, "--seed", "1", "--out", str(tmp_path)) == 2


def test_gen_data_is_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    assert run("gen-data", "--config", TOY, "--out", str(a)) == 0
    assert run("gen-data", "--config", TOY, "--out", str(b), "--jobs", "1") == 0
    assert (a / "dataset.jsonl").read_bytes() == (b / "dataset.jsonl").read_bytes()
    assert len(load_dataset(a / "dataset.jsonl")) == 10


def test_toy_pipeline(tmp_path):
    out = str(tmp_path)
    assert run("gen-data", "--config", TOY, "--out", out) == 0
    assert run("train", "--config", TOY, "--out", out) == 0
    assert (tmp_path / model_filename("mushroom", Modality.FT_TAC)).is_file()
    assert not (tmp_path / "implicit-mushroom.jsonl").exists()
    assert header(tmp_path / "loss.tsv").startswith("# patchstack patchstack.report/1 config_hash=")

    assert run("eval", "--config", TOY, "--out", out) == 0
    lines = (tmp_path / "contact_d0.9.tsv").read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# patchstack")
    assert lines[1].split("\t")[:3] == ["top", "bottom", "samples"]
    assert "iou_FT+Tac" in lines[1] and "iou_bayes" in lines[1]
    assert lines[2].split("\t")[:3] == ["mushroom", "circle_s", "10"]


def test_empty_evaluation_set_exits_3(tmp_path):
    config = write_config(
        tmp_path / "c.json",
        {"seed": 1, "dataset": {"tops": ["mushroom"], "bottoms": ["circle_s"], "n_per_pair": 0}, "eval": {"dataset": "dataset.jsonl"}},
    )
    assert run("gen-data", "--config", config, "--out", str(tmp_path)) == 0
    assert run("eval", "--config", config, "--out", str(tmp_path)) == 3


def test_corrupted_dataset_exits_3(tmp_path):
    assert run("gen-data", "--config", TOY, "--out", str(tmp_path)) == 0
    path = tmp_path / "dataset.jsonl"
    lines = path.read_text(encoding="utf-8").splitlines()
    path.write_text("\n".join(lines[:4] + ["{oops"] + lines[5:]) + "\n", encoding="utf-8")
    assert run("train", "--config", TOY, "--out", str(tmp_path)) == 3


def test_plot_data(tmp_path):
    assert run("plot-data", "--config", TOY, "--out", str(tmp_path)) == 0
    rows = (tmp_path / "distribution.tsv").read_text(encoding="utf-8").splitlines()
    assert rows[0].startswith("# patchstack")
    assert len(rows) == 2 + 20
    ambiguity = (tmp_path / "ambiguity.tsv").read_text(encoding="utf-8").splitlines()
    assert ambiguity[1].split("\t") == ["first", "second", "signal_distance", "patch_iou"]
    assert len(ambiguity) <= 2 + 3


@pytest.mark.slow
def test_toy_episodes(tmp_path):
    assert run("episodes", "--config", TOY, "--out", str(tmp_path)) == 0
    for name in ("stacking.tsv", "episodes.tsv", "stability.tsv", "belief_iou.tsv"):
        assert header(tmp_path / name).startswith("# patchstack")

    meta, records = read_episode_log(tmp_path / "episodes.jsonl")
    assert meta["seed"] == 3
    # baseline and bayes batches for each bottom
    assert len(records) == 2 * 2 * 3
    assert {r["method"] for r in records} == {"pick-and-place", "bayes"}

    stacking = (tmp_path / "stacking.tsv").read_text(encoding="utf-8").splitlines()
    assert stacking[1].split("\t") == ["method", "mushroom/short", "mushroom/long", "total"]
    assert stacking[2].split("\t")[0] == "pick-and-place"
    assert stacking[2].split("\t")[-1] == "0/6"


@pytest.mark.slow
def test_episode_snapshots_name_the_config(tmp_path):
    data = json.loads((CONFIG_DIR / "toy.json").read_text(encoding="utf-8"))
    data["episodes"].update({"bottoms": ["short"], "n_episodes": 1, "n_trials": 0, "baseline": False, "snapshots": True})
    config = write_config(tmp_path / "c.json", data)
    out = tmp_path / "out"
    out.mkdir()
    assert run("episodes", "--config", config, "--out", str(out)) == 0

    _, records = read_episode_log(out / "episodes.jsonl")
    hash_line = header(out / "stacking.tsv").split()[-1]
    assert hash_line.startswith("config_hash=")
    names = [p["snapshot"] for r in records for p in r["probes"]]
    assert names
    for name in names:
        assert header(out / "snapshots" / name) == f"# patchstack patchstack.belief/1 {hash_line}"


def _outputs(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.mark.slow
def test_reruns_are_byte_identical(tmp_path):
    runs = []
    for name in ("a", "b"):
        out = tmp_path / name
        out.mkdir()
        for command in ("gen-data", "train", "episodes", "plot-data"):
            assert run(command, "--config", TOY, "--out", str(out)) == 0
        runs.append(_outputs(out))

    first, second = runs
    for name in ("loss.tsv", model_filename("mushroom", Modality.FT_TAC), "episodes.jsonl", "stacking.tsv",
                 "stability.tsv", "belief_iou.tsv", "distribution.tsv", "ambiguity.tsv"):
        assert name in first
    assert first == second
