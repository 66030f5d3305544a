#!/usr/bin/env python3
"""
PatchStack command line.

    python -m patchstack.cli gen-data --config configs/default.json --seed 1 --out runs/a
    python -m patchstack.cli train    --config configs/default.json --seed 1 --out runs/a
    python -m patchstack.cli eval     --config configs/default.json --out runs/a
    python -m patchstack.cli episodes --config configs/default.json --seed 1 --out runs/a
    python -m patchstack.cli plot-data --config configs/default.json --seed 1 --out runs/a

Relative paths inside the config resolve against --out. Every file written
starts with a header carrying its schema and the config hash.
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import structlog
from rich.console import Console
from rich.table import Table

from patchstack.core.config import RunConfig, config_hash, get_settings, load_run_config
from patchstack.core.constants import REPORT_SCHEMA, ModelKind, Modality, Scenario
from patchstack.core.exceptions import ConfigurationError, DataError, PatchStackError, exit_code_for
from patchstack.core.logging import configure_logging

console = Console()
logger = structlog.get_logger(__name__)

MODALITY_SLUG = {Modality.FT: "ft", Modality.TAC: "tac", Modality.FT_TAC: "ft_tac"}


def model_filename(top: str, modality: Modality) -> str:
    return f"model-{top}-{MODALITY_SLUG[modality]}.jsonl"


def implicit_filename(top: str) -> str:
    return f"implicit-{top}.jsonl"


class PatchStackCLI:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.hash = config_hash(cfg)
        self.out = cfg.out_dir()
        if not self.out.is_dir():
            raise ConfigurationError(f"output directory does not exist: {self.out}", field="out")

    # Commands -----------------------------------------------------------------

    def gen_data(self) -> Path:
        from patchstack.generation import generate, make_pair
        from patchstack.storage import write_dataset

        seed = self.cfg.require_seed()
        section = self.cfg.dataset
        box = section.range.to_range() if section.range else None
        pairs = [
            make_pair(self.cfg.piece(t), self.cfg.piece(b), section.spacing, box)
            for t in section.tops
            for b in section.bottoms
        ]
        dataset = generate(pairs, section.n_per_pair, self.cfg.sensor, seed, jobs=self.cfg.jobs)
        path = write_dataset(self.cfg.resolve(section.out), dataset, self.hash)

        table = Table(title="Generated Dataset", show_header=True, header_style="bold magenta")
        table.add_column("Top", style="cyan")
        table.add_column("Bottom", style="cyan")
        table.add_column("Samples", justify="right")
        table.add_column("Stable", justify="right")
        for pair_id, samples in dataset.by_pair().items():
            stable = sum(s.stable for s in samples)
            table.add_row(pair_id[0], pair_id[1], str(len(samples)), str(stable))
        console.print(table)
        console.print(f"📁 [green]{path}[/green]")
        return path

    def train(self) -> List[Path]:
        from patchstack.estimation.trainer import train, train_implicit
        from patchstack.orchestration.reports import loss_table
        from patchstack.storage import load_dataset
        from patchstack.storage.model_store import write_model

        seed = self.cfg.require_seed()
        section = self.cfg.train
        dataset = load_dataset(self.cfg.resolve(section.dataset))
        if len(dataset) == 0:
            raise DataError("training set is empty", path=str(self.cfg.resolve(section.dataset)))

        tops = section.tops or dataset.tops()
        written: List[Path] = []
        curves = []
        for top in tops:
            samples = dataset.for_top(top)
            if not samples:
                raise DataError(f"dataset has no samples for top piece {top!r}")
            piece = dataset.pair(samples[0].pair_id).top
            for modality in section.modalities:
                config = section.model.model_copy(update={"modality": modality, "seed": seed})
                with structlog.contextvars.bound_contextvars(top=top, modality=modality.value):
                    model = train(samples, config, piece)
                written.append(write_model(self.out / model_filename(top, modality), model, self.hash))
                curves.append((top, modality.value, model.loss_history))
            if section.implicit:
                config = section.model.model_copy(update={"modality": Modality.FT_TAC, "seed": seed})
                with structlog.contextvars.bound_contextvars(top=top, modality="implicit"):
                    model = train_implicit(samples, config, piece)
                written.append(write_model(self.out / implicit_filename(top), model, self.hash))
                curves.append((top, ModelKind.IMPLICIT.value, model.loss_history))

        self._write(loss_table(curves))
        table = Table(title="Trained Models", show_header=True, header_style="bold magenta")
        table.add_column("Top", style="cyan")
        table.add_column("Model", style="cyan")
        table.add_column("Final loss", justify="right")
        for top, label, history in curves:
            table.add_row(top, label, f"{history[-1]:.5f}" if history else "-")
        console.print(table)
        return written

    def eval(self) -> List[Path]:
        from patchstack.orchestration import evaluate_patch_models
        from patchstack.orchestration.reports import contact_table
        from patchstack.storage import load_dataset
        from patchstack.storage.model_store import load_model

        section = self.cfg.eval
        dataset = load_dataset(self.cfg.resolve(section.dataset))
        if len(dataset) == 0:
            raise DataError("evaluation set is empty", path=str(self.cfg.resolve(section.dataset)))

        paths = [self.cfg.resolve(p) for p in section.models] or sorted(self.out.glob("model-*.jsonl"))
        models = [load_model(p) for p in paths]
        for path, model in zip(paths, models):
            if model.kind != ModelKind.PATCH:
                raise DataError("not a contact-patch model", path=str(path))

        rows = evaluate_patch_models(models, dataset, section.bayes, section.hypothesis_step, section.deltas)
        written = []
        for delta in section.deltas:
            table = contact_table(rows, delta)
            table.name = f"contact_d{delta:g}"
            written.append(self._write(table))
            self._show(table)
        return written

    def episodes(self) -> List[Path]:
        from patchstack.orchestration import (
            EpisodeConfig,
            StabilityRow,
            belief_iou_vs_n,
            make_trials,
            run_batch,
            run_trials,
            stability_accuracy_vs_n,
            towers_for,
        )
        from patchstack.orchestration.reports import batch_table, belief_table, stability_table, stacking_table
        from patchstack.storage.episode_log import write_episode_log

        seed = self.cfg.require_seed()
        section = self.cfg.episodes
        towers = towers_for(section.scenarios, [self.cfg.piece(b) for b in section.bottoms])
        snapshot_dir: Optional[str] = None
        if section.snapshots:
            (self.out / "snapshots").mkdir(exist_ok=True)
            snapshot_dir = str(self.out / "snapshots")

        summaries, logs = [], []
        stability_rows, curves = [], []
        n_max = max(max(section.n_values), section.belief_n_max)
        stream = 0
        for top_name in section.tops:
            top = self.cfg.piece(top_name)
            model_path = self._optional_path(section.models.get(top_name), model_filename(top_name, Modality.FT_TAC))
            implicit_path = self._optional_path(section.implicit_models.get(top_name), implicit_filename(top_name))
            for tower in towers:
                stream += 1
                base = EpisodeConfig(
                    top=top,
                    tower=tower,
                    params=self.cfg.sensor,
                    estimator=section.estimator,
                    model_path=model_path,
                    max_probes=section.max_probes,
                    delta=section.delta,
                    d_move=section.d_move,
                    spacing=section.spacing,
                    hypothesis_step=section.hypothesis_step,
                    seed=seed,
                    stream=stream,
                    snapshot_dir=snapshot_dir,
                    aggregated_verdict=section.aggregated_verdict,
                    config_hash=self.hash,
                )
                with structlog.contextvars.bound_contextvars(top=top_name, tower=tower.label):
                    if section.baseline:
                        summary, batch = run_batch(replace(base, release_immediately=True), section.n_episodes, self.cfg.jobs)
                        summaries.append(summary)
                        logs.extend(batch)
                    summary, batch = run_batch(base, section.n_episodes, self.cfg.jobs)
                    summaries.append(summary)
                    logs.extend(batch)

                    if tower.scenario == Scenario.ONE and section.n_trials > 0:
                        results = run_trials(base, make_trials(base, section.n_trials), n_max, implicit_path, self.cfg.jobs)
                        accuracy, implicit = stability_accuracy_vs_n(results, section.n_values)
                        stability_rows.append(StabilityRow(top_name, tower.label, len(results), accuracy, implicit))
                        curves.append((top_name, tower.label, belief_iou_vs_n(results, section.belief_n_max)))

        written = [write_episode_log(self.out / "episodes.jsonl", logs, self.hash, {"seed": seed})]
        for table in (
            stacking_table(summaries),
            batch_table(summaries),
            stability_table(stability_rows, section.n_values),
            belief_table(curves),
        ):
            written.append(self._write(table))
            if table.name != "episodes":
                self._show(table)
        return written

    def plot_data(self) -> List[Path]:
        from patchstack.generation import SignalRecord, find_ambiguous_pairs, signal_distribution_report
        from patchstack.orchestration.reports import ambiguity_table, distribution_table
        from patchstack.storage import load_dataset

        section = self.cfg.plot
        if section.dataset:
            dataset = load_dataset(self.cfg.resolve(section.dataset))
            records = [SignalRecord.from_sample(s) for s in dataset]
        else:
            seed = self.cfg.require_seed()
            records = signal_distribution_report(
                self.cfg.piece(section.top),
                self.cfg.piece(section.bottom),
                section.n_samples,
                self.cfg.sensor,
                seed=seed,
                displacement_range=section.range.to_range() if section.range else None,
                spacing=section.spacing,
                jobs=self.cfg.jobs,
            )
        ambiguous = find_ambiguous_pairs(records, section.ambiguous_k)
        written = [self._write(distribution_table(records)), self._write(ambiguity_table(ambiguous))]
        console.print(f"📊 {len(records)} records, {len(ambiguous)} ambiguous pairs")
        return written

    # Helpers ------------------------------------------------------------------

    def _optional_path(self, configured: Optional[str], default_name: str) -> Optional[str]:
        if configured:
            return str(self.cfg.resolve(configured))
        candidate = self.out / default_name
        return str(candidate) if candidate.is_file() else None

    def _write(self, table) -> Path:
        from patchstack.storage.tables import write_table

        return write_table(self.out / f"{table.name}.tsv", REPORT_SCHEMA, self.hash, table.columns, table.rows)

    def _show(self, report) -> None:
        table = Table(title=report.title, show_header=True, header_style="bold cyan")
        for column in report.columns:
            table.add_column(str(column))
        for row in report.rows:
            table.add_row(*(str(v) for v in row))
        console.print(table)


COMMANDS: Dict[str, Callable[[PatchStackCLI], object]] = {
    "gen-data": PatchStackCLI.gen_data,
    "train": PatchStackCLI.train,
    "eval": PatchStackCLI.eval,
    "episodes": PatchStackCLI.episodes,
    "plot-data": PatchStackCLI.plot_data,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="patchstack", description="Extrinsic contact patch estimation and stacking simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--seed", type=int, help="master seed (required for generative commands)")
        p.add_argument("--jobs", type=int, help="worker processes")
        p.add_argument("--out", help="output directory (must exist)")
        p.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = get_settings()
    configure_logging(args.log_level or settings.LOG_LEVEL, settings.LOG_FORMAT)

    try:
        cfg = load_run_config(args.config, seed=args.seed, jobs=args.jobs, out=args.out)
        with structlog.contextvars.bound_contextvars(command=args.command):
            COMMANDS[args.command](PatchStackCLI(cfg))
        return 0
    except PatchStackError as e:
        logger.error("command failed", error=e.message, **e.details)
        console.print(f"[bold red]❌ Error: {e.message}[/bold red]")
        return exit_code_for(e)
    except Exception as e:
        logger.exception("unexpected failure")
        console.print(f"[bold red]Fatal error: {e}[/bold red]")
        return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())
