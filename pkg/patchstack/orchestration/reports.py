"""Pivots of evaluation results into the contact / stability / stacking table layouts"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from patchstack.core.constants import Modality
from patchstack.generation.distribution import COLUMNS as DISTRIBUTION_COLUMNS
from patchstack.generation.distribution import AmbiguousPair, SignalRecord
from patchstack.orchestration.evaluation import BatchSummary, ContactRow, StabilityRow

MISSING = "-"
CONTACT_METHODS = [m.value for m in (Modality.FT, Modality.TAC, Modality.FT_TAC)] + ["bayes"]


@dataclass
class ReportTable:
    name: str
    title: str
    columns: List[str]
    rows: List[Tuple] = field(default_factory=list)


def _pct(value: Optional[float]) -> str:
    return MISSING if value is None else f"{100.0 * value:.1f}"


def contact_table(rows: Sequence[ContactRow], delta: float) -> ReportTable:
    """One line per (top, bottom): IoU block then accuracy block, one column per input"""
    methods = [m for m in CONTACT_METHODS if any(r.method == m for r in rows)]
    cells: Dict[Tuple[str, str], Dict[str, ContactRow]] = {}
    for r in rows:
        if r.delta == delta:
            cells.setdefault((r.top, r.bottom), {})[r.method] = r
    columns = ["top", "bottom", "samples"] + [f"iou_{m}" for m in methods] + [f"acc_{m}" for m in methods]
    table = ReportTable("contact", f"Contact patch estimation (delta={delta:g})", columns)
    for (top, bottom), by_method in cells.items():
        n = next(iter(by_method.values())).samples
        ious = [_pct(by_method[m].iou) if m in by_method else MISSING for m in methods]
        accs = [_pct(by_method[m].accuracy) if m in by_method else MISSING for m in methods]
        table.rows.append((top, bottom, n, *ious, *accs))
    return table


def stability_table(rows: Sequence[StabilityRow], n_values: Sequence[int]) -> ReportTable:
    columns = ["top", "bottom", "trials", "implicit"] + [f"n={n}" for n in n_values]
    table = ReportTable("stability", "Stability classification accuracy", columns)
    for r in rows:
        table.rows.append((r.top, r.tower, r.trials, _pct(r.implicit), *[_pct(r.accuracy.get(n)) for n in n_values]))
    return table


def stacking_table(summaries: Sequence[BatchSummary]) -> ReportTable:
    """Methods as rows, one column per (top, tower), cells are successes/episodes"""
    keys: List[Tuple[str, str]] = []
    for s in summaries:
        if (s.top, s.tower) not in keys:
            keys.append((s.top, s.tower))
    methods: List[str] = []
    for s in summaries:
        if s.method not in methods:
            methods.append(s.method)
    lookup = {(s.method, s.top, s.tower): s for s in summaries}

    columns = ["method"] + [f"{top}/{tower}" for top, tower in keys] + ["total"]
    table = ReportTable("stacking", "Stacking success", columns)
    for method in methods:
        cells = []
        wins = total = 0
        for top, tower in keys:
            s = lookup.get((method, top, tower))
            if s is None:
                cells.append(MISSING)
                continue
            cells.append(f"{s.successes}/{s.episodes}")
            wins += s.successes
            total += s.episodes
        table.rows.append((method, *cells, f"{wins}/{total}"))
    return table


def batch_table(summaries: Sequence[BatchSummary]) -> ReportTable:
    """Long form of the stacking results with probe counts and outcome breakdown"""
    columns = [
        "method", "top", "tower", "scenario", "episodes", "successes", "success_rate", "mean_probes",
        "released_stable", "released_unstable", "max_probes_exceeded",
    ]
    table = ReportTable("episodes", "Episode batches", columns)
    for s in summaries:
        table.rows.append((
            s.method, s.top, s.tower, s.scenario, s.episodes, s.successes, round(s.success_rate, 4),
            round(s.mean_probes, 3), s.outcomes.get("released-stable", 0),
            s.outcomes.get("released-unstable", 0), s.outcomes.get("max-probes-exceeded", 0),
        ))
    return table


def belief_table(curves: Sequence[Tuple[str, str, List[float]]]) -> ReportTable:
    table = ReportTable("belief_iou", "Belief IoU against probe count", ["top", "bottom", "n", "belief_iou"])
    for top, tower, values in curves:
        for n, value in enumerate(values, start=1):
            table.rows.append((top, tower, n, round(value, 6)))
    return table


def loss_table(curves: Sequence[Tuple[str, str, List[float]]]) -> ReportTable:
    table = ReportTable("loss", "Training loss", ["top", "model", "epoch", "loss"])
    for top, label, history in curves:
        for epoch, loss in enumerate(history, start=1):
            table.rows.append((top, label, epoch, loss))
    return table


def distribution_table(records: Sequence[SignalRecord]) -> ReportTable:
    table = ReportTable("distribution", "Final-step signal distribution", list(DISTRIBUTION_COLUMNS))
    table.rows.extend(r.row() for r in records)
    return table


def ambiguity_table(pairs: Sequence[AmbiguousPair]) -> ReportTable:
    table = ReportTable("ambiguity", "Similar signals, different patches", ["first", "second", "signal_distance", "patch_iou"])
    table.rows.extend((p.first, p.second, p.signal_distance, p.patch_iou) for p in pairs)
    return table
