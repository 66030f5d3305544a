"""Dataset files: header line, then one sample per line in index order"""

from pathlib import Path
from typing import Iterator, List, Optional

import numpy as np
import structlog

from patchstack.core.constants import DATASET_SCHEMA, FT_CHANNELS, TAC_CHANNELS
from patchstack.core.exceptions import DataError
from patchstack.generation.dataset import Dataset, PairSpec, Sample
from patchstack.geometry import PatchMask, Point2
from patchstack.planning.stability import ground_truth_stable
from patchstack.sensing import ProbeObservation, SensorParams
from patchstack.storage.records import dumps, ensure_parent, finite_array, number_text, read_lines

logger = structlog.get_logger(__name__)


def header_for(dataset: Dataset, config_hash: str) -> dict:
    return {
        "schema": DATASET_SCHEMA,
        "config_hash": config_hash,
        "seed": dataset.seed,
        "sensor": dataset.params.model_dump(mode="json"),
        "pairs": [p.to_config() for p in dataset.pairs.values()],
        "count": len(dataset),
    }


def record_line(sample: Sample) -> str:
    d = sample.displacement
    return (
        '{"displacement":' + number_text(np.array([d.x, d.y]))
        + ',"ft":' + number_text(sample.obs.ft)
        + ',"index":' + str(sample.index)
        + ',"pair":' + dumps(list(sample.pair_id))
        + ',"stable":' + ("true" if sample.stable else "false")
        + ',"tac":' + number_text(sample.obs.tac)
        + ',"truth":"' + sample.truth.to_bits() + '"}'
    )


def write_dataset(path: Path, dataset: Dataset, config_hash: str = "") -> Path:
    path = ensure_parent(Path(path))
    with path.open("w", encoding="utf-8", newline="\n") as f:
        f.write(dumps(header_for(dataset, config_hash)) + "\n")
        for sample in dataset:
            f.write(record_line(sample) + "\n")
    logger.info("dataset written", path=str(path), samples=len(dataset))
    return path


def _sample(rec: dict, pairs, n_steps: int, path: Path, number: int) -> Sample:
    missing = {"displacement", "ft", "index", "pair", "stable", "tac", "truth"} - set(rec)
    if missing:
        raise DataError(f"record is missing {sorted(missing)}", path=str(path), line=number)
    try:
        index = int(rec["index"])
        pair_id = tuple(str(name) for name in rec["pair"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed index or pair: {exc}", path=str(path), line=number) from exc
    if pair_id not in pairs:
        raise DataError(f"record names unknown pair {list(pair_id)}", path=str(path), line=number)
    pair: PairSpec = pairs[pair_id]

    disp = finite_array(rec["displacement"], (2,), float, path, number, "displacement")
    tac = finite_array(rec["tac"], (n_steps, TAC_CHANNELS), np.float32, path, number, "tac")
    ft = finite_array(rec["ft"], (n_steps, FT_CHANNELS), np.float32, path, number, "ft")
    bits = rec["truth"]
    if not isinstance(bits, str) or len(bits) != pair.grid.size or set(bits) - {"0", "1"}:
        raise DataError("truth does not match the pair grid", path=str(path), line=number)
    truth = PatchMask.from_bits(pair.grid, bits)
    stable = rec["stable"]
    if not isinstance(stable, bool):
        raise DataError("stable must be true or false", path=str(path), line=number)
    if stable != ground_truth_stable(truth, pair.top.com):
        raise DataError("stable label disagrees with the true patch", path=str(path), line=number)

    return Sample(
        index=index,
        pair_id=pair_id,
        displacement=Point2(float(disp[0]), float(disp[1])),
        obs=ProbeObservation(tac=tac, ft=ft),
        truth=truth,
        stable=stable,
    )


def iter_dataset(path: Path) -> Iterator[Sample]:
    """Validated samples in file order"""
    header, records = read_lines(Path(path), DATASET_SCHEMA)
    params = _params(header, path)
    pairs = _pairs(header, path)
    for number, rec in records:
        yield _sample(rec, pairs, params.n_steps, Path(path), number)


def load_dataset(path: Path) -> Dataset:
    path = Path(path)
    header, records = read_lines(path, DATASET_SCHEMA)
    params = _params(header, path)
    pairs = _pairs(header, path)
    samples: List[Sample] = [_sample(rec, pairs, params.n_steps, path, number) for number, rec in records]
    count: Optional[int] = header.get("count")
    if count is not None and count != len(samples):
        raise DataError(f"header announces {count} samples, file holds {len(samples)}", path=str(path))
    logger.info("dataset loaded", path=str(path), samples=len(samples))
    return Dataset(
        pairs=pairs,
        samples=samples,
        params=params,
        seed=header.get("seed"),
        config_hash=header.get("config_hash", ""),
        meta={k: v for k, v in header.items() if k not in {"pairs", "sensor"}},
    )


def _params(header: dict, path) -> SensorParams:
    try:
        return SensorParams.model_validate(header["sensor"])
    except Exception as exc:
        raise DataError(f"bad sensor parameters in header: {exc}", path=str(path), line=1) from exc


def _pairs(header: dict, path) -> dict:
    try:
        pairs = [PairSpec.from_config(p) for p in header["pairs"]]
    except Exception as exc:
        raise DataError(f"bad pair metadata in header: {exc}", path=str(path), line=1) from exc
    return {p.pair_id: p for p in pairs}
