from pathlib import Path
from typing import Iterable, List, Tuple

from patchstack.core.constants import EPISODE_SCHEMA, Outcome
from patchstack.core.exceptions import DataError
from patchstack.orchestration.episode import EpisodeLog
from patchstack.storage.records import dumps, ensure_parent, read_lines


def write_episode_log(path: Path, logs: Iterable[EpisodeLog], config_hash: str = "", meta: dict = None) -> Path:
    path = ensure_parent(Path(path))
    logs = list(logs)
    header = {"schema": EPISODE_SCHEMA, "config_hash": config_hash, "episodes": len(logs), **(meta or {})}
    with path.open("w", encoding="utf-8", newline="\n") as f:
        f.write(dumps(header) + "\n")
        for log in logs:
            f.write(dumps(log.to_record()) + "\n")
    return path


def read_episode_log(path: Path) -> Tuple[dict, List[dict]]:
    """Header and raw episode records, with the outcome field checked"""
    header, records = read_lines(Path(path), EPISODE_SCHEMA)
    valid = {o.value for o in Outcome}
    out = []
    for number, rec in records:
        if rec.get("outcome") not in valid:
            raise DataError(f"unknown outcome {rec.get('outcome')!r}", path=str(path), line=number)
        if rec.get("n_probes") != len(rec.get("probes", [])):
            raise DataError("probe count does not match probe records", path=str(path), line=number)
        out.append(rec)
    return header, out
