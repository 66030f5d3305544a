"""Tab-separated report files: provenance comment, column line, rows"""

from pathlib import Path
from typing import Any, Iterable, Sequence

from patchstack.storage.records import ensure_parent


def format_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def table_text(schema: str, config_hash: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    lines = [f"# patchstack {schema} config_hash={config_hash}", "\t".join(columns)]
    lines.extend("\t".join(format_cell(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_table(path: Path, schema: str, config_hash: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = ensure_parent(Path(path))
    path.write_text(table_text(schema, config_hash, columns, rows), encoding="utf-8")
    return path
