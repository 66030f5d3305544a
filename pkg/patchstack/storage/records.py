"""Shared line-delimited JSON plumbing: headers, number formatting, line readers"""

import json
from pathlib import Path
from typing import Any, Iterator, Tuple

import numpy as np

from patchstack.core.exceptions import ConfigurationError, DataError


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def number_text(values: np.ndarray) -> str:
    """JSON array text of values with 9 significant digits, nested like the array"""
    values = np.asarray(values)
    if values.ndim == 0:
        return "%.9g" % float(values)
    text = np.char.mod("%.9g", values.astype(np.float64))
    return _nest(text)


def _nest(text: np.ndarray) -> str:
    if text.ndim == 1:
        return "[" + ",".join(text.tolist()) + "]"
    return "[" + ",".join(_nest(row) for row in text) + "]"


def ensure_parent(path: Path) -> Path:
    path = Path(path)
    if not path.parent.is_dir():
        raise ConfigurationError(f"output directory does not exist: {path.parent}", field="out")
    return path


def read_lines(path: Path, schema: str) -> Tuple[dict, Iterator[Tuple[int, dict]]]:
    """Header object and an iterator of (1-based line number, record)"""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"file not found: {path}", path=str(path))
    handle = path.open("r", encoding="utf-8")
    first = handle.readline()
    if not first.strip():
        handle.close()
        raise DataError("missing header", path=str(path), line=1)
    header = parse_line(first, path, 1)
    if header.get("schema") != schema:
        handle.close()
        raise DataError(f"schema mismatch: expected {schema!r}, got {header.get('schema')!r}", path=str(path), line=1)

    def records() -> Iterator[Tuple[int, dict]]:
        with handle:
            for number, line in enumerate(handle, start=2):
                if not line.strip():
                    continue
                yield number, parse_line(line, path, number)

    return header, records()


def parse_line(line: str, path: Path, number: int) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed record: {exc.msg}", path=str(path), line=number) from exc
    if not isinstance(obj, dict):
        raise DataError("record is not an object", path=str(path), line=number)
    return obj


def finite_array(value: Any, shape: Tuple[int, ...], dtype, path: Path, number: int, name: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=dtype)
    except (TypeError, ValueError) as exc:
        raise DataError(f"field {name!r} is not numeric", path=str(path), line=number) from exc
    if arr.shape != shape:
        raise DataError(f"field {name!r} has shape {arr.shape}, expected {shape}", path=str(path), line=number)
    if not np.all(np.isfinite(arr)):
        raise DataError(f"field {name!r} has non-finite values", path=str(path), line=number)
    return arr
