"""Model files: header line with config and parameter layout, then the flat parameter vector"""

import json
from pathlib import Path

import numpy as np
import structlog
import torch

from patchstack.core.constants import MODEL_SCHEMA, ModelKind
from patchstack.core.exceptions import DataError
from patchstack.estimation.network import ContactNet
from patchstack.estimation.trainer import TrainedModel
from patchstack.estimation.types import ModelConfig
from patchstack.geometry import GridSpec, Piece
from patchstack.storage.records import dumps, ensure_parent, finite_array, parse_line

logger = structlog.get_logger(__name__)


def write_model(path: Path, model: TrainedModel, config_hash: str = "") -> Path:
    path = ensure_parent(Path(path))
    state = model.net.state_dict()
    layout = [[name, list(t.shape)] for name, t in state.items()]
    flat = torch.cat([t.detach().reshape(-1).to(torch.float32) for t in state.values()])
    header = {
        "schema": MODEL_SCHEMA,
        "config_hash": config_hash,
        "kind": model.kind.value,
        "config": model.config.model_dump(mode="json"),
        "modality": model.config.modality.value,
        "encoder": model.config.encoder.value,
        "top": model.top.to_config(),
        "grid": model.grid.to_config(),
        "outputs": int(model.net.head.out_features),
        "in_channels": int(model.net.in_channels),
        "params": layout,
        "loss": [float(v) for v in model.loss_history],
    }
    with path.open("w", encoding="utf-8", newline="\n") as f:
        f.write(dumps(header) + "\n")
        # float32 -> float repr round-trips exactly
        f.write(dumps(flat.tolist()) + "\n")
    logger.info("model written", path=str(path), kind=model.kind.value, parameters=int(flat.numel()))
    return path


def load_model(path: Path) -> TrainedModel:
    path = Path(path)
    header, records = _read_model_lines(path)
    try:
        config = ModelConfig.model_validate(header["config"])
        kind = ModelKind(header["kind"])
        top = Piece.from_config(header["top"])
        grid = GridSpec.from_config(header["grid"])
        outputs = int(header["outputs"])
        in_channels = int(header["in_channels"])
        layout = [(str(name), tuple(int(s) for s in shape)) for name, shape in header["params"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"bad model header: {exc}", path=str(path), line=1) from exc

    total = sum(int(np.prod(shape)) for _, shape in layout)
    flat = finite_array(records, (total,), np.float32, path, 2, "parameters")

    net = ContactNet(in_channels, outputs, config)
    expected = {name: tuple(t.shape) for name, t in net.state_dict().items()}
    if expected != dict(layout):
        raise DataError("parameter layout does not match the model config", path=str(path), line=1)

    state = {}
    offset = 0
    for name, shape in layout:
        n = int(np.prod(shape))
        state[name] = torch.from_numpy(flat[offset:offset + n].copy()).reshape(shape)
        offset += n
    net.load_state_dict(state)
    net.eval()
    return TrainedModel(kind, config, top, grid, net, [float(v) for v in header.get("loss", [])])


def _read_model_lines(path: Path):
    """Header plus the parameter list on line 2"""
    if not path.is_file():
        raise DataError(f"file not found: {path}", path=str(path))
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise DataError("missing header", path=str(path), line=1)
    header = parse_line(lines[0], path, 1)
    if header.get("schema") != MODEL_SCHEMA:
        raise DataError(f"schema mismatch: expected {MODEL_SCHEMA!r}, got {header.get('schema')!r}", path=str(path), line=1)
    if len(lines) < 2:
        raise DataError("model file is truncated", path=str(path), line=2)
    try:
        values = json.loads(lines[1])
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed parameter line: {exc.msg}", path=str(path), line=2) from exc
    if not isinstance(values, list):
        raise DataError("parameter line is not an array", path=str(path), line=2)
    return header, values
