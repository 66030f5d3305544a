# patchstack/core/config.py
import hashlib
import json
from functools import lru_cache
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from patchstack.core.constants import (
    BOARD_PIECES,
    CONFIG_SCHEMA_VERSION,
    D_MOVE,
    DEFAULT_DELTA,
    DEFAULT_SPACING,
    DIAGNOSTIC_DELTA,
    EVAL_BOTTOMS,
    HYPOTHESIS_STEP,
    MAX_PROBES,
    PIECE_CATALOG,
    TOP_PIECES,
    EstimatorKind,
    Modality,
    Scenario,
)
from patchstack.core.exceptions import ConfigurationError
from patchstack.estimation.types import ModelConfig
from patchstack.geometry import ConvexPolygon, Disc, DisplacementRange, Piece, Point2, Shape2
from patchstack.sensing.sensor_sim import SensorParams


class Settings(BaseSettings):
    """Process-level knobs; nothing here changes what a command writes"""
    PROJECT_NAME: str = "PatchStack"
    VERSION: str = "1.0.0"

    # Logging
    LOG_LEVEL: str = Field(default="INFO")
    LOG_FORMAT: Literal["console", "json"] = Field(default="console")

    model_config = SettingsConfigDict(
        env_prefix="PATCHSTACK_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore"
    )


@lru_cache
def get_settings() -> Settings:
    return Settings()


# Shapes ---------------------------------------------------------------------

class DiscConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["disc"] = "disc"
    cx: float = 0.0
    cy: float = 0.0
    r: float = Field(gt=0)

    def to_shape(self) -> Shape2:
        return Disc(Point2(self.cx, self.cy), self.r)


class PolygonConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["polygon"] = "polygon"
    vertices: List[Tuple[float, float]] = Field(min_length=3)

    def to_shape(self) -> Shape2:
        return ConvexPolygon.from_xy(self.vertices)


ShapeConfig = Annotated[Union[DiscConfig, PolygonConfig], Field(discriminator="kind")]


class PieceConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    shape: ShapeConfig
    com: Tuple[float, float] = (0.0, 0.0)
    mass: float = Field(1.0, gt=0, description="grams")

    def to_piece(self, name: str) -> Piece:
        return Piece(name=name, shape=self.shape.to_shape(), com=Point2(*self.com), mass=self.mass)


def default_pieces() -> Dict[str, PieceConfig]:
    return {name: PieceConfig.model_validate(data) for name, data in PIECE_CATALOG.items()}


class RangeConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def to_range(self) -> DisplacementRange:
        return DisplacementRange(self.x_min, self.x_max, self.y_min, self.y_max)


# Command sections -------------------------------------------------------------

class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", protected_namespaces=())


class DatasetSection(_Section):
    out: str = "dataset.jsonl"
    tops: List[str] = Field(default_factory=lambda: ["pot"])
    bottoms: List[str] = Field(default_factory=lambda: list(BOARD_PIECES))
    n_per_pair: int = Field(2000, ge=0)
    spacing: float = Field(DEFAULT_SPACING, gt=0)
    range: Optional[RangeConfig] = None


class TrainSection(_Section):
    dataset: str = "dataset.jsonl"
    tops: List[str] = Field(default_factory=list, description="empty: every top in the dataset")
    modalities: List[Modality] = Field(default_factory=lambda: [Modality.FT_TAC])
    model: ModelConfig = Field(default_factory=ModelConfig)
    implicit: bool = True


class EvalSection(_Section):
    dataset: str = "eval.jsonl"
    models: List[str] = Field(default_factory=list, description="empty: every model-*.jsonl in the output dir")
    bayes: bool = True
    hypothesis_step: float = Field(HYPOTHESIS_STEP, gt=0)
    deltas: List[float] = Field(default_factory=lambda: [DEFAULT_DELTA, DIAGNOSTIC_DELTA])

    @field_validator("deltas")
    @classmethod
    def _open_unit(cls, v: List[float]) -> List[float]:
        if not v or any(not 0.0 < d < 1.0 for d in v):
            raise ValueError("deltas must be non-empty and inside (0, 1)")
        return v


class EpisodesSection(_Section):
    tops: List[str] = Field(default_factory=lambda: list(TOP_PIECES))
    bottoms: List[str] = Field(default_factory=lambda: list(EVAL_BOTTOMS))
    scenarios: List[Scenario] = Field(default_factory=lambda: [Scenario.ONE, Scenario.TWO])
    n_episodes: int = Field(10, ge=0)
    max_probes: int = Field(MAX_PROBES, ge=0)
    delta: float = Field(DEFAULT_DELTA, gt=0, lt=1)
    d_move: float = Field(D_MOVE, gt=0)
    spacing: float = Field(DEFAULT_SPACING, gt=0)
    estimator: EstimatorKind = EstimatorKind.BAYES
    hypothesis_step: float = Field(HYPOTHESIS_STEP, gt=0)
    models: Dict[str, str] = Field(default_factory=dict, description="top -> model file for the learned estimator")
    implicit_models: Dict[str, str] = Field(default_factory=dict, description="top -> implicit model file")
    baseline: bool = True
    n_trials: int = Field(100, ge=0, description="fixed-position trials per pair for the accuracy-vs-n table")
    n_values: List[int] = Field(default_factory=lambda: [1, 2, 3])
    belief_n_max: int = Field(5, ge=1)
    snapshots: bool = False
    aggregated_verdict: bool = Field(False, description="judge releases on the belief under the face instead of the current estimate")

    @field_validator("n_values")
    @classmethod
    def _positive(cls, v: List[int]) -> List[int]:
        if any(n < 1 for n in v):
            raise ValueError("n_values must be >= 1")
        return sorted(set(v))


class PlotSection(_Section):
    top: str = "pot"
    bottom: str = "circle_l"
    n_samples: int = Field(2000, ge=0)
    spacing: float = Field(DEFAULT_SPACING, gt=0)
    range: Optional[RangeConfig] = None
    ambiguous_k: int = Field(10, ge=0)
    dataset: Optional[str] = Field(None, description="read records from a dataset instead of simulating")


class RunConfig(_Section):
    """Everything a command needs; loaded from one JSON file plus flag overrides"""
    schema_version: str = CONFIG_SCHEMA_VERSION
    seed: Optional[int] = None
    jobs: int = Field(1, ge=1)
    out: str = "."
    pieces: Dict[str, PieceConfig] = Field(default_factory=default_pieces)
    sensor: SensorParams = Field(default_factory=SensorParams)
    dataset: DatasetSection = Field(default_factory=DatasetSection)
    train: TrainSection = Field(default_factory=TrainSection)
    eval: EvalSection = Field(default_factory=EvalSection)
    episodes: EpisodesSection = Field(default_factory=EpisodesSection)
    plot: PlotSection = Field(default_factory=PlotSection)

    @field_validator("schema_version")
    @classmethod
    def _schema(cls, v: str) -> str:
        if v != CONFIG_SCHEMA_VERSION:
            raise ValueError(f"unsupported config schema_version {v!r}, expected {CONFIG_SCHEMA_VERSION!r}")
        return v

    @model_validator(mode="after")
    def _known_pieces(self) -> "RunConfig":
        names = set(self.dataset.tops) | set(self.dataset.bottoms) | set(self.train.tops)
        names |= set(self.episodes.tops) | set(self.episodes.bottoms) | {self.plot.top, self.plot.bottom}
        unknown = sorted(names - set(self.pieces))
        if unknown:
            raise ValueError(f"unknown pieces: {', '.join(unknown)}")
        return self

    def piece(self, name: str) -> Piece:
        if name not in self.pieces:
            raise ConfigurationError(f"unknown piece {name!r}", field="pieces")
        return self.pieces[name].to_piece(name)

    def out_dir(self) -> Path:
        return Path(self.out)

    def resolve(self, path: str) -> Path:
        """Relative paths are taken inside the output directory"""
        p = Path(path)
        return p if p.is_absolute() else self.out_dir() / p

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigurationError("this command needs a seed (--seed or \"seed\" in the config)", field="seed")
        return self.seed


def _validation_message(exc: ValidationError) -> str:
    first = exc.errors()[0]
    where = ".".join(str(p) for p in first.get("loc", ())) or "config"
    return f"{where}: {first.get('msg', 'invalid value')}"


def validated(model_cls: type, data: Any) -> Any:
    """Validate data into a pydantic model, raising ConfigurationError"""
    try:
        return model_cls.model_validate(data)
    except ValidationError as exc:
        raise ConfigurationError(_validation_message(exc), field=model_cls.__name__) from exc


def load_run_config(
    path: Optional[str] = None,
    seed: Optional[int] = None,
    jobs: Optional[int] = None,
    out: Optional[str] = None,
) -> RunConfig:
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ConfigurationError(f"config file not found: {path}", field="config") from exc
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config file is not valid JSON: {exc}", field="config") from exc
        if not isinstance(data, dict):
            raise ConfigurationError("config file must hold a JSON object", field="config")

    for key, value in (("seed", seed), ("jobs", jobs), ("out", out)):
        if value is not None:
            data[key] = value
    return validated(RunConfig, data)


def config_hash(cfg: RunConfig) -> str:
    """16 hex chars of SHA-256 over the canonical config; worker count and output dir excluded"""
    payload = cfg.model_dump(mode="json", exclude={"jobs", "out"})
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]
