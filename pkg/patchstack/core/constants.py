from enum import Enum


class Modality(str, Enum):
    FT = "FT"
    TAC = "Tac"
    FT_TAC = "FT+Tac"


class EstimatorKind(str, Enum):
    ORACLE = "oracle"
    BAYES = "bayes"
    LEARNED = "learned"


class EncoderKind(str, Enum):
    POOLED = "pooled"
    LSTM = "lstm"


class ModelKind(str, Enum):
    PATCH = "patch"
    IMPLICIT = "implicit"


class Outcome(str, Enum):
    RELEASED_STABLE = "released-stable"
    RELEASED_UNSTABLE = "released-unstable"
    MAX_PROBES_EXCEEDED = "max-probes-exceeded"


class Scenario(str, Enum):
    ONE = "one"
    TWO = "two"


# File schemas
DATASET_SCHEMA = "patchstack.dataset/1"
MODEL_SCHEMA = "patchstack.model/2"
EPISODE_SCHEMA = "patchstack.episodes/1"
REPORT_SCHEMA = "patchstack.report/1"
SNAPSHOT_SCHEMA = "patchstack.belief/1"
CONFIG_SCHEMA_VERSION = "1"


# Geometry
BOUNDARY_TOL = 1e-9  # mm
DEFAULT_SPACING = 1.0  # mm


# Sensor layout: 2 fingers x 7 rows x 9 columns, XY per marker
N_FINGERS = 2
MARKER_ROWS = 7
MARKER_COLS = 9
TAC_CHANNELS = N_FINGERS * MARKER_ROWS * MARKER_COLS * 2  # 252
FT_CHANNELS = 6
MODALITY_CHANNELS = {
    Modality.FT: FT_CHANNELS,
    Modality.TAC: TAC_CHANNELS,
    Modality.FT_TAC: FT_CHANNELS + TAC_CHANNELS,
}


# Stability / filtering / policy
DEFAULT_DELTA = 0.9
DIAGNOSTIC_DELTA = 0.5
PROB_CLIP = 1e-4
LOG_ODDS_CLAMP = 12.0
D_MOVE = 3.0  # mm
MAX_PROBES = 10


# Estimation
HYPOTHESIS_STEP = 0.5  # mm
SIGMA_FLOOR = 1e-6
INPUT_COMPONENTS = 8  # whitened principal components fed to the encoder
EIGEN_FLOOR = 1e-2
MAX_REJECTION_ATTEMPTS = 10_000


# Probe offsets for fixed-position trials, in order
PROBE_PATTERN = ((0.0, 0.0), (3.0, 0.0), (0.0, 3.0), (-3.0, 0.0), (0.0, -3.0))


# Two-bottom tower: upper bottom shifted along +x
TOWER_OFFSET = 6.0  # mm


# Piece catalog stand-ins (mm, grams). Board primitives train, short/long evaluate.
BOARD_PIECES = ("circle_s", "circle_l", "square")
EVAL_BOTTOMS = ("short", "long")
TOP_PIECES = ("mushroom", "barrel", "pot")

PIECE_CATALOG = {
    "circle_s": {"shape": {"kind": "disc", "cx": 0.0, "cy": 0.0, "r": 7.5}, "mass": 20.0},
    "circle_l": {"shape": {"kind": "disc", "cx": 0.0, "cy": 0.0, "r": 12.5}, "mass": 20.0},
    "square": {
        "shape": {"kind": "polygon", "vertices": [[-7.5, -7.5], [7.5, -7.5], [7.5, 7.5], [-7.5, 7.5]]},
        "mass": 20.0,
    },
    "short": {"shape": {"kind": "disc", "cx": 0.0, "cy": 0.0, "r": 10.0}, "mass": 12.0},
    "long": {"shape": {"kind": "disc", "cx": 0.0, "cy": 0.0, "r": 10.0}, "mass": 15.0},
    "mushroom": {"shape": {"kind": "disc", "cx": 0.0, "cy": 0.0, "r": 9.0}, "mass": 10.0},
    "barrel": {"shape": {"kind": "disc", "cx": 0.0, "cy": 0.0, "r": 10.0}, "mass": 12.0},
    "pot": {"shape": {"kind": "disc", "cx": 0.0, "cy": 0.0, "r": 12.5}, "mass": 14.0},
}
