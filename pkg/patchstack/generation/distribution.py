"""Per-sample signal summaries for distribution plots, and the ambiguity finder"""

from dataclasses import dataclass
from typing import Iterable, List, Optional

import numpy as np

from patchstack.core.constants import DEFAULT_SPACING
from patchstack.estimation.metrics import mask_iou
from patchstack.generation.dataset import Sample
from patchstack.generation.dataset_generator import generate, make_pair
from patchstack.geometry import DisplacementRange, PatchMask, Piece
from patchstack.sensing import SensorParams

COLUMNS = ("index", "x", "y", "max_abs_tac_x", "max_abs_tac_y", "tx", "ty", "fz", "contact_cells", "stable")


@dataclass(frozen=True, eq=False)
class SignalRecord:
    index: int
    x: float
    y: float
    max_abs_tac_x: float
    max_abs_tac_y: float
    tx: float
    ty: float
    fz: float
    truth: PatchMask
    stable: bool

    def row(self) -> tuple:
        return (
            self.index, self.x, self.y, self.max_abs_tac_x, self.max_abs_tac_y,
            self.tx, self.ty, self.fz, self.truth.count, int(self.stable),
        )

    def features(self) -> np.ndarray:
        return np.array([self.max_abs_tac_x, self.max_abs_tac_y, self.tx, self.ty, self.fz])

    @classmethod
    def from_sample(cls, sample: Sample) -> "SignalRecord":
        tac = sample.obs.tac[-1].reshape(-1, 2)
        fz, tx, ty = sample.obs.final_wrench()
        return cls(
            index=sample.index,
            x=sample.displacement.x,
            y=sample.displacement.y,
            max_abs_tac_x=float(np.abs(tac[:, 0]).max()),
            max_abs_tac_y=float(np.abs(tac[:, 1]).max()),
            tx=tx,
            ty=ty,
            fz=fz,
            truth=sample.truth,
            stable=sample.stable,
        )


def signal_distribution_report(
    top: Piece,
    bottom: Piece,
    n_samples: int,
    params: SensorParams,
    seed: int = 0,
    displacement_range: Optional[DisplacementRange] = None,
    spacing: float = DEFAULT_SPACING,
    jobs: int = 1,
) -> List[SignalRecord]:
    """Final-step signal summary for n contact samples of one pair"""
    pair = make_pair(top, bottom, spacing, displacement_range)
    dataset = generate([pair], n_samples, params, seed, jobs=jobs)
    return [SignalRecord.from_sample(s) for s in dataset]


@dataclass(frozen=True)
class AmbiguousPair:
    first: int
    second: int
    signal_distance: float
    patch_iou: float


def find_ambiguous_pairs(records: Iterable[SignalRecord], k: int = 10, max_iou: float = 0.5) -> List[AmbiguousPair]:
    """
    The k record pairs with the closest standardized final-step signals
    whose true patches overlap with IoU below max_iou.
    """
    records = list(records)
    if k <= 0 or len(records) < 2:
        return []
    feats = np.stack([r.features() for r in records])
    std = feats.std(axis=0)
    feats = (feats - feats.mean(axis=0)) / np.where(std > 1e-12, std, 1.0)

    sq = np.sum(feats * feats, axis=1)
    gram = np.maximum(sq[:, None] + sq[None, :] - 2.0 * feats @ feats.T, 0.0)
    i, j = np.triu_indices(len(records), k=1)
    dist = np.sqrt(gram[i, j])
    order = np.argsort(dist, kind="stable")

    found: List[AmbiguousPair] = []
    for n in order:
        a, b = records[i[n]], records[j[n]]
        overlap = mask_iou(a.truth.contact, b.truth.contact)
        if overlap < max_iou:
            found.append(AmbiguousPair(a.index, b.index, float(dist[n]), overlap))
            if len(found) == k:
                break
    return found
