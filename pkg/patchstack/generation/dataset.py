from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from patchstack.geometry import DisplacementRange, GridSpec, PatchMask, Piece, Point2, footprint_mask
from patchstack.sensing import ProbeObservation, SensorParams

PairId = Tuple[str, str]


@dataclass(frozen=True)
class PairSpec:
    """A grasped (top) piece over a bottom piece, with its patch grid and sampling range"""
    top: Piece
    bottom: Piece
    grid: GridSpec
    range: DisplacementRange

    @property
    def pair_id(self) -> PairId:
        return (self.top.name, self.bottom.name)

    def footprint(self) -> np.ndarray:
        return footprint_mask(self.top.shape, self.grid)

    def to_config(self) -> dict:
        return {
            "id": list(self.pair_id),
            "top": self.top.to_config(),
            "bottom": self.bottom.to_config(),
            "grid": self.grid.to_config(),
            "range": self.range.as_list(),
        }

    @classmethod
    def from_config(cls, data: dict) -> "PairSpec":
        return cls(
            top=Piece.from_config(data["top"]),
            bottom=Piece.from_config(data["bottom"]),
            grid=GridSpec.from_config(data["grid"]),
            range=DisplacementRange.of(data["range"]),
        )


@dataclass(frozen=True, eq=False)
class Sample:
    index: int
    pair_id: PairId
    displacement: Point2
    obs: ProbeObservation
    truth: PatchMask
    stable: bool

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Sample):
            return NotImplemented
        return (
            self.index == other.index
            and self.pair_id == other.pair_id
            and self.displacement == other.displacement
            and self.obs == other.obs
            and self.truth == other.truth
            and self.stable == other.stable
        )


@dataclass
class Dataset:
    pairs: Dict[PairId, PairSpec]
    samples: List[Sample]
    params: SensorParams
    seed: Optional[int] = None
    config_hash: str = ""
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[Sample]:
        return iter(self.samples)

    def by_pair(self) -> Dict[PairId, List[Sample]]:
        groups: Dict[PairId, List[Sample]] = OrderedDict((pid, []) for pid in self.pairs)
        for s in self.samples:
            groups.setdefault(s.pair_id, []).append(s)
        return groups

    def tops(self) -> List[str]:
        return list(OrderedDict.fromkeys(pid[0] for pid in self.pairs))

    def for_top(self, top: str) -> List[Sample]:
        return [s for s in self.samples if s.pair_id[0] == top]

    def pair(self, pair_id: PairId) -> PairSpec:
        return self.pairs[tuple(pair_id)]


def stack_observations(samples: Sequence[Sample], channels) -> np.ndarray:
    """(S, T, C) float32 inputs; `channels` is a Modality"""
    return np.stack([s.obs.channels(channels) for s in samples]).astype(np.float32)
