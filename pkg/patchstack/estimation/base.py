from abc import ABC, abstractmethod
from typing import List, Optional, Sequence

import numpy as np
import structlog

from patchstack.core.exceptions import ConfigurationError
from patchstack.estimation.types import PatchEstimate
from patchstack.geometry import GridSpec, PatchMask
from patchstack.sensing import ProbeObservation

logger = structlog.get_logger(__name__)


class BaseEstimator(ABC):
    """Maps one probe observation to a probabilistic patch on the grasped face's grid"""

    def __init__(self, name: str, grid: GridSpec, footprint: np.ndarray):
        self.name = name
        self.grid = grid
        self.footprint = np.asarray(footprint, dtype=bool)

    @abstractmethod
    def estimate(self, obs: ProbeObservation, truth: Optional[PatchMask] = None) -> PatchEstimate:
        pass

    def estimate_many(
        self,
        observations: Sequence[ProbeObservation],
        truths: Optional[Sequence[PatchMask]] = None,
    ) -> List[PatchEstimate]:
        truths = truths if truths is not None else [None] * len(observations)
        return [self.estimate(obs, truth) for obs, truth in zip(observations, truths)]

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r}, cells={self.grid.size})"


class OracleEstimator(BaseEstimator):
    """Returns the true contact indicator; the perfect-estimate reference"""

    def __init__(self, grid: GridSpec, footprint: np.ndarray):
        super().__init__("oracle", grid, footprint)

    def estimate(self, obs: ProbeObservation, truth: Optional[PatchMask] = None) -> PatchEstimate:
        if truth is None:
            raise ConfigurationError("the oracle estimator needs the true patch", field="estimator")
        return PatchEstimate.from_mask(truth, self.footprint)
