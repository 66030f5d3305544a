"""
Grid-Bayes patch estimator.

Exhaustive inversion of the forward model over a grid of displacement
hypotheses with a uniform prior. The noise-free signal of hypothesis h is
d_t * (A @ w_h), so the Gaussian log-likelihood of an observation x is

    AW_h . (sum_t d_t x_t / sigma^2) - 0.5 * sum_t d_t^2 * sum_c (AW_h / sigma)^2

up to a constant. Everything but the first dot product is precomputed.
"""

from typing import Optional

import numpy as np
import structlog

from patchstack.core.constants import Modality
from patchstack.core.exceptions import ConfigurationError
from patchstack.estimation.base import BaseEstimator
from patchstack.estimation.types import DisplacementHypothesisGrid, PatchEstimate
from patchstack.geometry import GridSpec, PatchMask, Point2, Shape2, footprint_mask, patch_grid
from patchstack.sensing import ProbeObservation, SensorParams, sensor_model

logger = structlog.get_logger(__name__)


class BayesEstimator(BaseEstimator):
    def __init__(
        self,
        top: Shape2,
        bottom: Shape2,
        hypotheses: DisplacementHypothesisGrid,
        params: SensorParams,
        com_offset: Point2 = Point2(0.0, 0.0),
        grid: Optional[GridSpec] = None,
        spacing: float = 1.0,
    ):
        grid = grid or patch_grid(top, spacing)
        super().__init__("bayes", grid, footprint_mask(top, grid))
        if len(hypotheses) == 0:
            raise ConfigurationError("hypothesis grid is empty", field="hypotheses")

        self.hypotheses = hypotheses
        self.model = sensor_model(params)

        q = grid.cell_centers()
        h = hypotheses.points
        on_bottom = bottom.contains_xy((q[None, :, :] + h[:, None, :]).reshape(-1, 2)).reshape(len(h), -1)
        self.masks = on_bottom & self.footprint[None, :]

        counts = self.masks.sum(axis=1)
        sums = self.masks.astype(float) @ q
        bx, by = params.centroid_bias
        k = params.stiffness_z
        wrench = np.zeros((len(h), 3))
        hit = counts > 0
        mean = sums[hit] / counts[hit, None]
        wrench[hit, 0] = -k
        wrench[hit, 1] = -k * (mean[:, 1] + by - com_offset.y)
        wrench[hit, 2] = k * (mean[:, 0] + bx - com_offset.x)

        sigma2 = self.model.likelihood_sigma() ** 2
        self._aw_scaled = (wrench @ self.model.readout.T) / sigma2[None, :]
        aw = wrench @ self.model.readout.T
        self._quad = 0.5 * float(self.model.depth @ self.model.depth) * np.sum(aw * aw / sigma2[None, :], axis=1)

        logger.debug("bayes table ready", hypotheses=len(h), cells=grid.size)

    def log_likelihood(self, obs: ProbeObservation) -> np.ndarray:
        x = obs.channels(Modality.FT_TAC).astype(float)
        if x.shape[0] != self.model.n_steps:
            raise ConfigurationError(
                f"observation has {x.shape[0]} steps, sensor model has {self.model.n_steps}", field="sensor"
            )
        s1 = self.model.depth @ x
        return self._aw_scaled @ s1 - self._quad

    def posterior(self, obs: ProbeObservation) -> np.ndarray:
        ll = self.log_likelihood(obs)
        w = np.exp(ll - ll.max())
        return w / w.sum()

    def estimate(self, obs: ProbeObservation, truth: Optional[PatchMask] = None) -> PatchEstimate:
        post = self.posterior(obs)
        probs = np.clip(post @ self.masks, 0.0, 1.0)
        return PatchEstimate(self.grid, probs, self.footprint)


def estimate_bayes(
    obs: ProbeObservation,
    top: Shape2,
    bottom: Shape2,
    hyp: DisplacementHypothesisGrid,
    params: SensorParams,
    com_offset: Point2 = Point2(0.0, 0.0),
    spacing: float = 1.0,
) -> PatchEstimate:
    """One-shot form of BayesEstimator; build the estimator directly to reuse its table"""
    return BayesEstimator(top, bottom, hyp, params, com_offset, spacing=spacing).estimate(obs)
