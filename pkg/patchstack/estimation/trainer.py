"""
Training and inference for the learned contact-patch model and the
single-unit stability classifier.

Optimization is plain SGD with a fixed step over mean binary
cross-entropy (all cells, all samples). Runs are deterministic for a given
ModelConfig.seed: parameters are initialized after torch.manual_seed and
minibatches are drawn from a seeded torch.Generator. The head bias starts
at the training-set log-odds of each output.
"""

import copy
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog
import torch
from torch import nn

from patchstack.core.constants import EIGEN_FLOOR, PROB_CLIP, ModelKind
from patchstack.core.exceptions import DataError, InputError, NumericError
from patchstack.estimation.base import BaseEstimator
from patchstack.estimation.network import ContactNet
from patchstack.estimation.types import ModelConfig, PatchEstimate
from patchstack.generation.dataset import Sample, stack_observations
from patchstack.geometry import GridSpec, PatchMask, Piece, footprint_mask
from patchstack.sensing import ProbeObservation

logger = structlog.get_logger(__name__)


@dataclass
class TrainedModel:
    kind: ModelKind
    config: ModelConfig
    top: Piece
    grid: GridSpec
    net: ContactNet
    loss_history: List[float] = field(default_factory=list)

    @property
    def footprint(self) -> np.ndarray:
        return footprint_mask(self.top.shape, self.grid)

    @property
    def in_channels(self) -> int:
        return self.net.in_channels

    def inputs(self, observations: Sequence[ProbeObservation]) -> torch.Tensor:
        """(S, T, C) float32 batch; C must match the network input width"""
        arrays = []
        for obs in observations:
            x = obs.channels(self.config.modality)
            if x.shape[1] != self.in_channels:
                raise InputError(self.in_channels, x.shape[1])
            arrays.append(x)
        return torch.from_numpy(np.stack(arrays).astype(np.float32))


def _single_top(samples: Sequence[Sample]) -> str:
    if not samples:
        raise DataError("cannot train on an empty dataset")
    tops = {s.pair_id[0] for s in samples}
    if len(tops) != 1:
        raise DataError(f"training needs samples of a single top piece, got {sorted(tops)}")
    grids = {s.truth.grid for s in samples}
    if len(grids) != 1:
        raise DataError("training samples use different patch grids")
    return tops.pop()


def input_statistics(x: torch.Tensor, components: int) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """
    Channel mean/std over all samples and steps, and the (C, k) map onto the
    k leading principal components of the standardized channels, scaled to
    unit variance. Each component's largest entry is positive.
    """
    flat = x.reshape(-1, x.shape[2])
    mean = flat.mean(dim=0)
    std = flat.std(dim=0, correction=0)
    k = min(components, x.shape[2])
    projection = torch.eye(x.shape[2])[:, :k]

    z = (flat - mean) / torch.where(std > 1e-8, std, torch.ones_like(std))
    if torch.isfinite(z).all():
        eigvals, eigvecs = torch.linalg.eigh((z.T @ z / z.shape[0]).double())
        vals = eigvals.flip(0)[:k]
        vecs = eigvecs.flip(1)[:, :k]
        signs = torch.sign(vecs[vecs.abs().argmax(dim=0), torch.arange(k)])
        vecs = vecs * torch.where(signs == 0, torch.ones_like(signs), signs)
        projection = (vecs / torch.sqrt(vals.clamp_min(EIGEN_FLOOR))).float()
    return mean, std, projection


def _fit(net: ContactNet, x: torch.Tensor, y: torch.Tensor, config: ModelConfig) -> List[float]:
    net.set_normalization(*input_statistics(x, net.components))
    with torch.no_grad():
        rate = y.mean(dim=0).clamp(PROB_CLIP, 1.0 - PROB_CLIP)
        net.head.bias.copy_(torch.log(rate / (1.0 - rate)))

    optimizer = torch.optim.SGD(net.parameters(), lr=config.learning_rate)
    loss_fn = nn.BCEWithLogitsLoss()
    generator = torch.Generator().manual_seed(config.seed)
    n = x.shape[0]
    history: List[float] = []

    for epoch in range(1, config.epochs + 1):
        order = torch.randperm(n, generator=generator)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            optimizer.zero_grad()
            loss = loss_fn(net(x[idx]), y[idx])
            if not torch.isfinite(loss):
                logger.error("training diverged", epoch=epoch, learning_rate=config.learning_rate)
                raise NumericError("loss is not finite", learning_rate=config.learning_rate, epoch=epoch)
            loss.backward()
            optimizer.step()
            total += float(loss.detach()) * len(idx)
        history.append(total / n)
        if epoch == 1 or epoch == config.epochs or epoch % 10 == 0:
            logger.info("epoch finished", epoch=epoch, loss=round(history[-1], 6))
    return history


def train(samples: Sequence[Sample], config: ModelConfig, top: Piece) -> TrainedModel:
    """Fit a contact-patch model for one grasped piece"""
    samples = list(samples)
    name = _single_top(samples)
    grid = samples[0].truth.grid

    torch.manual_seed(config.seed)
    x = torch.from_numpy(stack_observations(samples, config.modality))
    y = torch.from_numpy(np.stack([s.truth.contact for s in samples]).astype(np.float32))
    net = ContactNet(x.shape[2], grid.size, config)

    logger.info("training patch model", top=name, samples=len(samples), modality=config.modality.value)
    history = _fit(net, x, y, config)
    net.eval()
    return TrainedModel(ModelKind.PATCH, config, top, grid, net, history)


def train_implicit(samples: Sequence[Sample], config: ModelConfig, top: Piece) -> TrainedModel:
    """Stability classifier: same encoder, single sigmoid unit on the stable label"""
    samples = list(samples)
    name = _single_top(samples)
    grid = samples[0].truth.grid

    torch.manual_seed(config.seed)
    x = torch.from_numpy(stack_observations(samples, config.modality))
    y = torch.tensor([[1.0 if s.stable else 0.0] for s in samples], dtype=torch.float32)
    net = ContactNet(x.shape[2], 1, config)

    logger.info("training implicit model", top=name, samples=len(samples), modality=config.modality.value)
    history = _fit(net, x, y, config)
    net.eval()
    return TrainedModel(ModelKind.IMPLICIT, config, top, grid, net, history)


def predict_probs(model: TrainedModel, observations: Sequence[ProbeObservation]) -> np.ndarray:
    """(S, outputs) sigmoid outputs inside [PROB_CLIP, 1 - PROB_CLIP]"""
    x = model.inputs(observations)
    with torch.no_grad():
        p = torch.sigmoid(model.net(x).double())
    return np.clip(p.numpy(), PROB_CLIP, 1.0 - PROB_CLIP)


def predict(model: TrainedModel, obs: ProbeObservation) -> PatchEstimate:
    probs = predict_probs(model, [obs])[0]
    return PatchEstimate(model.grid, probs, model.footprint)


def predict_stability(model: TrainedModel, obs: ProbeObservation) -> float:
    return float(predict_probs(model, [obs])[0, 0])


def check_bce_gradients(
    model: TrainedModel,
    inputs: torch.Tensor,
    targets: torch.Tensor,
    n_coords: int = 100,
    eps: float = 1e-5,
    seed: int = 0,
) -> float:
    """
    Max relative error between autograd and central finite differences of
    the mean BCE loss, over n_coords random parameter entries (float64).
    """
    net = copy.deepcopy(model.net).double()
    x = inputs.double()
    y = targets.double()
    loss_fn = nn.BCEWithLogitsLoss()

    params = [p for p in net.parameters() if p.requires_grad]
    net.zero_grad()
    loss_fn(net(x), y).backward()
    analytic = torch.cat([p.grad.reshape(-1) for p in params]).detach()

    sizes = [p.numel() for p in params]
    offsets = np.cumsum([0] + sizes)
    rng = np.random.default_rng(seed)
    coords = rng.choice(int(offsets[-1]), size=min(n_coords, int(offsets[-1])), replace=False)

    worst = 0.0
    with torch.no_grad():
        for c in coords:
            k = int(np.searchsorted(offsets, c, side="right") - 1)
            flat = params[k].view(-1)
            j = int(c - offsets[k])
            original = float(flat[j])
            flat[j] = original + eps
            up = float(loss_fn(net(x), y))
            flat[j] = original - eps
            down = float(loss_fn(net(x), y))
            flat[j] = original
            numeric = (up - down) / (2 * eps)
            a = float(analytic[c])
            denom = max(abs(a), abs(numeric), 1e-5)
            worst = max(worst, abs(a - numeric) / denom)
    return worst


class LearnedEstimator(BaseEstimator):
    def __init__(self, model: TrainedModel):
        if model.kind != ModelKind.PATCH:
            raise DataError("a stability classifier cannot estimate patches")
        super().__init__(f"learned[{model.config.modality.value}]", model.grid, model.footprint)
        self.model = model

    def estimate(self, obs: ProbeObservation, truth: Optional[PatchMask] = None) -> PatchEstimate:
        return predict(self.model, obs)

    def estimate_many(self, observations, truths=None) -> List[PatchEstimate]:
        if not observations:
            return []
        probs = predict_probs(self.model, observations)
        return [PatchEstimate(self.grid, p, self.footprint) for p in probs]

