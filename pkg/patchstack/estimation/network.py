"""
Contact-patch networks.

Both encoders read a (batch, T, C) window of sensor channels. The channels
are standardized with training-set statistics and projected onto their
leading whitened principal components, so the encoder sees a few
unit-variance inputs instead of hundreds of nearly collinear ones.
`pooled` summarises each component by its time mean and final value and
runs a tanh MLP; `lstm` runs a stacked LSTM and keeps the last hidden
state. A linear head emits one logit per grid cell (or a single logit for
the stability classifier).
"""

import torch
from torch import nn

from patchstack.core.constants import EncoderKind
from patchstack.estimation.types import ModelConfig


class PooledEncoder(nn.Module):
    def __init__(self, in_channels: int, hidden_units: int, hidden_layers: int):
        super().__init__()
        layers = []
        width = 2 * in_channels
        for _ in range(hidden_layers):
            layers += [nn.Linear(width, hidden_units), nn.Tanh()]
            width = hidden_units
        self.mlp = nn.Sequential(*layers)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        features = torch.cat([x.mean(dim=1), x[:, -1, :]], dim=1)
        return self.mlp(features)


class LSTMEncoder(nn.Module):
    def __init__(self, in_channels: int, hidden_units: int, hidden_layers: int):
        super().__init__()
        self.lstm = nn.LSTM(in_channels, hidden_units, num_layers=hidden_layers, batch_first=True)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        _, (h_n, _) = self.lstm(x)
        return h_n[-1]


class ContactNet(nn.Module):
    """Standardize -> project -> encoder -> linear head (logits)"""

    def __init__(self, in_channels: int, n_outputs: int, config: ModelConfig):
        super().__init__()
        components = min(config.input_components, in_channels)
        self.register_buffer("input_mean", torch.zeros(in_channels))
        self.register_buffer("input_std", torch.ones(in_channels))
        self.register_buffer("projection", torch.eye(in_channels)[:, :components].contiguous())
        if config.encoder == EncoderKind.LSTM:
            self.encoder = LSTMEncoder(components, config.hidden_units, config.hidden_layers)
        else:
            self.encoder = PooledEncoder(components, config.hidden_units, config.hidden_layers)
        self.head = nn.Linear(config.hidden_units, n_outputs)

    @property
    def in_channels(self) -> int:
        return self.input_mean.shape[0]

    @property
    def components(self) -> int:
        return self.projection.shape[1]

    def set_normalization(self, mean: torch.Tensor, std: torch.Tensor, projection: torch.Tensor) -> None:
        with torch.no_grad():
            self.input_mean.copy_(mean)
            self.input_std.copy_(torch.where(std > 1e-8, std, torch.ones_like(std)))
            self.projection.copy_(projection)

    def standardize(self, x: torch.Tensor) -> torch.Tensor:
        return (x - self.input_mean) / self.input_std

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        z = self.standardize(x) @ self.projection
        return self.head(self.encoder(z))
