"""
Synthetic tactile + force/torque forward model.

A probe presses the grasped object down by `press_depth` under a stiffness
controller. Pressure is uniform over the contact cells, so the wrench is
fully determined by whether there is contact and by the contact-cell
centroid relative to the CoM projection:

    Fz(t) = -k * d(t)
    Tx(t) =  Fz(t) * (ybar - com_y)
    Ty(t) = -Fz(t) * (xbar - com_x)

The gel markers read a low-rank linear field of (Fz, Tx, Ty): uniform
vertical shear from Fz, differential vertical shear between the fingers
from Tx, and an in-plane rotation field from Ty. Patches with equal
centroid therefore give identical noise-free signals.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from patchstack.core.constants import (
    FT_CHANNELS,
    MARKER_COLS,
    MARKER_ROWS,
    MODALITY_CHANNELS,
    N_FINGERS,
    SIGMA_FLOOR,
    TAC_CHANNELS,
    Modality,
)
from patchstack.core.exceptions import ConfigurationError
from patchstack.core.rng import derive_rng
from patchstack.geometry import PatchMask, Point2


class SensorParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    stiffness_z: float = Field(15.0, ge=0, description="N/mm")
    press_depth: float = Field(1.5, gt=0, description="mm")
    duration: float = Field(2.0, gt=0, description="s")
    rate: float = Field(10.0, gt=0, description="Hz")
    marker_pitch: float = Field(2.1, gt=0, description="mm between gel markers")
    tactile_gain_force: float = Field(0.01, description="marker units per N")
    tactile_gain_moment: float = Field(0.002, description="marker units per N*mm")
    noise_sigma_force: float = Field(0.05, ge=0, description="N")
    noise_sigma_torque: float = Field(0.5, ge=0, description="N*mm")
    noise_sigma_tac: float = Field(0.02, ge=0, description="marker units")
    centroid_bias: Tuple[float, float] = Field((0.0, 0.0), description="mm shift of the pressure centre")
    seed: int = 0

    @property
    def n_steps(self) -> int:
        return int(round(self.duration * self.rate))

    def noiseless(self) -> "SensorParams":
        return self.model_copy(update={"noise_sigma_force": 0.0, "noise_sigma_torque": 0.0, "noise_sigma_tac": 0.0})


@dataclass(frozen=True, eq=False)
class ProbeObservation:
    """T steps of tactile (252) and F/T (6) vectors, float32"""
    tac: np.ndarray
    ft: np.ndarray

    def __post_init__(self):
        tac = np.asarray(self.tac, dtype=np.float32)
        ft = np.asarray(self.ft, dtype=np.float32)
        if tac.ndim != 2 or tac.shape[1] != TAC_CHANNELS:
            raise ConfigurationError(f"tactile series must be (T, {TAC_CHANNELS}), got {tac.shape}")
        if ft.ndim != 2 or ft.shape[1] != FT_CHANNELS:
            raise ConfigurationError(f"F/T series must be (T, {FT_CHANNELS}), got {ft.shape}")
        if tac.shape[0] != ft.shape[0]:
            raise ConfigurationError("tactile and F/T series differ in length")
        if not (np.all(np.isfinite(tac)) and np.all(np.isfinite(ft))):
            raise ConfigurationError("observation contains non-finite values")
        object.__setattr__(self, "tac", tac)
        object.__setattr__(self, "ft", ft)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProbeObservation):
            return NotImplemented
        return np.array_equal(self.tac, other.tac) and np.array_equal(self.ft, other.ft)

    @property
    def n_steps(self) -> int:
        return self.ft.shape[0]

    def channels(self, modality: Modality = Modality.FT_TAC) -> np.ndarray:
        """(T, C) input series for a modality; FT+Tac is F/T first"""
        if modality == Modality.FT:
            return self.ft
        if modality == Modality.TAC:
            return self.tac
        return np.concatenate([self.ft, self.tac], axis=1)

    def final_wrench(self) -> Tuple[float, float, float]:
        """(Fz, Tx, Ty) at the last step"""
        last = self.ft[-1]
        return float(last[2]), float(last[3]), float(last[4])

    @classmethod
    def zeros(cls, n_steps: int) -> "ProbeObservation":
        return cls(np.zeros((n_steps, TAC_CHANNELS)), np.zeros((n_steps, FT_CHANNELS)))


class SensorModel:
    """Precomputed readout for one SensorParams"""

    def __init__(self, params: SensorParams):
        if params.n_steps < 1:
            raise ConfigurationError("duration * rate must give at least one step", field="rate")
        self.params = params
        self.n_steps = params.n_steps
        self.depth = params.press_depth * np.arange(1, self.n_steps + 1) / self.n_steps
        self.readout = self._build_readout()
        self.sigma = self._build_sigma()

    def marker_positions(self) -> np.ndarray:
        """(fingers, rows, cols, 3) of (finger sign, a, b): a along world x, b vertical"""
        p = self.params.marker_pitch
        a = (np.arange(MARKER_COLS) - (MARKER_COLS - 1) / 2) * p
        b = (np.arange(MARKER_ROWS) - (MARKER_ROWS - 1) / 2) * p
        out = np.zeros((N_FINGERS, MARKER_ROWS, MARKER_COLS, 3))
        for finger, sign in enumerate((1.0, -1.0)):
            out[finger, :, :, 0] = sign
            out[finger, :, :, 1] = a[None, :]
            out[finger, :, :, 2] = b[:, None]
        return out

    def _build_readout(self) -> np.ndarray:
        """(258, 3) map from (Fz, Tx, Ty) to FT+Tac channels"""
        g1 = self.params.tactile_gain_force
        g2 = self.params.tactile_gain_moment
        pitch = self.params.marker_pitch

        ft = np.zeros((FT_CHANNELS, 3))
        ft[2, 0] = 1.0
        ft[3, 1] = 1.0
        ft[4, 2] = 1.0

        m = self.marker_positions().reshape(-1, 3)
        sign, a, b = m[:, 0], m[:, 1], m[:, 2]
        tac = np.zeros((len(m), 2, 3))
        tac[:, 0, 2] = g2 * sign * (-b / pitch)
        tac[:, 1, 0] = g1
        tac[:, 1, 1] = g2 * sign
        tac[:, 1, 2] = g2 * sign * (a / pitch)
        return np.concatenate([ft, tac.reshape(TAC_CHANNELS, 3)], axis=0)

    def _build_sigma(self) -> np.ndarray:
        p = self.params
        ft = [p.noise_sigma_force] * 3 + [p.noise_sigma_torque] * 3
        return np.array(ft + [p.noise_sigma_tac] * TAC_CHANNELS, dtype=float)

    def likelihood_sigma(self) -> np.ndarray:
        return np.maximum(self.sigma, SIGMA_FLOOR)

    def unit_wrench(self, patch: PatchMask, com_offset: Point2) -> np.ndarray:
        """(Fz, Tx, Ty) per mm of press depth"""
        if patch.count == 0:
            return np.zeros(3)
        k = self.params.stiffness_z
        bx, by = self.params.centroid_bias
        xbar, ybar = patch.points().mean(axis=0)
        xbar += bx
        ybar += by
        return np.array([-k, -k * (ybar - com_offset.y), k * (xbar - com_offset.x)])

    def clean_signal(self, unit_wrench: np.ndarray) -> np.ndarray:
        """(T, 258) noise-free FT+Tac series"""
        return self.depth[:, None] * (self.readout @ unit_wrench)[None, :]

    def observe(self, unit_wrench: np.ndarray, rng: Optional[np.random.Generator]) -> ProbeObservation:
        signal = self.clean_signal(unit_wrench)
        if rng is not None and np.any(self.sigma > 0):
            signal = signal + rng.standard_normal(signal.shape) * self.sigma[None, :]
        return ProbeObservation(tac=signal[:, FT_CHANNELS:], ft=signal[:, :FT_CHANNELS])


@lru_cache(maxsize=32)
def sensor_model(params: SensorParams) -> SensorModel:
    return SensorModel(params)


def simulate_probe(
    patch: PatchMask,
    com_offset: Point2,
    params: SensorParams,
    rng: Union[np.random.Generator, int, None] = None,
) -> ProbeObservation:
    """
    Simulate one press. Deterministic for a given seed: `rng` may be a
    Generator, an integer seed, or None to use `params.seed`.
    """
    if not isinstance(rng, np.random.Generator):
        rng = derive_rng(params.seed if rng is None else rng)
    model = sensor_model(params)
    return model.observe(model.unit_wrench(patch, com_offset), rng)


def n_channels(modality: Modality) -> int:
    return MODALITY_CHANNELS[modality]
