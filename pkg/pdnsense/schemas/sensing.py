"""Sensor, actuator and trace-set schemas."""

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .enums import PhaseModel

# --- Hardware Schemas ---


class MonitorBlock(BaseModel):
    """One actuator/sensor pair of the verifier mesh."""

    model_config = ConfigDict(frozen=True)

    id: int = Field(..., ge=0)
    sensor_node: str
    actuator_node: str


class SensorModel(BaseModel):
    """Tapped delay-line TDC."""

    model_config = ConfigDict(frozen=True)

    taps: int = Field(default=64, ge=2, description="Delay-line length")
    gain: float = Field(default=1000.0, gt=0, description="Codes per volt")
    v_nominal: float = Field(default=0.85, description="Voltage that reads as base_code (V)")
    noise_sigma: float = Field(default=0.5e-3, ge=0, description="Gaussian voltage noise (V)")
    base_code: int = Field(default=32, ge=0)

    @model_validator(mode="after")
    def base_within_taps(self) -> "SensorModel":
        if self.base_code > self.taps:
            raise ValueError("base_code must lie in [0, taps]")
        return self


class ActuatorModel(BaseModel):
    """Power-waster drive."""

    model_config = ConfigDict(frozen=True)

    current_amplitude: float = Field(default=0.05, gt=0, description="Fundamental current amplitude (A)")
    harmonics: int = Field(default=1, ge=1, le=5, description="Odd square-wave harmonics modeled")


class AcquisitionConfig(BaseModel):
    """Everything besides the network, key and seed that shapes a trace set."""

    model_config = ConfigDict(frozen=True)

    sensor: SensorModel = Field(default_factory=SensorModel)
    actuator: ActuatorModel = Field(default_factory=ActuatorModel)
    phase_model: PhaseModel = PhaseModel.CREST
    sampling_rate: float = Field(default=300e6, gt=0, description="TDC sampling rate (Hz)")
    interval: float = Field(default=1e-3, gt=0, description="Sensing interval (s)")


# --- Trace Schemas ---


class TraceSet(BaseModel):
    """Quantized TDC codes per (frequency, sensor)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    frequencies: tuple[float, ...]
    sensor_ids: tuple[int, ...]
    samples: np.ndarray = Field(..., description="Integer codes, shape (frequencies, sensors, T)")
    seed: int
    acquisition: AcquisitionConfig = Field(default_factory=AcquisitionConfig)
    actuator_ids: tuple[int, ...] = ()

    @field_validator("samples", mode="before")
    @classmethod
    def as_code_array(cls, v: Any) -> np.ndarray:
        return np.asarray(v, dtype=np.int64)

    @model_validator(mode="after")
    def check_codes(self) -> "TraceSet":
        expected = (len(self.frequencies), len(self.sensor_ids))
        if self.samples.ndim != 3 or self.samples.shape[:2] != expected or self.samples.shape[2] < 1:
            raise ValueError("samples must have shape (frequencies, sensors, T) with T >= 1")
        taps = self.acquisition.sensor.taps
        if self.samples.size and (self.samples.min() < 0 or self.samples.max() > taps):
            raise ValueError(f"codes must lie in [0, {taps}]")
        return self

    @property
    def traces(self) -> int:
        return int(self.samples.shape[2])

    def cell(self, frequency_index: int, sensor_id: int) -> np.ndarray:
        """Code vector of one (frequency, sensor) cell."""
        return self.samples[frequency_index, self.sensor_ids.index(sensor_id)]
