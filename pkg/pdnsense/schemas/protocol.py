"""Challenge-response protocol schemas."""

import hashlib
import json
from datetime import datetime, timezone

UTC = timezone.utc

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .enums import SummaryMode
from .sensing import AcquisitionConfig

# --- Key Schemas ---


class VerificationKey(BaseModel):
    """One-time challenge: actuator set, sensor set and sweep frequencies."""

    model_config = ConfigDict(frozen=True)

    actuator_ids: tuple[int, ...] = Field(..., min_length=1)
    sensor_ids: tuple[int, ...] = Field(..., min_length=1)
    frequencies: tuple[float, ...] = Field(..., min_length=1)
    nonce: int = Field(..., ge=0)
    grid_size: int = Field(default=32, ge=1)

    @model_validator(mode="after")
    def check_key(self) -> "VerificationKey":
        for label, ids in (("actuator", self.actuator_ids), ("sensor", self.sensor_ids)):
            if len(set(ids)) != len(ids):
                raise ValueError(f"duplicate {label} IDs")
            if min(ids) < 0 or max(ids) >= self.grid_size:
                raise ValueError(f"{label} IDs must lie in [0, {self.grid_size})")
        freqs = np.asarray(self.frequencies)
        if np.any(freqs <= 0) or np.any(np.diff(freqs) <= 0):
            raise ValueError("key frequencies must be positive and strictly increasing")
        return self

    @property
    def key_id(self) -> str:
        """Stable digest of the key content."""
        payload = json.dumps(self.model_dump(mode="json"), sort_keys=True).encode()
        return hashlib.blake2b(payload, digest_size=8).hexdigest()


# --- Signature Schemas ---


class SignatureSummary(BaseModel):
    """Golden trace summary over a key's (frequency, sensor) grid.

    ``full`` keeps every code; ``quantiles`` keeps mean, variance and sorted
    quantile points per cell.
    """

    model_config = ConfigDict(frozen=True)

    mode: SummaryMode
    frequencies: tuple[float, ...]
    sensor_ids: tuple[int, ...]
    traces: int = Field(..., ge=1)
    acquisition: AcquisitionConfig = Field(default_factory=AcquisitionConfig)
    samples: list[list[list[int]]] | None = None
    mean: list[list[float]] | None = None
    variance: list[list[float]] | None = None
    quantiles: list[list[list[float]]] | None = None

    @model_validator(mode="after")
    def check_grid(self) -> "SignatureSummary":
        grid = (len(self.frequencies), len(self.sensor_ids))
        if self.mode is SummaryMode.FULL:
            if self.samples is None:
                raise ValueError("full summaries store sample vectors")
            shape = np.asarray(self.samples).shape
            if shape != (*grid, self.traces):
                raise ValueError(f"sample grid {shape} does not cover {grid} x {self.traces}")
        else:
            if self.mean is None or self.variance is None or self.quantiles is None:
                raise ValueError("quantile summaries store mean, variance and quantiles")
            if np.asarray(self.mean).shape != grid or np.asarray(self.variance).shape != grid:
                raise ValueError("mean and variance must cover the key grid")
            if np.asarray(self.quantiles).shape[:2] != grid:
                raise ValueError("quantiles must cover the key grid")
        return self

    def cell_values(self, frequency_index: int, sensor_index: int) -> np.ndarray:
        """Samples (full mode) or quantile points (quantile mode) of one cell."""
        if self.mode is SummaryMode.FULL:
            assert self.samples is not None
            return np.asarray(self.samples[frequency_index][sensor_index], dtype=float)
        assert self.quantiles is not None
        return np.asarray(self.quantiles[frequency_index][sensor_index], dtype=float)

    def cell_moments(self, frequency_index: int, sensor_index: int) -> tuple[float, float, int]:
        """Mean, sample variance and sample count of one cell."""
        if self.mode is SummaryMode.FULL:
            values = self.cell_values(frequency_index, sensor_index)
            return float(values.mean()), float(values.var(ddof=1)) if values.size > 1 else 0.0, values.size
        assert self.mean is not None and self.variance is not None
        return (
            self.mean[frequency_index][sensor_index],
            self.variance[frequency_index][sensor_index],
            self.traces,
        )


class GoldenSignature(BaseModel):
    """Enrolled reference summary bound to one verification key."""

    signature_id: str
    key: VerificationKey
    trace_summary: SignatureSummary
    device_id: str
    seed: int
    created_at: datetime = Field(default_factory=lambda: datetime.now(UTC))
    used: bool = False

    @model_validator(mode="after")
    def summary_covers_key(self) -> "GoldenSignature":
        if tuple(self.trace_summary.frequencies) != tuple(self.key.frequencies):
            raise ValueError("trace summary frequencies differ from the key")
        if tuple(self.trace_summary.sensor_ids) != tuple(self.key.sensor_ids):
            raise ValueError("trace summary sensors differ from the key")
        return self


class SignatureIndexEntry(BaseModel):
    """Row of the store index."""

    device_id: str
    nonce: int
    key_id: str
    created_at: datetime
    used: bool = False
