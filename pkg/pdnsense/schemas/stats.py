"""Statistics and verdict schemas."""

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .enums import Decision, Metric, PoolingRule, TriggeringMetric

# --- Input Schemas ---


class FrequencyCell(BaseModel):
    """Golden and test samples observed at one frequency."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    frequency: float = Field(default=1.0, gt=0)
    golden_samples: np.ndarray
    test_samples: np.ndarray

    @field_validator("golden_samples", "test_samples", mode="before")
    @classmethod
    def as_float_vector(cls, v: Any) -> np.ndarray:
        arr = np.asarray(v, dtype=float).ravel()
        if arr.size < 1:
            raise ValueError("sample vectors must not be empty")
        return arr


class BootstrapConfig(BaseModel):
    """Bootstrap null-distribution parameters."""

    model_config = ConfigDict(frozen=True)

    resamples: int = Field(default=1000, ge=1)
    significance: float = Field(default=0.01, gt=0, lt=1)
    seed: int = Field(default=0, ge=0)


class MetricConfig(BaseModel):
    """Decision rule applied by ``decide``."""

    model_config = ConfigDict(frozen=True)

    metric: Metric = Metric.BOTH
    t_threshold: float = Field(default=4.5, gt=0)
    order: int = Field(default=1, ge=1, description="Wasserstein order p")
    bootstrap: BootstrapConfig = Field(default_factory=BootstrapConfig)
    pooling: PoolingRule = PoolingRule.MAX


# --- Result Schemas ---


class SensorStatistic(BaseModel):
    """Statistics of one (frequency, sensor) cell."""

    frequency: float
    sensor_id: int
    t_statistic: float | None = Field(..., description="None when the cell is degenerate")
    wasserstein: float
    threshold: float
    t_exceeded: bool
    w_exceeded: bool
    degenerate: bool = False


class FrequencyStatistic(BaseModel):
    """Pooled statistics of one frequency."""

    frequency: float
    t_statistic: float | None
    wasserstein: float
    threshold: float
    t_exceeded: bool
    w_exceeded: bool
    exceeded: bool
    degenerate: bool = False


class Verdict(BaseModel):
    """Outcome of comparing a test acquisition with a golden summary."""

    per_frequency: list[FrequencyStatistic]
    per_sensor: list[SensorStatistic] = Field(default_factory=list)
    decision: Decision
    triggering_metric: TriggeringMetric
    metric: Metric = Metric.BOTH
    pooling: PoolingRule = PoolingRule.MAX
    order: int = 1
    significance: float = 0.01
    golden_traces: int = 0
    test_traces: int = 0
    signature_id: str | None = None

    @model_validator(mode="after")
    def decision_follows_cells(self) -> "Verdict":
        tampered = any(f.exceeded for f in self.per_frequency)
        if tampered != (self.decision is Decision.TAMPERED):
            raise ValueError("decision must be tampered exactly when a frequency exceeds its threshold")
        if (self.triggering_metric is TriggeringMetric.NONE) == tampered:
            raise ValueError("triggering metric must be none exactly when the decision is clean")
        return self

    @property
    def max_abs_t(self) -> float:
        """Largest finite |t| over all frequencies."""
        values = [abs(f.t_statistic) for f in self.per_frequency if f.t_statistic is not None]
        return max(values, default=0.0)
