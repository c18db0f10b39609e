"""Experiment specification and case-study report schemas."""

from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field, model_validator

from .stats import MetricConfig


class ExperimentSpec(BaseModel):
    """Inputs of one enroll/verify/acquire run."""

    config_path: Path | None = Field(default=None, description="Network config or network document")
    scenario: str | None = Field(default=None, description="Preset name or TamperEvent JSON path")
    actuators: int = Field(default=2, ge=1, description="K")
    sensors: int = Field(default=4, ge=1, description="M")
    frequencies: int | None = Field(default=None, ge=1, description="N, defaults to the whole band")
    band: list[float] | None = None
    traces: int = Field(default=500, ge=2, description="T")
    key_seed: int = Field(default=0, ge=0)
    acq_seed: int = Field(default=1, ge=0)
    metric: MetricConfig = Field(default_factory=MetricConfig)
    out_dir: Path = Path("out")

    @model_validator(mode="after")
    def referenced_files_exist(self) -> "ExperimentSpec":
        if self.config_path is not None and not self.config_path.is_file():
            raise ValueError(f"config file {self.config_path} does not exist")
        return self


class CaseReport(BaseModel):
    """Summary document of one reproduced case study."""

    case: int = Field(..., ge=1, le=4)
    traces: int
    detected: dict[str, bool]
    false_positive: dict[str, bool]
    max_abs_t: float
    details: dict[str, Any] = Field(default_factory=dict)
