"""Tamper event schemas."""

from typing import Annotated, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .enums import TamperKind

# --- Magnitude Schemas ---


class DesignSwapMagnitude(BaseModel):
    """Replacement on-die capacitance profile of a chiplet."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["design_swap"] = "design_swap"
    total_capacitance: float = Field(..., gt=0, description="Sum of the new branch capacitances (F)")
    weights: tuple[float, ...] = Field(..., min_length=1, description="Relative share per grid branch")

    @field_validator("weights")
    @classmethod
    def positive_weights(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        if any(w <= 0 for w in v):
            raise ValueError("placement weights must be positive")
        return v


class SllChangeMagnitude(BaseModel):
    """Change of the SLL link count."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["interposer_sll_change"] = "interposer_sll_change"
    from_count: int = Field(..., ge=0)
    to_count: int = Field(..., ge=0)

    @model_validator(mode="after")
    def counts_differ(self) -> "SllChangeMagnitude":
        if self.from_count == self.to_count:
            raise ValueError("SLL change must alter the link count")
        return self

    @property
    def delta(self) -> int:
        return self.to_count - self.from_count


class BranchMoveMagnitude(BaseModel):
    """Re-wiring of one on-die branch to another grid node."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["far_replacement"] = "far_replacement"
    from_index: int = Field(..., ge=0)
    to_index: int = Field(..., ge=0)

    @model_validator(mode="after")
    def indices_differ(self) -> "BranchMoveMagnitude":
        if self.from_index == self.to_index:
            raise ValueError("branch move needs two distinct grid nodes")
        return self


class TrojanMagnitude(BaseModel):
    """Dormant Trojan footprint: one series R-C branch."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["trojan_insert"] = "trojan_insert"
    capacitance: float = Field(default=10e-12, gt=0, description="Added gate capacitance (F)")
    resistance: float = Field(default=0.05, gt=0, description="Routing resistance (ohm)")
    node_index: int = Field(default=0, ge=0, description="Grid node the branch attaches to")


Magnitude = Annotated[
    DesignSwapMagnitude | SllChangeMagnitude | BranchMoveMagnitude | TrojanMagnitude,
    Field(discriminator="kind"),
]


# --- Event Schemas ---


class TamperEvent(BaseModel):
    """A parameterized physical modification of a network."""

    model_config = ConfigDict(frozen=True)

    kind: TamperKind
    target_region: str
    magnitude: Magnitude
    label: str = ""

    @model_validator(mode="after")
    def magnitude_matches_kind(self) -> "TamperEvent":
        if self.magnitude.kind != self.kind:
            raise ValueError(f"magnitude of kind {self.magnitude.kind} cannot describe {self.kind.value}")
        return self


class ScenarioPreset(BaseModel):
    """Named catalog entry."""

    model_config = ConfigDict(frozen=True)

    name: str
    case: int = Field(..., ge=1, le=4, description="Case study the preset belongs to")
    event: TamperEvent
    description: str = ""
