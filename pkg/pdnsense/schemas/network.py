"""Power delivery network schemas."""

import math
import re
from typing import Any

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .enums import ElementKind

GROUND = "gnd"
REGION_TAGS = ("vrm", "board", "package", "interposer")
_CHIPLET_TAG = re.compile(r"^chiplet(\d+)$")


def chiplet_region(index: int) -> str:
    """Region tag of chiplet ``index``."""
    return f"chiplet{index}"


def chiplet_index(region: str) -> int | None:
    """Chiplet number encoded in a region tag, or None for other regions."""
    match = _CHIPLET_TAG.match(region)
    return int(match.group(1)) if match else None


# --- Element Schemas ---


class Element(BaseModel):
    """One lumped element between two nodes."""

    model_config = ConfigDict(frozen=True)

    kind: ElementKind
    value: float = Field(..., description="Ohms, henries, farads or amperes depending on kind")
    node_a: str
    node_b: str
    name: str | None = None

    @model_validator(mode="after")
    def check_element(self) -> "Element":
        if self.node_a == self.node_b:
            raise ValueError(f"element {self.name or self.kind.value} connects node {self.node_a} to itself")
        if not math.isfinite(self.value):
            raise ValueError(f"element {self.name or self.kind.value} has a non-finite value")
        if self.kind is ElementKind.CURRENT_SOURCE:
            if self.value == 0:
                raise ValueError("current source amplitude must be non-zero")
        elif self.value <= 0:
            raise ValueError(f"{self.kind.value} {self.name or ''} must have a positive value, got {self.value}")
        return self


# --- Network Schemas ---


class PdnNetwork(BaseModel):
    """Lumped RLC graph spanning board, package, interposer and chiplet grids.

    Immutable once built; tamper events return new instances.
    """

    model_config = ConfigDict(frozen=True)

    nodes: tuple[str, ...]
    ground: str = GROUND
    elements: tuple[Element, ...]
    regions: dict[str, str] = Field(..., description="Node ID to region tag")
    chiplet_count: int = Field(..., ge=2)
    verifier_chiplet: int = Field(default=0, ge=0)
    sll_pair: tuple[str, str] | None = Field(default=None, description="Interposer nodes joined by SLL links")

    @model_validator(mode="after")
    def check_invariants(self) -> "PdnNetwork":
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise ValueError("duplicate node identifiers")
        if self.ground not in node_set:
            raise ValueError(f"ground node {self.ground} is not part of the network")
        if set(self.regions) != node_set:
            missing = sorted(node_set - set(self.regions))
            extra = sorted(set(self.regions) - node_set)
            raise ValueError(f"region tags must partition the node set (untagged={missing}, unknown={extra})")

        for tag in set(self.regions.values()):
            index = chiplet_index(tag)
            if tag not in REGION_TAGS and index is None:
                raise ValueError(f"unknown region tag {tag}")
            if index is not None and index >= self.chiplet_count:
                raise ValueError(f"region {tag} exceeds chiplet_count={self.chiplet_count}")

        for element in self.elements:
            for node in (element.node_a, element.node_b):
                if node not in node_set:
                    raise ValueError(f"element {element.name or element.kind.value} references unknown node {node}")

        graph = nx.Graph()
        graph.add_nodes_from(self.nodes)
        graph.add_edges_from(
            (e.node_a, e.node_b) for e in self.elements if e.kind is not ElementKind.CURRENT_SOURCE
        )
        if not nx.is_connected(graph):
            raise ValueError("network graph is not connected")

        for k in range(self.chiplet_count):
            region = chiplet_region(k)
            members = {n for n, tag in self.regions.items() if tag == region}
            has_rc = any(
                e.kind is ElementKind.CAPACITOR and (e.node_a in members or e.node_b in members)
                for e in self.elements
            )
            if not has_rc:
                raise ValueError(f"region {region} has no on-die RC branch")

        if self.verifier_chiplet >= self.chiplet_count:
            raise ValueError("verifier chiplet is outside the chiplet range")
        if self.sll_pair is not None:
            for node in self.sll_pair:
                if node not in node_set:
                    raise ValueError(f"SLL endpoint {node} is not part of the network")
        return self

    def region_nodes(self, region: str) -> list[str]:
        """Nodes tagged with ``region``, in network order."""
        return [n for n in self.nodes if self.regions[n] == region]

    def grid_nodes(self, chiplet: int) -> list[str]:
        """On-die grid nodes ``c<k>_<i>`` of a chiplet, ordered by grid index."""
        pattern = re.compile(rf"^c{chiplet}_(\d+)$")
        found = [(int(m.group(1)), n) for n in self.nodes if (m := pattern.match(n))]
        return [n for _, n in sorted(found)]


# --- Config Schemas ---


class SeriesRL(BaseModel):
    """Series resistor-inductor path."""

    r: float = Field(..., gt=0, description="Resistance (ohm)")
    l: float = Field(..., gt=0, description="Inductance (H)")  # noqa: E741


class CapacitorBank(BaseModel):
    """Identical decoupling capacitors with parasitic series R-L."""

    c: float = Field(..., gt=0, description="Capacitance per part (F)")
    r: float = Field(..., gt=0, description="Equivalent series resistance (ohm)")
    l: float = Field(..., gt=0, description="Equivalent series inductance (H)")  # noqa: E741
    count: int = Field(default=1, ge=0, description="Number of parts")


class TsvConfig(BaseModel):
    """Parallel through-silicon vias between the interposer and a chiplet."""

    r: float = Field(default=10e-3, gt=0, description="Resistance per TSV (ohm)")
    l: float = Field(default=10e-12, gt=0, description="Inductance per TSV (H)")  # noqa: E741
    count: int = Field(default=8, ge=1, description="TSVs per chiplet")


class SllConfig(BaseModel):
    """Interposer super-long-line interconnects between two chiplets."""

    count: int = Field(default=129, ge=0, description="Number of SLL links")
    r: float = Field(default=0.8, gt=0, description="Series resistance per link (ohm)")
    l: float = Field(default=1.61e-9, gt=0, description="Series inductance per link (H)")  # noqa: E741
    c: float = Field(default=2.78e-12, gt=0, description="Shunt capacitance per link (F)")
    between: tuple[int, int] = Field(default=(0, 1), description="Chiplets joined by the links")

    @field_validator("between")
    @classmethod
    def distinct_ends(cls, v: tuple[int, int]) -> tuple[int, int]:
        if v[0] == v[1] or min(v) < 0:
            raise ValueError("SLL links must join two distinct chiplets")
        return v


class ChipletConfig(BaseModel):
    """One chiplet: bump path, on-die mesh chain and RC grid."""

    grid_size: int = Field(default=4, ge=1, description="On-die RC branches")
    r_lo: float = Field(default=0.185, gt=0, description="Branch resistance at grid index 0 (ohm)")
    r_hi: float = Field(default=0.185, gt=0, description="Branch resistance at the last grid index (ohm)")
    c_lo: float = Field(default=0.105e-9, gt=0, description="Branch capacitance at grid index 0 (F)")
    c_hi: float = Field(default=0.103e-9, gt=0, description="Branch capacitance at the last grid index (F)")
    mesh_r: float = Field(default=1.4e-3, gt=0, description="Mesh segment resistance (ohm)")
    mesh_l: float = Field(default=2.3e-12, gt=0, description="Mesh segment inductance (H)")
    bump_r: float = Field(default=1e-3, gt=0, description="Package-to-interposer bump resistance (ohm)")
    bump_l: float = Field(default=4.7e-12, gt=0, description="Package-to-interposer bump inductance (H)")


def _default_chiplets() -> list[ChipletConfig]:
    return [
        ChipletConfig(),
        ChipletConfig(
            r_lo=0.243, r_hi=0.243, c_lo=0.119e-9, c_hi=0.105e-9, mesh_r=4e-3, mesh_l=5.2e-12, bump_l=29e-12
        ),
        ChipletConfig(
            r_lo=0.337, r_hi=0.337, c_lo=0.138e-9, c_hi=0.279e-9, mesh_r=8e-3, mesh_l=20.5e-12, bump_l=19.3e-12
        ),
    ]


class NetworkConfig(BaseModel):
    """Declarative description of the reference topology."""

    vrm: SeriesRL = Field(default_factory=lambda: SeriesRL(r=1e-3, l=10e-9))
    bulk: CapacitorBank = Field(default_factory=lambda: CapacitorBank(c=100e-6, r=5e-3, l=5e-9, count=1))
    ceramic: CapacitorBank = Field(default_factory=lambda: CapacitorBank(c=1e-6, r=2e-3, l=0.5e-9, count=2))
    package: SeriesRL = Field(default_factory=lambda: SeriesRL(r=0.5e-3, l=50e-12))
    tsv: TsvConfig = Field(default_factory=TsvConfig)
    sll: SllConfig = Field(default_factory=SllConfig)
    chiplets: list[ChipletConfig] = Field(default_factory=_default_chiplets)
    verifier_chiplet: int = Field(default=0, ge=0)

    @property
    def chiplet_count(self) -> int:
        return len(self.chiplets)


# --- Cavity Schemas ---


class CavityGeometry(BaseModel):
    """Rectangular cavity used to estimate sweep frequencies."""

    a: float = Field(default=0.05, gt=0, description="Cross-section width (m)")
    b: float = Field(default=0.04, gt=0, description="Cross-section height (m)")
    d: float = Field(default=1e-3, gt=0, description="Cavity length (m)")
    mu: float = Field(default=4e-7 * math.pi, gt=0, description="Permeability (H/m)")
    epsilon: float = Field(default=4.4 * 8.8541878128e-12, gt=0, description="Permittivity (F/m)")
    m: int = Field(default=0, ge=0)
    n: int = Field(default=0, ge=0)
    p: int = Field(default=0, ge=0)


# --- Impedance Schemas ---


class ImpedanceProfile(BaseModel):
    """Complex impedance per frequency and (source, observe) pair."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    frequencies: tuple[float, ...]
    pairs: tuple[tuple[str, str], ...]
    values: np.ndarray = Field(..., description="Complex ohms, shape (frequencies, pairs)")

    @field_validator("values", mode="before")
    @classmethod
    def as_complex_array(cls, v: Any) -> np.ndarray:
        return np.asarray(v, dtype=complex)

    @model_validator(mode="after")
    def check_profile(self) -> "ImpedanceProfile":
        freqs = np.asarray(self.frequencies, dtype=float)
        if freqs.size == 0 or np.any(freqs <= 0) or np.any(np.diff(freqs) <= 0):
            raise ValueError("frequencies must be positive and strictly increasing")
        if self.values.shape != (len(self.frequencies), len(self.pairs)):
            raise ValueError("values must hold one complex number per frequency per pair")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("impedance values must be finite")
        return self

    def pair(self, source: str, observe: str) -> np.ndarray:
        """Impedance vector of one (source, observe) pair."""
        return self.values[:, self.pairs.index((source, observe))]
