"""Shared enums for schemas."""

from enum import Enum


class ElementKind(str, Enum):
    """Lumped element kinds."""

    RESISTOR = "resistor"
    INDUCTOR = "inductor"
    CAPACITOR = "capacitor"
    CURRENT_SOURCE = "current-source"


class TamperKind(str, Enum):
    """Physical modification families."""

    DESIGN_SWAP = "design_swap"
    INTERPOSER_SLL_CHANGE = "interposer_sll_change"
    FAR_REPLACEMENT = "far_replacement"
    TROJAN_INSERT = "trojan_insert"


class PhaseModel(str, Enum):
    """Relationship between the TDC sampling clock and the actuator drive."""

    CREST = "crest"
    UNIFORM = "uniform"


class Metric(str, Enum):
    """Decision metric."""

    TTEST = "ttest"
    WASSERSTEIN = "wasserstein"
    BOTH = "both"


class TriggeringMetric(str, Enum):
    """Metric that produced a tampered decision."""

    TTEST = "ttest"
    WASSERSTEIN = "wasserstein"
    BOTH = "both"
    NONE = "none"


class Decision(str, Enum):
    """Verification outcome."""

    CLEAN = "clean"
    TAMPERED = "tampered"


class PoolingRule(str, Enum):
    """How the active sensors of one frequency are combined."""

    MAX = "max"
    CONCAT = "concat"


class SummaryMode(str, Enum):
    """Storage form of a golden trace summary."""

    FULL = "full"
    QUANTILES = "quantiles"
