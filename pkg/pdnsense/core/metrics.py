from pathlib import Path

from prometheus_client import CollectorRegistry, Counter, Histogram, write_to_textfile

registry = CollectorRegistry()

ENROLLMENTS = Counter(
    "pdnsense_enrollments_total",
    "Golden signatures enrolled",
    registry=registry,
)
VERIFICATIONS = Counter(
    "pdnsense_verifications_total",
    "Verification runs by decision",
    ["decision"],
    registry=registry,
)
REPLAY_REJECTIONS = Counter(
    "pdnsense_replay_rejections_total",
    "Verifications refused because the signature was already used",
    registry=registry,
)
SOLVER_FAILURES = Counter(
    "pdnsense_solver_failures_total",
    "Impedance solves that failed",
    registry=registry,
)
ACQUISITION_SECONDS = Histogram(
    "pdnsense_acquisition_seconds",
    "Wall time of one trace-set acquisition",
    registry=registry,
)


def export_metrics(path: Path) -> None:
    """Write the registry in the node-exporter textfile format."""
    path.parent.mkdir(parents=True, exist_ok=True)
    write_to_textfile(str(path), registry)
