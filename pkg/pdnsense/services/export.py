"""CSV and JSON writers for profiles, verdicts and case-study data."""

from collections.abc import Mapping
from pathlib import Path

import numpy as np
import pandas as pd

from pdnsense.core.logging import get_logger
from pdnsense.schemas.network import ImpedanceProfile
from pdnsense.schemas.stats import Verdict

logger = get_logger(__name__)

PROFILE_HEADER = "# pdnsense impedance-profile v1"
VERDICT_FREQUENCY_HEADER = "# pdnsense verdict-frequency v1"
AVERAGE_DISTANCE_HEADER = "# pdnsense average-distance v1"

VERDICT_FREQUENCY_COLUMNS = ["frequency_hz", "t", "w_distance", "w_threshold", "exceeded"]


def _write_csv(frame: pd.DataFrame, path: Path, header: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        handle.write(header + "\n")
        frame.to_csv(handle, index=False)
    return path


def profile_frame(profile: ImpedanceProfile) -> pd.DataFrame:
    rows = []
    for p, (source, observe) in enumerate(profile.pairs):
        z = profile.values[:, p]
        rows.append(
            pd.DataFrame(
                {
                    "frequency_hz": profile.frequencies,
                    "re_ohm": z.real,
                    "im_ohm": z.imag,
                    "source": source,
                    "observe": observe,
                }
            )
        )
    return pd.concat(rows, ignore_index=True)


def write_profile_csv(profile: ImpedanceProfile, path: Path) -> Path:
    return _write_csv(profile_frame(profile), path, PROFILE_HEADER)


def verdict_frame(verdict: Verdict) -> pd.DataFrame:
    """Per-frequency rows; a degenerate cell has an empty ``t``."""
    return pd.DataFrame(
        {
            "frequency_hz": [f.frequency for f in verdict.per_frequency],
            "t": [np.nan if f.t_statistic is None else f.t_statistic for f in verdict.per_frequency],
            "w_distance": [f.wasserstein for f in verdict.per_frequency],
            "w_threshold": [f.threshold for f in verdict.per_frequency],
            "exceeded": [f.exceeded for f in verdict.per_frequency],
        },
        columns=VERDICT_FREQUENCY_COLUMNS,
    )


def write_verdict_csv(verdict: Verdict, path: Path) -> Path:
    return _write_csv(verdict_frame(verdict), path, VERDICT_FREQUENCY_HEADER)


def read_verdict_csv(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def write_verdict(verdict: Verdict, out_dir: Path, stem: str = "verdict") -> tuple[Path, Path]:
    """Write ``<stem>.json`` and ``<stem>.csv`` into ``out_dir``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / f"{stem}.json"
    json_path.write_text(verdict.model_dump_json(indent=2))
    csv_path = write_verdict_csv(verdict, out_dir / f"{stem}.csv")
    logger.info("Verdict written", json=str(json_path), csv=str(csv_path), decision=verdict.decision.value)
    return json_path, csv_path


def write_average_distance(
    frequencies: np.ndarray, profiles: Mapping[str, np.ndarray], path: Path
) -> Path:
    """Long-format ``frequency_hz, design, average_distance`` table."""
    frame = pd.concat(
        [
            pd.DataFrame({"frequency_hz": frequencies, "design": design, "average_distance": values})
            for design, values in profiles.items()
        ],
        ignore_index=True,
    )
    return _write_csv(frame, path, AVERAGE_DISTANCE_HEADER)
