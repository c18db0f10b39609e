"""Case-study reproduction: golden reference, clean re-test and tampered test per case."""

import itertools
import json
from pathlib import Path

import numpy as np

from pdnsense.core.config import settings
from pdnsense.core.exceptions import ValidationError
from pdnsense.core.logging import get_logger
from pdnsense.schemas.enums import Decision
from pdnsense.schemas.experiment import CaseReport
from pdnsense.schemas.network import PdnNetwork
from pdnsense.schemas.protocol import VerificationKey
from pdnsense.schemas.sensing import TraceSet
from pdnsense.schemas.stats import MetricConfig, Verdict
from pdnsense.services.export import write_average_distance, write_verdict_csv
from pdnsense.services.pdn import default_band, reference_network
from pdnsense.services.protocol import generate_key
from pdnsense.services.sensing import acquire, monitor_blocks
from pdnsense.services.stats import average_distance_profile, decide
from pdnsense.services.tamper import adjacent_replacement_event, apply, get_preset

logger = get_logger(__name__)

CASE_TRACES = {1: 500, 2: 1000, 3: 500, 4: 500}
DESIGNS = ("aes", "fft", "cnn")
CASE_PRESETS = {2: "sll-133", 3: "far-replacement", 4: "trojan"}


def detections(verdict: Verdict) -> dict[str, bool]:
    """Whether any frequency exceeds under each metric."""
    return {
        "ttest": any(f.t_exceeded for f in verdict.per_frequency),
        "wasserstein": any(f.w_exceeded for f in verdict.per_frequency),
        "both": any(f.t_exceeded and f.w_exceeded for f in verdict.per_frequency),
    }


class _Bench:
    """One key and a seed stream shared by every acquisition of a case."""

    def __init__(self, net: PdnNetwork, key: VerificationKey, traces: int, seed: int) -> None:
        self.net = net
        self.key = key
        self.traces = traces
        self._seeds = iter(int(s) for s in np.random.SeedSequence(seed).generate_state(8))

    def acquire(self, device: PdnNetwork) -> TraceSet:
        blocks = monitor_blocks(device, self.key.grid_size)
        return acquire(
            device,
            blocks,
            self.key.actuator_ids,
            self.key.sensor_ids,
            self.key.frequencies,
            self.traces,
            next(self._seeds),
        )


def _bench(seed: int, traces: int) -> _Bench:
    net = reference_network()
    band = default_band()
    key = generate_key(settings.GRID_SIZE, settings.KEY_ACTUATORS, settings.KEY_SENSORS, band, len(band), seed)
    return _Bench(net, key, traces, seed)


def _case_one(bench: _Bench, out: Path, cfg: MetricConfig | None) -> tuple[Verdict, Verdict, dict]:
    golden = bench.acquire(bench.net)
    clean = decide(golden, bench.acquire(bench.net), cfg)

    designs = {name: bench.acquire(apply(bench.net, get_preset(name).event)) for name in DESIGNS}
    verdicts = {name: decide(golden, trace, cfg) for name, trace in designs.items()}
    for name, verdict in verdicts.items():
        write_verdict_csv(verdict, out / f"tampered_{name}.csv")

    pairwise = {}
    for a, b in itertools.combinations(DESIGNS, 2):
        verdict = decide(designs[a], designs[b], cfg)
        write_verdict_csv(verdict, out / f"pairwise_{a}_{b}.csv")
        pairwise[f"{a}/{b}"] = verdict.decision is Decision.TAMPERED

    write_average_distance(
        np.asarray(golden.frequencies),
        {name: average_distance_profile(golden, trace) for name, trace in designs.items()},
        out / "average_distance.csv",
    )
    details = {
        "designs": {name: v.decision.value for name, v in verdicts.items()},
        "pairwise": pairwise,
        "pairwise_distinguishable": all(pairwise.values()),
        "design_max_abs_t": {name: v.max_abs_t for name, v in verdicts.items()},
    }
    # tampered.csv carries the first design so every case shares one layout
    return clean, verdicts[DESIGNS[0]], details


def _case_preset(case: int, bench: _Bench, out: Path, cfg: MetricConfig | None) -> tuple[Verdict, Verdict, dict]:
    golden = bench.acquire(bench.net)
    clean = decide(golden, bench.acquire(bench.net), cfg)
    preset = get_preset(CASE_PRESETS[case])
    tampered = decide(golden, bench.acquire(apply(bench.net, preset.event)), cfg)
    details: dict = {"scenario": preset.name, "label": preset.event.label}

    if case == 3:
        grid = len(bench.net.grid_nodes(1))
        adjacent = decide(golden, bench.acquire(apply(bench.net, adjacent_replacement_event(grid))), cfg)
        write_verdict_csv(adjacent, out / "adjacent.csv")
        details.update(
            far_max_abs_t=tampered.max_abs_t,
            adjacent_max_abs_t=adjacent.max_abs_t,
            attenuated=tampered.max_abs_t < adjacent.max_abs_t,
        )
    return clean, tampered, details


def reproduce_case(
    case: int,
    out_dir: Path,
    seed: int = 0,
    traces: int | None = None,
    metric_config: MetricConfig | None = None,
) -> CaseReport:
    """Run one case study end-to-end and write its CSVs and ``summary.json``.

    Args:
        case: Case-study number, 1 to 4.
        out_dir: Parent directory; files land in ``out_dir/case<k>``.
        seed: Seed of the key and of every acquisition of the case.
        traces: Override of the case's trace count.
        metric_config: Decision rule, settings defaults when omitted.
    """
    if case not in CASE_TRACES:
        raise ValidationError(f"case must be one of {sorted(CASE_TRACES)}, got {case}")
    traces = traces or CASE_TRACES[case]
    out = out_dir / f"case{case}"
    out.mkdir(parents=True, exist_ok=True)

    bench = _bench(seed, traces)
    if case == 1:
        clean, tampered, details = _case_one(bench, out, metric_config)
    else:
        clean, tampered, details = _case_preset(case, bench, out, metric_config)

    write_verdict_csv(clean, out / "clean.csv")
    write_verdict_csv(tampered, out / "tampered.csv")
    report = CaseReport(
        case=case,
        traces=traces,
        detected=detections(tampered),
        false_positive=detections(clean),
        max_abs_t=tampered.max_abs_t,
        details={"seed": seed, "key_id": bench.key.key_id, "clean_max_abs_t": clean.max_abs_t, **details},
    )
    (out / "summary.json").write_text(report.model_dump_json(indent=2))
    logger.info(
        "Case study reproduced",
        case=case,
        traces=traces,
        detected=report.detected["both"],
        false_positive=report.false_positive["both"],
        max_abs_t=round(report.max_abs_t, 3),
    )
    return report


def reproduce_all(out_dir: Path, seed: int = 0, metric_config: MetricConfig | None = None) -> list[CaseReport]:
    """Run cases 1 to 4 and write a combined ``summary.json``."""
    reports = [reproduce_case(case, out_dir, seed, metric_config=metric_config) for case in sorted(CASE_TRACES)]
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "summary.json").write_text(
        json.dumps([r.model_dump(mode="json") for r in reports], indent=2)
    )
    return reports
