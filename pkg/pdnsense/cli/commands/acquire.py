"""Raw acquisition command."""

from pathlib import Path
from typing import Annotated

import typer

from pdnsense.cli.deps import build_spec, command_errors, emit, get_device_network, output_dir
from pdnsense.core.config import settings
from pdnsense.services.pdn import default_band
from pdnsense.services.protocol import generate_key
from pdnsense.services.sensing import acquire as acquire_traces
from pdnsense.services.sensing import monitor_blocks, write_trace_set


def acquire(
    config: Annotated[Path | None, typer.Option(help="Network config or network document")] = None,
    scenario: Annotated[str | None, typer.Option(help="Preset name or TamperEvent JSON path")] = None,
    key_seed: Annotated[int, typer.Option(help="Seed of the verification key")] = 0,
    acq_seed: Annotated[int, typer.Option(help="Seed of the acquisition")] = 1,
    traces: Annotated[int, typer.Option(help="Traces per (frequency, sensor) cell")] = 500,
    out: Annotated[Path | None, typer.Option(help="Output directory")] = None,
) -> None:
    """Acquire one trace set and write it as CSV plus JSON sidecar."""
    with command_errors("acquire"):
        spec = build_spec(
            config_path=config, scenario=scenario, traces=traces, key_seed=key_seed, acq_seed=acq_seed
        )
        band = default_band()
        key = generate_key(
            settings.GRID_SIZE, spec.actuators, spec.sensors, band, spec.frequencies or len(band), spec.key_seed
        )
        net = get_device_network(spec.config_path, spec.scenario)
        trace = acquire_traces(
            net,
            monitor_blocks(net, key.grid_size),
            key.actuator_ids,
            key.sensor_ids,
            key.frequencies,
            spec.traces,
            spec.acq_seed,
        )
        path = write_trace_set(trace, output_dir(out) / "traces.csv")
        emit({"traces": str(path), "sidecar": str(path.with_suffix(".json")), "key_id": key.key_id})
