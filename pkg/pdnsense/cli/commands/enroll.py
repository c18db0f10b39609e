"""Enrollment command."""

import shutil
from pathlib import Path
from typing import Annotated

import typer

from pdnsense.cli.deps import build_spec, command_errors, emit, get_network, get_store
from pdnsense.core.config import settings
from pdnsense.schemas.enums import SummaryMode
from pdnsense.services.pdn import default_band
from pdnsense.services.protocol import enroll_batch


def enroll(
    config: Annotated[Path | None, typer.Option(help="Network config or network document")] = None,
    key_seed: Annotated[int, typer.Option(help="Seed of the first verification key")] = 0,
    acq_seed: Annotated[int, typer.Option(help="Seed of the first golden acquisition")] = 1,
    traces: Annotated[int, typer.Option(help="Traces per (frequency, sensor) cell")] = 500,
    actuators: Annotated[int, typer.Option(help="Active actuators per key (K)")] = settings.KEY_ACTUATORS,
    sensors: Annotated[int, typer.Option(help="Active sensors per key (M)")] = settings.KEY_SENSORS,
    frequencies: Annotated[int | None, typer.Option(help="Frequencies per key (N), default the whole band")] = None,
    count: Annotated[int, typer.Option(help="Signatures to pre-record")] = 1,
    device_id: Annotated[str, typer.Option(help="Device identifier")] = settings.DEVICE_ID,
    summary_mode: Annotated[SummaryMode, typer.Option(help="Golden summary storage")] = SummaryMode(
        settings.SUMMARY_MODE
    ),
    store: Annotated[Path | None, typer.Option(help="Signature store directory")] = None,
    out: Annotated[Path | None, typer.Option(help="Also copy the signature documents here")] = None,
) -> None:
    """Record golden signatures on the trusted network."""
    with command_errors("enroll"):
        spec = build_spec(
            config_path=config,
            actuators=actuators,
            sensors=sensors,
            frequencies=frequencies,
            traces=traces,
            key_seed=key_seed,
            acq_seed=acq_seed,
        )
        band = default_band()
        repository = get_store(store)
        signatures = enroll_batch(
            get_network(spec.config_path),
            count,
            spec.key_seed,
            spec.acq_seed,
            spec.traces,
            repository,
            band,
            k=spec.actuators,
            m=spec.sensors,
            n=spec.frequencies or len(band),
            device_id=device_id,
            mode=summary_mode,
        )
        paths = [repository.path_for(s.signature_id) for s in signatures]
        if out is not None:
            out.mkdir(parents=True, exist_ok=True)
            for path in paths:
                shutil.copy2(path, out / path.name)
        emit({"signatures": [str(p) for p in paths]})
