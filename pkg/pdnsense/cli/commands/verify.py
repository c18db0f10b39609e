"""Verification command."""

from pathlib import Path
from typing import Annotated

import typer

from pdnsense.cli.deps import (
    build_spec,
    command_errors,
    emit,
    get_device_network,
    get_metric_config,
    get_store,
    output_dir,
)
from pdnsense.schemas.enums import Decision, Metric, PoolingRule
from pdnsense.services.export import write_verdict
from pdnsense.services.protocol import verify as verify_device

TAMPERED_EXIT_CODE = 2


def verify(
    signature: Annotated[str, typer.Argument(help="Signature ID or path to a signature document")],
    config: Annotated[Path | None, typer.Option(help="Network config or network document")] = None,
    scenario: Annotated[str | None, typer.Option(help="Preset name or TamperEvent JSON path")] = None,
    acq_seed: Annotated[int, typer.Option(help="Seed of the test acquisition")] = 2,
    traces: Annotated[int | None, typer.Option(help="Test traces per cell, default the golden count")] = None,
    metric: Annotated[Metric | None, typer.Option(help="Decision metric, default from settings")] = None,
    pooling: Annotated[PoolingRule | None, typer.Option(help="Sensor pooling, default from settings")] = None,
    store: Annotated[Path | None, typer.Option(help="Signature store directory")] = None,
    out: Annotated[Path | None, typer.Option(help="Directory for verdict.json and verdict.csv")] = None,
) -> None:
    """Test a device against a one-time golden signature.

    Exits 0 when clean, 2 when tampered and 1 on error.
    """
    with command_errors("verify"):
        repository = get_store(store)
        path = Path(signature)
        golden = repository.load_path(path) if path.suffix == ".json" else repository.load(signature)
        spec = build_spec(
            config_path=config,
            scenario=scenario,
            traces=traces or golden.trace_summary.traces,
            acq_seed=acq_seed,
            metric=get_metric_config(metric, pooling),
        )
        verdict = verify_device(
            get_device_network(spec.config_path, spec.scenario),
            golden,
            spec.traces,
            spec.acq_seed,
            repository,
            spec.metric,
        )
        json_path, csv_path = write_verdict(verdict, output_dir(out))
        emit(
            {
                "signature_id": verdict.signature_id,
                "decision": verdict.decision.value,
                "triggering_metric": verdict.triggering_metric.value,
                "max_abs_t": verdict.max_abs_t,
                "verdict": str(json_path),
                "frequencies": str(csv_path),
            }
        )
    if verdict.decision is Decision.TAMPERED:
        raise typer.Exit(code=TAMPERED_EXIT_CODE)
