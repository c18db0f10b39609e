"""Tamper scenario commands."""

import json
from pathlib import Path
from typing import Annotated

import typer

from pdnsense.cli.deps import command_errors, emit, get_network, output_dir
from pdnsense.services.tamper import apply, get_preset, load_event, scenario_catalog

router = typer.Typer(help="Inspect and apply tamper scenarios.", no_args_is_help=True)


@router.command("list")
def list_scenarios() -> None:
    """List the preset catalog."""
    with command_errors("scenarios list"):
        emit(
            [
                {
                    "name": p.name,
                    "case": p.case,
                    "kind": p.event.kind.value,
                    "target_region": p.event.target_region,
                    "description": p.description,
                }
                for p in scenario_catalog()
            ]
        )


@router.command("show")
def show(name: Annotated[str, typer.Argument(help="Preset name")]) -> None:
    """Print a preset's TamperEvent document."""
    with command_errors("scenarios show"):
        emit(json.loads(get_preset(name).event.model_dump_json()))


@router.command("apply")
def apply_scenario(
    name: Annotated[str, typer.Argument(help="Preset name or TamperEvent JSON path")],
    config: Annotated[Path | None, typer.Option(help="Network config or network document")] = None,
    out: Annotated[Path | None, typer.Option(help="Output directory")] = None,
) -> None:
    """Write the tampered network document."""
    with command_errors("scenarios apply"):
        net = get_network(config)
        tampered = apply(net, load_event(name))
        path = output_dir(out) / "tampered_network.json"
        path.write_text(tampered.model_dump_json(indent=2))
        emit(
            {
                "network": str(path),
                "elements_added": len(tampered.elements) - len(net.elements),
                "nodes_added": len(tampered.nodes) - len(net.nodes),
            }
        )
