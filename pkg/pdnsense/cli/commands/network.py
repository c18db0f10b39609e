"""Network inspection commands."""

from pathlib import Path
from typing import Annotated

import typer
from scipy.constants import epsilon_0

from pdnsense.cli.deps import command_errors, emit, get_network, output_dir
from pdnsense.core.config import settings
from pdnsense.schemas.network import CavityGeometry
from pdnsense.services.export import write_profile_csv
from pdnsense.services.pdn import (
    cavity_resonances,
    decoupling_sweep,
    default_band,
    solve_impedance,
    suggest_sweep_band,
)

router = typer.Typer(help="Build and analyse PDN networks.", no_args_is_help=True)


@router.command("build")
def build_network(
    config: Annotated[Path | None, typer.Option(help="Network config or network document")] = None,
    out: Annotated[Path | None, typer.Option(help="Output directory")] = None,
) -> None:
    """Write the expanded network document."""
    with command_errors("network build"):
        net = get_network(config)
        path = output_dir(out) / "network.json"
        path.write_text(net.model_dump_json(indent=2))
        emit({"network": str(path), "nodes": len(net.nodes), "elements": len(net.elements)})


@router.command("impedance")
def impedance(
    config: Annotated[Path | None, typer.Option(help="Network config or network document")] = None,
    source: Annotated[str, typer.Option(help="Injection node")] = "c0_0",
    observe: Annotated[str | None, typer.Option(help="Observation node, default the source")] = None,
    wide: Annotated[bool, typer.Option(help="Sweep 100 kHz to 2 GHz instead of the default band")] = False,
    out: Annotated[Path | None, typer.Option(help="Output directory")] = None,
) -> None:
    """Impedance profile over the default band, or the wide decoupling sweep, as CSV."""
    with command_errors("network impedance"):
        freqs = decoupling_sweep() if wide else default_band()
        profile = solve_impedance(get_network(config), source, observe or source, freqs)
        path = write_profile_csv(profile, output_dir(out) / "impedance.csv")
        emit({"profile": str(path), "frequencies": len(profile.frequencies)})


@router.command("resonances")
def resonances(
    max_mode: Annotated[int, typer.Option(help="Largest mode index per axis")] = 2,
    a: Annotated[float, typer.Option(help="Cavity width (m)")] = 0.05,
    b: Annotated[float, typer.Option(help="Cavity height (m)")] = 0.04,
    d: Annotated[float, typer.Option(help="Cavity length (m)")] = 1e-3,
    epsilon_r: Annotated[float, typer.Option(help="Relative permittivity")] = 4.4,
) -> None:
    """List cavity resonances, lowest first."""
    with command_errors("network resonances"):
        geom = CavityGeometry(a=a, b=b, d=d, epsilon=epsilon_r * epsilon_0)
        emit([{"mode": list(mode), "frequency_hz": f} for mode, f in cavity_resonances(geom, max_mode)])


@router.command("band")
def band(
    count: Annotated[int, typer.Option(help="Sweep frequencies")] = settings.BAND_SIZE,
) -> None:
    """Suggested sweep band of the default cavity."""
    with command_errors("network band"):
        emit(suggest_sweep_band(CavityGeometry(), count))
