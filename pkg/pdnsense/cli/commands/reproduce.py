"""Case-study reproduction command."""

from pathlib import Path
from typing import Annotated

import typer

from pdnsense.cli.deps import command_errors, emit, output_dir
from pdnsense.core.exceptions import ValidationError
from pdnsense.services.experiments import reproduce_all, reproduce_case


def reproduce(
    case: Annotated[str, typer.Argument(help="Case study 1, 2, 3, 4 or 'all'")],
    out: Annotated[Path | None, typer.Option(help="Output directory")] = None,
    seed: Annotated[int, typer.Option(help="Seed of the key and all acquisitions")] = 0,
) -> None:
    """Run case studies end-to-end and write plot-ready CSVs plus summary.json."""
    with command_errors("reproduce"):
        target = output_dir(out)
        if case == "all":
            reports = reproduce_all(target, seed)
        elif case.isdigit():
            reports = [reproduce_case(int(case), target, seed)]
        else:
            raise ValidationError(f"case must be 1, 2, 3, 4 or 'all', got {case!r}")
        emit([r.model_dump(mode="json") for r in reports])
