"""Signature store commands."""

from pathlib import Path
from typing import Annotated

import typer

from pdnsense.cli.deps import command_errors, emit, get_store

router = typer.Typer(help="Manage the golden signature store.", no_args_is_help=True)


@router.command("list")
def list_signatures(
    device_id: Annotated[str | None, typer.Option(help="Only this device")] = None,
    unused_only: Annotated[bool, typer.Option(help="Hide consumed signatures")] = False,
    store: Annotated[Path | None, typer.Option(help="Signature store directory")] = None,
) -> None:
    """List stored signatures, oldest first."""
    with command_errors("signatures list"):
        entries = get_store(store).list_signatures(device_id=device_id, unused_only=unused_only)
        emit([{"signature_id": sid, **entry.model_dump(mode="json")} for sid, entry in entries])


@router.command("revoke")
def revoke(
    signature_id: Annotated[str, typer.Argument(help="Signature to delete")],
    store: Annotated[Path | None, typer.Option(help="Signature store directory")] = None,
) -> None:
    """Delete a signature and its index entry."""
    with command_errors("signatures revoke"):
        get_store(store).revoke(signature_id)
        emit({"revoked": signature_id})
