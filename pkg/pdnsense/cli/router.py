import typer

from pdnsense.cli.commands import acquire, enroll, network, reproduce, scenarios, signatures, verify


def register_commands(app: typer.Typer) -> None:
    """Attach every command and command group to ``app``."""
    app.command("enroll")(enroll.enroll)
    app.command("verify")(verify.verify)
    app.command("reproduce")(reproduce.reproduce)
    app.command("acquire")(acquire.acquire)
    app.add_typer(network.router, name="network")
    app.add_typer(scenarios.router, name="scenarios")
    app.add_typer(signatures.router, name="signatures")
