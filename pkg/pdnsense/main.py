import typer

from pdnsense.cli.router import register_commands
from pdnsense.core.config import settings
from pdnsense.core.logging import configure_logging, get_logger
from pdnsense.core.metrics import export_metrics

logger = get_logger(__name__)


def _export_metrics() -> None:
    if settings.METRICS_TEXTFILE is not None:
        export_metrics(settings.METRICS_TEXTFILE)


def create_application() -> typer.Typer:
    """Create and configure the command line application."""

    app = typer.Typer(
        name=settings.PROJECT_NAME,
        help="Simulate PDN-impedance tamper verification of multi-chiplet packages.",
        no_args_is_help=True,
        pretty_exceptions_enable=settings.DEBUG,
    )

    @app.callback()
    def startup(ctx: typer.Context) -> None:
        configure_logging()
        logger.debug("Command started", command=ctx.invoked_subcommand, environment=settings.ENVIRONMENT)
        ctx.call_on_close(_export_metrics)

    register_commands(app)
    return app


app = create_application()


def run() -> None:
    app()
