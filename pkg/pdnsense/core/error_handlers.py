from typing import Any

from pdnsense.core.exceptions import PdnSenseError, SolveError
from pdnsense.core.logging import get_logger
from pdnsense.core.metrics import SOLVER_FAILURES

logger = get_logger(__name__)


def render_error(exc: Exception, command: str | None = None) -> dict[str, Any]:
    """Log an exception and build its machine-readable error document."""
    if isinstance(exc, PdnSenseError):
        logger.error(
            "Command failed",
            command=command,
            error_type=exc.__class__.__name__,
            detail=exc.detail,
        )
        if isinstance(exc, SolveError):
            SOLVER_FAILURES.inc()
        return {
            "error": {
                "type": exc.__class__.__name__,
                "message": exc.detail,
                "exit_code": exc.exit_code,
            }
        }

    logger.error(
        "Unexpected error occurred",
        command=command,
        error=str(exc),
        exc_info=True,
    )
    return {
        "error": {
            "type": "InternalError",
            "message": "An unexpected error occurred",
            "exit_code": 1,
        }
    }
