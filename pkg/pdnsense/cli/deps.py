"""Shared loaders and output helpers for CLI commands."""

import json
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import typer
from pydantic import ValidationError as PydanticValidationError

from pdnsense.core.config import settings
from pdnsense.core.error_handlers import render_error
from pdnsense.core.exceptions import ValidationError
from pdnsense.repositories.signature import SignatureStore, get_signature_store
from pdnsense.schemas.enums import Metric, PoolingRule
from pdnsense.schemas.experiment import ExperimentSpec
from pdnsense.schemas.network import PdnNetwork
from pdnsense.schemas.stats import MetricConfig
from pdnsense.services.pdn import load_network, reference_network
from pdnsense.services.stats import default_metric_config
from pdnsense.services.tamper import apply, load_event

DEFAULT_CONFIG_NAME = "network.json"


def emit(payload: Any) -> None:
    """Print a command result as JSON on stdout."""
    typer.echo(json.dumps(payload, indent=2, default=str))


@contextmanager
def command_errors(command: str) -> Iterator[None]:
    """Turn any failure into the error document on stdout and exit code 1."""
    try:
        yield
    except typer.Exit:
        raise
    except Exception as e:
        emit(render_error(e, command))
        raise typer.Exit(code=1) from e


def build_spec(**fields: Any) -> ExperimentSpec:
    try:
        return ExperimentSpec(**{k: v for k, v in fields.items() if v is not None})
    except PydanticValidationError as e:
        message = "; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors())
        raise ValidationError(message) from e


def get_network(config: Path | None) -> PdnNetwork:
    """Network from ``--config``, else ``CONFIG_DIR/network.json``, else the reference topology."""
    if config is not None:
        return load_network(config)
    default = settings.CONFIG_DIR / DEFAULT_CONFIG_NAME
    if default.is_file():
        return load_network(default)
    return reference_network()


def get_device_network(config: Path | None, scenario: str | None) -> PdnNetwork:
    net = get_network(config)
    if scenario is None:
        return net
    return apply(net, load_event(scenario))


def get_store(root: Path | None) -> SignatureStore:
    return get_signature_store(root)


def get_metric_config(metric: Metric | None, pooling: PoolingRule | None) -> MetricConfig:
    cfg = default_metric_config()
    update: dict[str, Any] = {}
    if metric is not None:
        update["metric"] = metric
    if pooling is not None:
        update["pooling"] = pooling
    return cfg.model_copy(update=update)


def output_dir(out: Path | None) -> Path:
    path = out or settings.OUTPUT_DIR
    path.mkdir(parents=True, exist_ok=True)
    return path
