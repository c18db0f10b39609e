"""Challenge-response flow: key generation, enrollment and one-time verification."""

from collections.abc import Sequence

import numpy as np

from pdnsense.core.config import settings
from pdnsense.core.exceptions import SignatureReuseError, ValidationError
from pdnsense.core.logging import get_logger
from pdnsense.core.metrics import ENROLLMENTS, REPLAY_REJECTIONS, VERIFICATIONS
from pdnsense.repositories.signature import SignatureStore
from pdnsense.schemas.enums import SummaryMode
from pdnsense.schemas.network import PdnNetwork
from pdnsense.schemas.protocol import GoldenSignature, VerificationKey
from pdnsense.schemas.sensing import AcquisitionConfig
from pdnsense.schemas.stats import MetricConfig, Verdict
from pdnsense.services.sensing import acquire, monitor_blocks
from pdnsense.services.stats import decide, summarize

logger = get_logger(__name__)


def derive_nonce(seed: int) -> int:
    """64-bit nonce drawn from the seed's entropy pool."""
    high, low = np.random.SeedSequence(seed).generate_state(2, dtype=np.uint32)
    return (int(high) << 32) | int(low)


def signature_id_for(device_id: str, nonce: int) -> str:
    return f"{device_id}-{nonce:016x}"


def generate_key(grid_size: int, k: int, m: int, band: Sequence[float], n: int, seed: int) -> VerificationKey:
    """Draw a verification key uniformly without replacement.

    Args:
        grid_size: Number of monitor blocks.
        k: Actuators to select.
        m: Sensors to select.
        band: Candidate frequencies, strictly increasing.
        n: Frequencies to select.
        seed: Key seed; identical seeds give identical keys.

    Raises:
        ValidationError: If K, M or N exceed their pools or are below 1.
    """
    for name, value, pool in (("K", k, grid_size), ("M", m, grid_size), ("N", n, len(band))):
        if value < 1:
            raise ValidationError(f"{name} must be at least 1, got {value}")
        if value > pool:
            raise ValidationError(f"{name}={value} exceeds the pool size {pool}")

    rng = np.random.default_rng(seed)
    actuators = np.sort(rng.choice(grid_size, size=k, replace=False))
    sensors = np.sort(rng.choice(grid_size, size=m, replace=False))
    chosen = np.sort(rng.choice(len(band), size=n, replace=False))
    return VerificationKey(
        actuator_ids=tuple(int(i) for i in actuators),
        sensor_ids=tuple(int(i) for i in sensors),
        frequencies=tuple(float(band[int(i)]) for i in chosen),
        nonce=derive_nonce(seed),
        grid_size=grid_size,
    )


def enroll(
    net: PdnNetwork,
    key: VerificationKey,
    traces: int,
    seed: int,
    store: SignatureStore,
    device_id: str | None = None,
    mode: SummaryMode | None = None,
    resolution: int | None = None,
    config: AcquisitionConfig | None = None,
) -> GoldenSignature:
    """Acquire a golden trace set on the trusted network and persist its summary.

    Nothing is written when the acquisition fails.
    """
    device_id = device_id or settings.DEVICE_ID
    mode = mode or SummaryMode(settings.SUMMARY_MODE)
    resolution = resolution or settings.QUANTILE_RESOLUTION

    blocks = monitor_blocks(net, key.grid_size)
    trace = acquire(net, blocks, key.actuator_ids, key.sensor_ids, key.frequencies, traces, seed, config)
    signature = GoldenSignature(
        signature_id=signature_id_for(device_id, key.nonce),
        key=key,
        trace_summary=summarize(trace, mode, resolution),
        device_id=device_id,
        seed=seed,
    )
    store.save(signature)
    ENROLLMENTS.inc()
    logger.info(
        "Golden signature enrolled",
        signature_id=signature.signature_id,
        key_id=key.key_id,
        traces=traces,
        mode=mode.value,
    )
    return signature


def enroll_batch(
    net: PdnNetwork,
    count: int,
    key_seed: int,
    acq_seed: int,
    traces: int,
    store: SignatureStore,
    band: Sequence[float],
    k: int | None = None,
    m: int | None = None,
    n: int | None = None,
    grid_size: int | None = None,
    device_id: str | None = None,
    mode: SummaryMode | None = None,
) -> list[GoldenSignature]:
    """Pre-record ``count`` signatures with consecutive key and acquisition seeds."""
    if count < 1:
        raise ValidationError(f"count must be at least 1, got {count}")
    grid_size = grid_size or settings.GRID_SIZE
    signatures = []
    for i in range(count):
        key = generate_key(
            grid_size,
            k or settings.KEY_ACTUATORS,
            m or settings.KEY_SENSORS,
            band,
            n or len(band),
            key_seed + i,
        )
        signatures.append(enroll(net, key, traces, acq_seed + i, store, device_id=device_id, mode=mode))
    return signatures


def verify(
    device_net: PdnNetwork,
    signature: GoldenSignature,
    traces: int,
    seed: int,
    store: SignatureStore,
    metric_config: MetricConfig | None = None,
) -> Verdict:
    """Test a field device against a one-time golden signature.

    The signature is consumed once the fresh acquisition exists, whatever the
    outcome.

    Raises:
        SignatureReuseError: If the signature was already used; no acquisition runs.
    """
    stored = store.load(signature.signature_id)
    if stored.used:
        REPLAY_REJECTIONS.inc()
        logger.warning("Replay rejected", signature_id=signature.signature_id)
        raise SignatureReuseError(signature.signature_id)

    key = stored.key
    blocks = monitor_blocks(device_net, key.grid_size)
    trace = acquire(
        device_net,
        blocks,
        key.actuator_ids,
        key.sensor_ids,
        key.frequencies,
        traces,
        seed,
        stored.trace_summary.acquisition,
    )
    try:
        store.mark_used(signature.signature_id)
    except SignatureReuseError:
        REPLAY_REJECTIONS.inc()
        raise

    verdict = decide(stored.trace_summary, trace, metric_config)
    verdict = verdict.model_copy(update={"signature_id": signature.signature_id})
    VERIFICATIONS.labels(decision=verdict.decision.value).inc()
    logger.info(
        "Device verified",
        signature_id=signature.signature_id,
        decision=verdict.decision.value,
        triggering_metric=verdict.triggering_metric.value,
    )
    return verdict
