"""Actuator/TDC mesh simulation and trace-set acquisition."""

import json
from collections.abc import Collection, Sequence
from pathlib import Path

import numpy as np
import pandas as pd

from pdnsense.core.config import settings
from pdnsense.core.exceptions import NotFoundError, ValidationError
from pdnsense.core.logging import get_logger
from pdnsense.core.metrics import ACQUISITION_SECONDS
from pdnsense.schemas.enums import PhaseModel
from pdnsense.schemas.network import PdnNetwork, chiplet_region
from pdnsense.schemas.sensing import AcquisitionConfig, ActuatorModel, MonitorBlock, SensorModel, TraceSet
from pdnsense.services.pdn import map_frequencies, transfer_impedances

logger = get_logger(__name__)

TRACE_SET_HEADER = "# pdnsense trace-set v1"


def default_acquisition() -> AcquisitionConfig:
    """Acquisition parameters from settings."""
    return AcquisitionConfig(
        sensor=SensorModel(
            taps=settings.TDC_TAPS,
            gain=settings.TDC_GAIN,
            v_nominal=settings.SUPPLY_VOLTAGE,
            noise_sigma=settings.NOISE_SIGMA,
            base_code=settings.TDC_TAPS // 2,
        ),
        actuator=ActuatorModel(
            current_amplitude=settings.ACTUATOR_CURRENT,
            harmonics=settings.ACTUATOR_HARMONICS,
        ),
        phase_model=PhaseModel(settings.PHASE_MODEL),
        sampling_rate=settings.SAMPLING_RATE_HZ,
        interval=settings.SENSING_INTERVAL_S,
    )


# --- Monitor mesh ---


def monitor_blocks(net: PdnNetwork, grid_size: int | None = None, columns: int | None = None) -> list[MonitorBlock]:
    """Row-major monitor blocks; block ``i`` sits on verifier grid node ``i // columns``."""
    grid_size = settings.GRID_SIZE if grid_size is None else grid_size
    columns = settings.GRID_COLUMNS if columns is None else columns
    if grid_size < 1 or columns < 1:
        raise ValidationError("grid_size and columns must be positive")
    nodes = net.grid_nodes(net.verifier_chiplet)
    rows = -(-grid_size // columns)
    if rows > len(nodes):
        raise ValidationError(
            f"{grid_size} blocks in rows of {columns} need {rows} verifier grid nodes, network has {len(nodes)}"
        )
    return [
        MonitorBlock(id=i, sensor_node=nodes[i // columns], actuator_node=nodes[i // columns])
        for i in range(grid_size)
    ]


def calibrate(sensor: SensorModel, net: PdnNetwork, block: MonitorBlock) -> SensorModel:
    """Center the delay line on its metastable midpoint at the quiescent supply voltage."""
    region = chiplet_region(net.verifier_chiplet)
    if net.regions.get(block.sensor_node) != region:
        raise ValidationError(f"Sensor node {block.sensor_node} is not on the verifier chiplet")
    # the network carries no DC load, so every on-die node sits at the supply voltage
    return sensor.model_copy(update={"base_code": sensor.taps // 2, "v_nominal": settings.SUPPLY_VOLTAGE})


def _quantize(sensor: SensorModel, v: np.ndarray) -> np.ndarray:
    codes = np.floor(sensor.base_code + sensor.gain * (v - sensor.v_nominal) + 0.5)
    return np.clip(codes, 0, sensor.taps).astype(np.int64)


def read_tdc(sensor: SensorModel, v: float, rng: np.random.Generator) -> int:
    """One TDC conversion of node voltage ``v``."""
    noise = rng.normal(0.0, sensor.noise_sigma) if sensor.noise_sigma > 0 else 0.0
    return int(_quantize(sensor, np.asarray(v + noise))[()])


# --- Ripple ---


def _harmonic_orders(actuator: ActuatorModel) -> list[int]:
    return [2 * h + 1 for h in range(actuator.harmonics)]


def _select(blocks: Sequence[MonitorBlock], ids: Collection[int], role: str) -> list[MonitorBlock]:
    if not ids:
        raise ValidationError(f"At least one active {role} is required")
    by_id = {b.id: b for b in blocks}
    unknown = sorted(set(ids) - set(by_id))
    if unknown:
        raise ValidationError(f"Active {role} IDs {unknown} are not monitor blocks")
    return [by_id[i] for i in sorted(set(ids))]


def _ripple_phasors(
    net: PdnNetwork,
    actuators: list[MonitorBlock],
    sensors: list[MonitorBlock],
    freqs: np.ndarray,
    actuator: ActuatorModel,
) -> np.ndarray:
    """Complex ripple phasors, shape (frequencies, harmonics, sensors)."""
    orders = _harmonic_orders(actuator)
    all_freqs = np.concatenate([k * freqs for k in orders])
    if all_freqs.max() > settings.MAX_FREQUENCY_HZ:
        raise ValidationError(
            f"Harmonic {all_freqs.max():.6g} Hz is outside solver validity (max {settings.MAX_FREQUENCY_HZ:.6g} Hz)"
        )
    z = transfer_impedances(
        net, [b.actuator_node for b in actuators], [b.sensor_node for b in sensors], all_freqs
    )
    summed = z.sum(axis=2).reshape(len(orders), freqs.size, len(sensors))
    weights = actuator.current_amplitude / np.asarray(orders, dtype=float)
    return np.transpose(summed * weights[:, None, None], (1, 0, 2))


def ripple_amplitudes(
    net: PdnNetwork,
    blocks: Sequence[MonitorBlock],
    active_actuators: Collection[int],
    active_sensors: Collection[int],
    freqs: Sequence[float],
    actuator: ActuatorModel | None = None,
) -> np.ndarray:
    """Fundamental ripple amplitude |sum_a Z(a->s, f)| * I per (frequency, sensor), in volts."""
    actuator = actuator or default_acquisition().actuator
    phasors = _ripple_phasors(
        net,
        _select(blocks, active_actuators, "actuator"),
        _select(blocks, active_sensors, "sensor"),
        np.asarray(freqs, dtype=float),
        actuator,
    )
    amplitudes: np.ndarray = np.abs(phasors[:, 0, :])
    return amplitudes


# --- Acquisition ---


def acquire(
    net: PdnNetwork,
    blocks: Sequence[MonitorBlock],
    active_actuators: Collection[int],
    active_sensors: Collection[int],
    freqs: Sequence[float],
    traces: int,
    seed: int,
    config: AcquisitionConfig | None = None,
) -> TraceSet:
    """Drive the active actuators at each frequency and record ``traces`` TDC codes per sensor.

    Frequency ``i`` draws from ``SeedSequence(seed, spawn_key=(i,))``, so serial and
    threaded runs return identical trace sets.

    Raises:
        ValidationError: On empty active sets, unknown IDs, ``traces`` < 1 or
            frequencies outside solver validity.
    """
    config = config or default_acquisition()
    if traces < 1:
        raise ValidationError(f"traces must be at least 1, got {traces}")
    if len(freqs) == 0:
        raise ValidationError("At least one frequency is required")
    actuators = _select(blocks, active_actuators, "actuator")
    sensors = _select(blocks, active_sensors, "sensor")
    values = np.asarray(freqs, dtype=float)

    with ACQUISITION_SECONDS.time():
        phasors = _ripple_phasors(net, actuators, sensors, values, config.actuator)
        calibrated = calibrate(config.sensor, net, sensors[0])
        orders = np.asarray(_harmonic_orders(config.actuator), dtype=float)

        def sample(i: int) -> np.ndarray:
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
            p = phasors[i]  # (harmonics, sensors)
            if config.phase_model is PhaseModel.CREST:
                phase = -np.angle(p[0])  # per sensor
                ripple = np.real(p * np.exp(1j * orders[:, None] * phase[None, :])).sum(axis=0)
                v = np.repeat(calibrated.v_nominal - ripple[:, None], traces, axis=1)
            else:
                # one sampling instant is shared by every sensor
                phase = rng.uniform(0.0, 2 * np.pi, size=traces)
                rotation = np.exp(1j * orders[:, None] * phase[None, :])  # (harmonics, traces)
                ripple = np.real(p[:, :, None] * rotation[:, None, :]).sum(axis=0)
                v = calibrated.v_nominal - ripple
            if calibrated.noise_sigma > 0:
                v = v + rng.normal(0.0, calibrated.noise_sigma, size=v.shape)
            return _quantize(calibrated, v)

        samples = np.stack(map_frequencies(sample, values.size))

    trace_set = TraceSet(
        frequencies=tuple(float(f) for f in values),
        sensor_ids=tuple(b.id for b in sensors),
        actuator_ids=tuple(b.id for b in actuators),
        samples=samples,
        seed=seed,
        acquisition=config.model_copy(update={"sensor": calibrated}),
    )
    logger.info(
        "Trace set acquired",
        frequencies=values.size,
        actuators=len(actuators),
        sensors=len(sensors),
        traces=traces,
        phase_model=config.phase_model.value,
    )
    return trace_set


def codes_to_impedance(trace: TraceSet) -> np.ndarray:
    """Back-convert each (frequency, sensor) cell to an estimate of |sum_a Z| in ohms.

    Crest sampling reads the droop directly from the mean code. Uniform sampling
    recovers the amplitude from the arcsine variance after removing noise and
    quantization variance. Only the fundamental is inverted.
    """
    config = trace.acquisition
    sensor, actuator = config.sensor, config.actuator
    scale = sensor.gain * actuator.current_amplitude
    codes = trace.samples.astype(float)
    if config.phase_model is PhaseModel.CREST:
        estimate = (sensor.base_code - codes.mean(axis=2)) / scale
    else:
        excess = codes.var(axis=2, ddof=1) - (sensor.gain * sensor.noise_sigma) ** 2 - 1.0 / 12.0
        estimate = np.sqrt(2.0 * np.maximum(excess, 0.0)) / scale
    result: np.ndarray = estimate
    return result


# --- Persistence ---


def write_trace_set(trace: TraceSet, path: Path) -> Path:
    """Write the trace-set CSV and its JSON sidecar (``<path>.json``)."""
    f_idx, s_idx, t_idx = np.indices(trace.samples.shape)
    frame = pd.DataFrame(
        {
            "frequency_hz": np.asarray(trace.frequencies)[f_idx.ravel()],
            "sensor_id": np.asarray(trace.sensor_ids)[s_idx.ravel()],
            "sample_index": t_idx.ravel(),
            "code": trace.samples.ravel(),
        }
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        handle.write(TRACE_SET_HEADER + "\n")
        frame.to_csv(handle, index=False)

    sidecar = {
        "frequencies": list(trace.frequencies),
        "sensor_ids": list(trace.sensor_ids),
        "actuator_ids": list(trace.actuator_ids),
        "traces": trace.traces,
        "seed": trace.seed,
        "acquisition": trace.acquisition.model_dump(mode="json"),
    }
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2))
    return path


def read_trace_set(path: Path) -> TraceSet:
    """Restore a trace set written by ``write_trace_set``."""
    sidecar_path = path.with_suffix(".json")
    if not path.is_file() or not sidecar_path.is_file():
        raise NotFoundError(f"Trace set {path}")
    sidecar = json.loads(sidecar_path.read_text())
    frame = pd.read_csv(path, comment="#")
    frame = frame.sort_values(["frequency_hz", "sensor_id", "sample_index"])
    shape = (len(sidecar["frequencies"]), len(sidecar["sensor_ids"]), sidecar["traces"])
    return TraceSet(
        frequencies=tuple(sidecar["frequencies"]),
        sensor_ids=tuple(sidecar["sensor_ids"]),
        actuator_ids=tuple(sidecar["actuator_ids"]),
        samples=frame["code"].to_numpy().reshape(shape),
        seed=sidecar["seed"],
        acquisition=AcquisitionConfig.model_validate(sidecar["acquisition"]),
    )
