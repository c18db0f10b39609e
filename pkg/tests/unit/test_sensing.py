"""Unit tests for the monitor mesh, TDC model and trace-set acquisition."""

from pathlib import Path

import numpy as np
import pytest

from pdnsense.core.config import settings
from pdnsense.core.exceptions import ValidationError
from pdnsense.schemas.enums import PhaseModel
from pdnsense.schemas.sensing import AcquisitionConfig, ActuatorModel, MonitorBlock, SensorModel
from pdnsense.services.sensing import (
    acquire,
    calibrate,
    codes_to_impedance,
    monitor_blocks,
    read_tdc,
    read_trace_set,
    ripple_amplitudes,
    write_trace_set,
)

SENSORS = [0, 8, 16, 24]


@pytest.fixture
def blocks(reference_net) -> list[MonitorBlock]:
    return monitor_blocks(reference_net)


class TestReadTdc:
    """Tests for the delay-line quantizer."""

    def test_droop_free_reading(self) -> None:
        """Test that +5 mV above nominal reads base + 5 codes."""
        sensor = SensorModel(noise_sigma=0.0)

        assert read_tdc(sensor, 0.855, np.random.default_rng(0)) == 37

    @pytest.mark.parametrize(("v", "code"), [(0.95, 64), (0.70, 0)])
    def test_codes_clamp_to_delay_line(self, v: float, code: int) -> None:
        """Test that readings saturate at 0 and taps."""
        sensor = SensorModel(noise_sigma=0.0)

        assert read_tdc(sensor, v, np.random.default_rng(0)) == code

    def test_noise_is_seeded(self) -> None:
        """Test that equal generators give equal noisy readings."""
        sensor = SensorModel()
        first = [read_tdc(sensor, 0.85, np.random.default_rng(7)) for _ in range(3)]

        assert first == [read_tdc(sensor, 0.85, np.random.default_rng(7)) for _ in range(3)]


class TestMonitorMesh:
    """Tests for the block layout and calibration."""

    def test_blocks_map_rows_to_grid_nodes(self, blocks: list[MonitorBlock]) -> None:
        """Test that 32 blocks in rows of 8 sit on c0_0..c0_3."""
        assert len(blocks) == 32
        assert blocks[9].sensor_node == "c0_1"
        assert blocks[31].actuator_node == "c0_3"

    def test_too_many_rows(self, reference_net) -> None:
        """Test that a mesh with more rows than grid nodes is refused."""
        with pytest.raises(ValidationError):
            monitor_blocks(reference_net, grid_size=40)

    def test_calibrate_centers_delay_line(self, reference_net, blocks: list[MonitorBlock]) -> None:
        """Test that calibration resets base code and nominal voltage."""
        skewed = SensorModel(base_code=10, v_nominal=0.9)

        calibrated = calibrate(skewed, reference_net, blocks[0])

        assert calibrated.base_code == 32
        assert calibrated.v_nominal == pytest.approx(settings.SUPPLY_VOLTAGE)

    def test_calibrate_rejects_foreign_node(self, reference_net) -> None:
        """Test that a sensor outside the verifier chiplet cannot be calibrated."""
        block = MonitorBlock(id=0, sensor_node="c1_0", actuator_node="c1_0")

        with pytest.raises(ValidationError):
            calibrate(SensorModel(), reference_net, block)


class TestRipple:
    """Tests for the ripple model."""

    def test_linear_in_current(self, reference_net, blocks: list[MonitorBlock], band) -> None:
        """Test that doubling the actuator current doubles the ripple."""
        single = ripple_amplitudes(reference_net, blocks, [0, 8], SENSORS, band, ActuatorModel(current_amplitude=0.05))
        double = ripple_amplitudes(reference_net, blocks, [0, 8], SENSORS, band, ActuatorModel(current_amplitude=0.1))

        np.testing.assert_allclose(double, 2 * single, rtol=1e-12)

    def test_identical_actuators_superpose(self, reference_net, blocks: list[MonitorBlock], band) -> None:
        """Test that two actuators on one node give exactly twice the single ripple."""
        assert blocks[0].actuator_node == blocks[1].actuator_node == "c0_0"

        single = ripple_amplitudes(reference_net, blocks, [0], [8, 16], band)
        pair = ripple_amplitudes(reference_net, blocks, [0, 1], [8, 16], band)

        np.testing.assert_allclose(pair, 2 * single, rtol=1e-12)

    def test_harmonics_above_solver_range(self, reference_net, blocks: list[MonitorBlock]) -> None:
        """Test that a harmonic past the validity bound is refused."""
        with pytest.raises(ValidationError):
            ripple_amplitudes(reference_net, blocks, [0], [0], [20e9], ActuatorModel(harmonics=2))


class TestAcquire:
    """Tests for trace-set acquisition."""

    def test_shape_and_metadata(self, reference_net, blocks: list[MonitorBlock], band) -> None:
        """Test sample shape, sorted IDs and the recorded seed."""
        trace = acquire(reference_net, blocks, [8, 0], [24, 0, 8], band, traces=20, seed=3)

        assert trace.samples.shape == (len(band), 3, 20)
        assert trace.sensor_ids == (0, 8, 24)
        assert trace.actuator_ids == (0, 8)
        assert trace.seed == 3

    def test_deterministic_in_seed(self, reference_net, blocks: list[MonitorBlock], band) -> None:
        """Test that the same seed reproduces the codes and another seed does not."""
        first = acquire(reference_net, blocks, [0, 8], SENSORS, band, traces=50, seed=11)
        again = acquire(reference_net, blocks, [0, 8], SENSORS, band, traces=50, seed=11)
        other = acquire(reference_net, blocks, [0, 8], SENSORS, band, traces=50, seed=12)

        np.testing.assert_array_equal(first.samples, again.samples)
        assert not np.array_equal(first.samples, other.samples)

    def test_threaded_matches_serial(
        self, reference_net, blocks: list[MonitorBlock], band, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        """Test that per-frequency worker threads do not change the codes."""
        serial = acquire(reference_net, blocks, [0, 8], SENSORS, band, traces=30, seed=5)
        monkeypatch.setattr(settings, "WORKERS", 4)

        threaded = acquire(reference_net, blocks, [0, 8], SENSORS, band, traces=30, seed=5)

        np.testing.assert_array_equal(serial.samples, threaded.samples)

    @pytest.mark.parametrize(
        ("actuators", "sensors", "freqs", "traces"),
        [
            ([], [0], [1.5e9], 10),
            ([0], [], [1.5e9], 10),
            ([0], [99], [1.5e9], 10),
            ([0], [0], [1.5e9], 0),
            ([0], [0], [60e9], 10),
            ([0], [0], [], 10),
        ],
    )
    def test_invalid_requests(
        self,
        reference_net,
        blocks: list[MonitorBlock],
        actuators: list[int],
        sensors: list[int],
        freqs: list[float],
        traces: int,
    ) -> None:
        """Test the validation failures of acquire."""
        with pytest.raises(ValidationError):
            acquire(reference_net, blocks, actuators, sensors, freqs, traces=traces, seed=0)

    def test_crest_codes_track_ripple(self, reference_net, blocks: list[MonitorBlock], band) -> None:
        """Test that noise-free crest codes invert to the ripple within one quantization step."""
        config = AcquisitionConfig(sensor=SensorModel(noise_sigma=0.0))
        trace = acquire(reference_net, blocks, [0], SENSORS, band, traces=5, seed=0, config=config)
        expected = ripple_amplitudes(reference_net, blocks, [0], SENSORS, band) / config.actuator.current_amplitude

        estimate = codes_to_impedance(trace)
        codes = trace.samples[:, :, 0]
        unsaturated = (codes > 0) & (codes < config.sensor.taps)
        assert unsaturated.any()
        step = 1.0 / (config.sensor.gain * config.actuator.current_amplitude)
        assert np.all(np.abs(estimate - expected)[unsaturated] <= 0.5 * step + 1e-12)
        assert np.all(trace.samples == trace.samples[:, :, :1])

    def test_uniform_variance_recovers_amplitude(self, reference_net, blocks: list[MonitorBlock], band) -> None:
        """Test that uniform-phase sampling recovers |Z| from the code variance."""
        config = AcquisitionConfig(phase_model=PhaseModel.UNIFORM)
        trace = acquire(reference_net, blocks, [0], SENSORS, band, traces=2000, seed=1, config=config)
        ripple = ripple_amplitudes(reference_net, blocks, [0], SENSORS, band)
        expected = ripple / config.actuator.current_amplitude

        estimate = codes_to_impedance(trace)
        # keep cells that swing several codes and never touch the rails
        usable = (ripple > 3e-3) & (ripple < 25e-3)
        assert usable.any()
        np.testing.assert_allclose(estimate[usable], expected[usable], rtol=0.15)


class TestTraceSetFiles:
    """Tests for trace-set persistence."""

    def test_write_then_read(self, reference_net, blocks: list[MonitorBlock], band, tmp_path: Path) -> None:
        """Test that the CSV and its sidecar restore the trace set."""
        trace = acquire(reference_net, blocks, [0, 8], SENSORS, band[:4], traces=7, seed=9)

        path = write_trace_set(trace, tmp_path / "traces.csv")
        restored = read_trace_set(path)

        assert path.read_text().startswith("# pdnsense trace-set v1\n")
        assert restored.frequencies == trace.frequencies
        assert restored.acquisition == trace.acquisition
        np.testing.assert_array_equal(restored.samples, trace.samples)
