"""Unit tests for key generation, enrollment and verification."""

import numpy as np
import pytest

from pdnsense.core.exceptions import ConflictError, SignatureReuseError, ValidationError
from pdnsense.core.metrics import registry
from pdnsense.repositories.signature import SignatureStore
from pdnsense.schemas.enums import Decision, SummaryMode
from pdnsense.schemas.protocol import VerificationKey
from pdnsense.services import protocol
from pdnsense.services.protocol import derive_nonce, enroll, enroll_batch, generate_key, verify
from pdnsense.services.tamper import apply, get_preset


def _counter(name: str, **labels: str) -> float:
    return registry.get_sample_value(name, labels) or 0.0


class TestGenerateKey:
    """Tests for verification key generation."""

    def test_deterministic(self, band) -> None:
        """Test that a seed fully determines the key."""
        assert generate_key(32, 2, 4, band, 8, seed=42) == generate_key(32, 2, 4, band, 8, seed=42)

    def test_shape(self, band) -> None:
        """Test sorted distinct IDs and frequencies taken from the band."""
        key = generate_key(32, 2, 4, band, 8, seed=1)

        assert len(key.actuator_ids) == 2 and len(key.sensor_ids) == 4
        assert list(key.sensor_ids) == sorted(set(key.sensor_ids))
        assert set(key.frequencies) <= set(band)
        assert key.nonce == derive_nonce(1)

    def test_nonce_is_64_bit(self) -> None:
        """Test that nonces use the full 64-bit range."""
        nonces = [derive_nonce(s) for s in range(200)]

        assert len(set(nonces)) == 200
        assert all(0 <= n < 2**64 for n in nonces)
        assert max(nonces) >= 2**63 // 2

    @pytest.mark.parametrize(
        ("k", "m", "n", "name"),
        [(0, 4, 8, "K"), (40, 4, 8, "K"), (2, 33, 8, "M"), (2, 4, 30, "N"), (2, 4, 0, "N")],
    )
    def test_out_of_pool(self, band, k: int, m: int, n: int, name: str) -> None:
        """Test that an oversized or empty selection names its parameter."""
        with pytest.raises(ValidationError, match=rf"^{name}"):
            generate_key(32, k, m, band, n, seed=0)

    def test_keys_do_not_repeat(self) -> None:
        """Test that 2000 seeds give 2000 distinct selections."""
        band = np.geomspace(1e9, 2e9, 64)
        keys = [generate_key(32, 4, 4, band, 8, seed=s) for s in range(2000)]

        assert len({(k.actuator_ids, k.sensor_ids, k.frequencies) for k in keys}) == 2000
        assert len({k.nonce for k in keys}) == 2000

    @pytest.mark.slow
    def test_keys_do_not_repeat_at_scale(self) -> None:
        """Test uniqueness over 100000 seeds."""
        band = np.geomspace(1e9, 2e9, 64)
        keys = [generate_key(32, 4, 4, band, 8, seed=s) for s in range(100_000)]

        assert len({(k.actuator_ids, k.sensor_ids, k.frequencies) for k in keys}) == 100_000
        assert len({k.nonce for k in keys}) == 100_000


class TestEnroll:
    """Tests for golden signature enrollment."""

    def test_stores_signature(self, reference_net, band, store: SignatureStore) -> None:
        """Test that enrollment persists an unused signature and counts it."""
        key = generate_key(32, 2, 4, band, 6, seed=3)
        before = _counter("pdnsense_enrollments_total")

        signature = enroll(reference_net, key, traces=50, seed=4, store=store, device_id="board-7")

        assert signature.signature_id == f"board-7-{key.nonce:016x}"
        assert not signature.used
        assert store.load(signature.signature_id).key == key
        assert signature.trace_summary.traces == 50
        assert _counter("pdnsense_enrollments_total") == before + 1

    def test_bit_exact(self, reference_net, band, store: SignatureStore, tmp_path) -> None:
        """Test that the same key and seed reproduce the same golden codes."""
        key = generate_key(32, 2, 4, band, 6, seed=3)
        other = SignatureStore(tmp_path / "other")

        first = enroll(reference_net, key, traces=40, seed=9, store=store)
        second = enroll(reference_net, key, traces=40, seed=9, store=other)

        assert first.trace_summary.samples == second.trace_summary.samples

    def test_disjoint_sensor_keys_differ(self, reference_net, band, store: SignatureStore) -> None:
        """Test that keys with disjoint sensor sets yield different golden summaries."""
        near = VerificationKey(actuator_ids=(0,), sensor_ids=(8, 16), frequencies=band, nonce=1)
        far = VerificationKey(actuator_ids=(0,), sensor_ids=(24, 25), frequencies=band, nonce=2)

        first = enroll(reference_net, near, traces=40, seed=9, store=store)
        second = enroll(reference_net, far, traces=40, seed=9, store=store)

        assert np.asarray(first.trace_summary.samples).shape == np.asarray(second.trace_summary.samples).shape
        assert first.trace_summary.samples != second.trace_summary.samples

    def test_quantile_mode(self, reference_net, band, store: SignatureStore) -> None:
        """Test the compact summary mode."""
        key = generate_key(32, 2, 4, band, 4, seed=5)

        signature = enroll(reference_net, key, 40, 1, store, mode=SummaryMode.QUANTILES, resolution=11)

        assert signature.trace_summary.samples is None
        assert np.asarray(signature.trace_summary.quantiles).shape == (4, 4, 11)

    def test_duplicate_nonce(self, reference_net, band, store: SignatureStore) -> None:
        """Test that a key cannot be enrolled twice for the same device."""
        key = generate_key(32, 2, 4, band, 4, seed=3)
        enroll(reference_net, key, 20, 1, store)

        with pytest.raises(ConflictError):
            enroll(reference_net, key, 20, 2, store)

    def test_failed_acquisition_writes_nothing(self, reference_net, band, store: SignatureStore) -> None:
        """Test that an invalid trace count leaves the store empty."""
        key = generate_key(32, 2, 4, band, 4, seed=3)

        with pytest.raises(ValidationError):
            enroll(reference_net, key, 0, 1, store)
        assert store.list_signatures() == []

    def test_batch(self, reference_net, band, store: SignatureStore) -> None:
        """Test consecutive seeds across a batch."""
        signatures = enroll_batch(reference_net, 3, key_seed=10, acq_seed=20, traces=20, store=store, band=band, n=4)

        assert [s.seed for s in signatures] == [20, 21, 22]
        assert [s.key.nonce for s in signatures] == [derive_nonce(s) for s in (10, 11, 12)]
        assert len(store.list_signatures()) == 3

    def test_batch_count(self, reference_net, band, store: SignatureStore) -> None:
        """Test that an empty batch is refused."""
        with pytest.raises(ValidationError):
            enroll_batch(reference_net, 0, 0, 0, 20, store, band)


class TestVerify:
    """Tests for one-time verification."""

    def test_clean_device(self, reference_net, band, store: SignatureStore) -> None:
        """Test that the untouched device passes and consumes the signature."""
        key = generate_key(32, 2, 4, band, len(band), seed=0)
        signature = enroll(reference_net, key, 500, 1, store)
        before = _counter("pdnsense_verifications_total", decision="clean")

        verdict = verify(reference_net, signature, 500, 2, store)

        assert verdict.decision is Decision.CLEAN
        assert verdict.signature_id == signature.signature_id
        assert store.load(signature.signature_id).used
        assert _counter("pdnsense_verifications_total", decision="clean") == before + 1

    def test_trojan_detected(self, reference_net, band, store: SignatureStore) -> None:
        """Test that a dormant Trojan on the neighbouring chiplet is caught."""
        key = generate_key(32, 2, 4, band, len(band), seed=0)
        signature = enroll(reference_net, key, 500, 1, store)
        device = apply(reference_net, get_preset("trojan").event)

        verdict = verify(device, signature, 500, 2, store)

        assert verdict.decision is Decision.TAMPERED
        assert verdict.max_abs_t > 4.5

    def test_replay_rejected_before_acquisition(
        self, reference_net, band, store: SignatureStore, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        """Test that a used signature is refused without driving the actuators."""
        key = generate_key(32, 2, 4, band, 4, seed=0)
        signature = enroll(reference_net, key, 20, 1, store)
        verify(reference_net, signature, 20, 2, store)
        before = _counter("pdnsense_replay_rejections_total")

        def forbidden(*args: object, **kwargs: object) -> None:
            raise AssertionError("acquisition ran for a replayed signature")

        monkeypatch.setattr(protocol, "acquire", forbidden)

        with pytest.raises(SignatureReuseError):
            verify(reference_net, signature, 20, 3, store)
        assert _counter("pdnsense_replay_rejections_total") == before + 1

    def test_acquisition_uses_golden_settings(self, reference_net, band, store: SignatureStore) -> None:
        """Test that the test acquisition reuses the enrolled sensor and actuator models."""
        key = generate_key(32, 2, 4, band, 4, seed=0)
        signature = enroll(reference_net, key, 30, 1, store)

        verdict = verify(reference_net, signature, 30, 2, store)

        assert verdict.golden_traces == 30
        assert verdict.test_traces == 30
        assert len(verdict.per_frequency) == 4
