"""Unit tests for the file-backed signature store."""

from pathlib import Path

import pytest

from pdnsense.core.exceptions import (
    ConflictError,
    NotFoundError,
    SignatureReuseError,
    StoreWriteError,
    ValidationError,
)
from pdnsense.repositories.signature import SignatureStore, get_signature_store


class TestSaveAndLoad:
    """Tests for persisting signatures."""

    def test_round_trip(self, store: SignatureStore, signature_factory) -> None:
        """Test that a saved signature loads back unchanged."""
        signature = signature_factory()

        path = store.save(signature)

        assert path == store.path_for(signature.signature_id)
        assert store.load(signature.signature_id) == signature
        assert store.load_path(path) == signature

    def test_duplicate_id(self, store: SignatureStore, signature_factory) -> None:
        """Test that the same signature cannot be saved twice."""
        store.save(signature_factory())

        with pytest.raises(ConflictError):
            store.save(signature_factory())

    def test_duplicate_device_nonce(self, store: SignatureStore, signature_factory) -> None:
        """Test that a second signature for the same device and nonce is refused."""
        store.save(signature_factory())
        twin = signature_factory().model_copy(update={"signature_id": "another-id"})

        with pytest.raises(ConflictError):
            store.save(twin)

    def test_same_nonce_other_device(self, store: SignatureStore, signature_factory) -> None:
        """Test that nonces are unique per device only."""
        store.save(signature_factory(device_id="a"))
        store.save(signature_factory(device_id="b"))

        assert len(store.list_signatures()) == 2

    def test_missing(self, store: SignatureStore) -> None:
        """Test that an unknown ID is not found."""
        with pytest.raises(NotFoundError):
            store.load("nope")

    def test_corrupt_document(self, store: SignatureStore, signature_factory) -> None:
        """Test that an unreadable document is a validation error."""
        signature = signature_factory()
        path = store.save(signature)
        path.write_text('{"signature_id": "dev"}')

        with pytest.raises(ValidationError):
            store.load(signature.signature_id)


class TestOneTimeUse:
    """Tests for consuming signatures."""

    def test_mark_used_once(self, store: SignatureStore, signature_factory) -> None:
        """Test that a signature can be consumed exactly once."""
        signature = signature_factory()
        store.save(signature)

        consumed = store.mark_used(signature.signature_id)

        assert consumed.used
        assert store.load(signature.signature_id).used
        with pytest.raises(SignatureReuseError):
            store.mark_used(signature.signature_id)

    def test_reuse_is_a_conflict(self) -> None:
        """Test that replay errors are conflicts."""
        assert issubclass(SignatureReuseError, ConflictError)

    def test_unused_listing(self, store: SignatureStore, signature_factory) -> None:
        """Test that consumed signatures drop out of the unused listing."""
        for nonce in (1, 2, 3):
            store.save(signature_factory(nonce=nonce))
        store.mark_used("dev-0000000000000001")

        unused = [sid for sid, _ in store.list_signatures(unused_only=True)]

        assert unused == ["dev-0000000000000002", "dev-0000000000000003"]
        assert store.next_unused("dev").signature_id == "dev-0000000000000002"

    def test_next_unused_exhausted(self, store: SignatureStore, signature_factory) -> None:
        """Test that a device with no unused signatures has none to give."""
        store.save(signature_factory())
        store.mark_used("dev-0000000000000001")

        with pytest.raises(NotFoundError):
            store.next_unused("dev")

    def test_device_filter(self, store: SignatureStore, signature_factory) -> None:
        """Test listing one device's signatures."""
        store.save(signature_factory(device_id="a"))
        store.save(signature_factory(device_id="b", nonce=2))

        assert [e.device_id for _, e in store.list_signatures(device_id="b")] == ["b"]


class TestRevokeAndClear:
    """Tests for removing signatures."""

    def test_revoke(self, store: SignatureStore, signature_factory) -> None:
        """Test that revoking removes the document and the index entry."""
        signature = signature_factory()
        path = store.save(signature)

        store.revoke(signature.signature_id)

        assert not path.exists()
        assert store.list_signatures() == []

    def test_revoke_unknown(self, store: SignatureStore) -> None:
        """Test that revoking an unknown ID is not found."""
        with pytest.raises(NotFoundError):
            store.revoke("nope")

    def test_clear(self, store: SignatureStore, signature_factory) -> None:
        """Test that clear reports how many signatures it removed."""
        for nonce in (1, 2):
            store.save(signature_factory(nonce=nonce))

        assert store.clear() == 2
        assert store.list_signatures() == []
        assert not store.index_path.exists()


class TestWriteRetries:
    """Tests for retried writes."""

    def test_transient_failure_is_retried(
        self, store: SignatureStore, signature_factory, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        """Test that one failed write is retried and succeeds."""
        original = SignatureStore._replace
        failures = {"left": 1}

        def flaky(self: SignatureStore, path: Path, payload: str) -> None:
            if failures["left"]:
                failures["left"] -= 1
                raise OSError("disk busy")
            original(self, path, payload)

        monkeypatch.setattr(SignatureStore, "_replace", flaky)
        signature = signature_factory()

        store.save(signature)

        assert failures["left"] == 0
        assert store.load(signature.signature_id) == signature

    def test_persistent_failure(
        self, store: SignatureStore, signature_factory, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        """Test that exhausting the attempts raises a store write error."""
        calls: list[Path] = []

        def broken(self: SignatureStore, path: Path, payload: str) -> None:
            calls.append(path)
            raise OSError("read-only file system")

        monkeypatch.setattr(SignatureStore, "_replace", broken)

        with pytest.raises(StoreWriteError):
            store.save(signature_factory())
        assert len(calls) == store.write_attempts
        assert store.list_signatures() == []

    def test_failed_index_write_removes_signature(
        self, store: SignatureStore, signature_factory, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        """Test that a signature is not left behind when its index entry cannot be written."""
        original = SignatureStore._replace

        def index_broken(self: SignatureStore, path: Path, payload: str) -> None:
            if path == self.index_path:
                raise OSError("quota exceeded")
            original(self, path, payload)

        monkeypatch.setattr(SignatureStore, "_replace", index_broken)
        signature = signature_factory()

        with pytest.raises(StoreWriteError):
            store.save(signature)
        assert not store.path_for(signature.signature_id).exists()
        assert not store.index_path.exists()


class TestSharedStore:
    """Tests for the per-directory store accessor."""

    def test_same_directory_same_store(self, tmp_path: Path) -> None:
        """Test that one directory maps to one store instance."""
        assert get_signature_store(tmp_path / "s") is get_signature_store(tmp_path / "s")
        assert get_signature_store(tmp_path / "s") is not get_signature_store(tmp_path / "t")
