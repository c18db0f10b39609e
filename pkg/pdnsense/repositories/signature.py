"""File-backed golden signature repository."""

import json
import os
import tempfile
import threading
from pathlib import Path
from typing import Any

from pydantic import ValidationError as PydanticValidationError
from tenacity import RetryError, Retrying, retry_if_exception_type, stop_after_attempt, wait_exponential

from pdnsense.core.config import settings
from pdnsense.core.exceptions import (
    ConflictError,
    NotFoundError,
    SignatureReuseError,
    StoreWriteError,
    ValidationError,
)
from pdnsense.core.logging import get_logger
from pdnsense.schemas.protocol import GoldenSignature, SignatureIndexEntry

logger = get_logger(__name__)

INDEX_FILE = "index.json"


class SignatureStore:
    """Directory of ``<signature_id>.json`` documents plus ``index.json``.

    Writers are serialised by a process-wide lock; every file is replaced
    atomically.
    """

    _lock = threading.Lock()

    def __init__(self, root: Path, write_attempts: int | None = None) -> None:
        self.root = Path(root)
        self.write_attempts = write_attempts or settings.STORE_WRITE_ATTEMPTS

    @property
    def index_path(self) -> Path:
        return self.root / INDEX_FILE

    def path_for(self, signature_id: str) -> Path:
        return self.root / f"{signature_id}.json"

    # --- File helpers ---

    def _replace(self, path: Path, payload: str) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as handle:
                handle.write(payload)
            os.replace(tmp, path)
        except OSError:
            Path(tmp).unlink(missing_ok=True)
            raise

    def _write(self, path: Path, payload: str) -> None:
        retrying = Retrying(
            stop=stop_after_attempt(self.write_attempts),
            wait=wait_exponential(multiplier=0.05, max=1),
            retry=retry_if_exception_type(OSError),
        )
        try:
            for attempt in retrying:
                with attempt:
                    self._replace(path, payload)
        except RetryError as e:
            cause = e.last_attempt.exception()
            logger.error("Signature store write failed", path=str(path), error=str(cause))
            raise StoreWriteError(f"Could not write {path}: {cause}") from cause

    def _read_index(self) -> dict[str, SignatureIndexEntry]:
        if not self.index_path.is_file():
            return {}
        raw: dict[str, Any] = json.loads(self.index_path.read_text())
        return {sid: SignatureIndexEntry.model_validate(entry) for sid, entry in raw.items()}

    def _write_index(self, index: dict[str, SignatureIndexEntry]) -> None:
        payload = {sid: entry.model_dump(mode="json") for sid, entry in sorted(index.items())}
        self._write(self.index_path, json.dumps(payload, indent=2))

    @staticmethod
    def _entry(signature: GoldenSignature) -> SignatureIndexEntry:
        return SignatureIndexEntry(
            device_id=signature.device_id,
            nonce=signature.key.nonce,
            key_id=signature.key.key_id,
            created_at=signature.created_at,
            used=signature.used,
        )

    # --- Operations ---

    def save(self, signature: GoldenSignature) -> Path:
        """Persist a new signature.

        Raises:
            ConflictError: If the ID or the (device_id, nonce) pair is already stored.
            StoreWriteError: If a write keeps failing; a signature whose index entry
                could not be written is removed again.
        """
        with self._lock:
            index = self._read_index()
            duplicate = signature.signature_id in index or any(
                e.device_id == signature.device_id and e.nonce == signature.key.nonce for e in index.values()
            )
            if duplicate:
                raise ConflictError(
                    f"Signature for device {signature.device_id} with nonce {signature.key.nonce:#x} already exists"
                )
            path = self.path_for(signature.signature_id)
            self._write(path, signature.model_dump_json(indent=2))
            index[signature.signature_id] = self._entry(signature)
            try:
                self._write_index(index)
            except StoreWriteError:
                path.unlink(missing_ok=True)
                raise
        logger.info("Golden signature stored", signature_id=signature.signature_id, path=str(path))
        return path

    def load(self, signature_id: str) -> GoldenSignature:
        return self.load_path(self.path_for(signature_id))

    def load_path(self, path: Path) -> GoldenSignature:
        if not path.is_file():
            raise NotFoundError(f"Signature {path.stem}")
        try:
            return GoldenSignature.model_validate_json(path.read_text())
        except PydanticValidationError as e:
            raise ValidationError(f"Signature document {path} is corrupt: {e}") from e

    def mark_used(self, signature_id: str) -> GoldenSignature:
        """Flip ``used`` from false to true.

        Raises:
            SignatureReuseError: If the signature was already used.
        """
        with self._lock:
            signature = self.load(signature_id)
            if signature.used:
                raise SignatureReuseError(signature_id)
            signature = signature.model_copy(update={"used": True})
            self._write(self.path_for(signature_id), signature.model_dump_json(indent=2))
            index = self._read_index()
            index[signature_id] = self._entry(signature)
            self._write_index(index)
        logger.info("Golden signature consumed", signature_id=signature_id)
        return signature

    def list_signatures(
        self, device_id: str | None = None, unused_only: bool = False
    ) -> list[tuple[str, SignatureIndexEntry]]:
        entries = sorted(self._read_index().items(), key=lambda item: (item[1].created_at, item[0]))
        return [
            (sid, entry)
            for sid, entry in entries
            if (device_id is None or entry.device_id == device_id) and not (unused_only and entry.used)
        ]

    def next_unused(self, device_id: str) -> GoldenSignature:
        """Oldest unused signature of a device."""
        entries = self.list_signatures(device_id=device_id, unused_only=True)
        if not entries:
            raise NotFoundError(f"Unused signature for device {device_id}")
        return self.load(entries[0][0])

    def revoke(self, signature_id: str) -> None:
        """Delete a signature and its index entry."""
        with self._lock:
            index = self._read_index()
            if signature_id not in index:
                raise NotFoundError(f"Signature {signature_id}")
            del index[signature_id]
            self._write_index(index)
            self.path_for(signature_id).unlink(missing_ok=True)
        logger.info("Golden signature revoked", signature_id=signature_id)

    def clear(self) -> int:
        """Delete every signature and the index; returns the number removed."""
        with self._lock:
            index = self._read_index()
            for signature_id in index:
                self.path_for(signature_id).unlink(missing_ok=True)
            self.index_path.unlink(missing_ok=True)
        logger.warning("Signature store cleared", root=str(self.root), removed=len(index))
        return len(index)


_stores: dict[Path, SignatureStore] = {}


def get_signature_store(root: Path | None = None) -> SignatureStore:
    """Shared store instance per directory."""
    key = Path(root or settings.SIGNATURE_STORE_DIR).resolve()
    if key not in _stores:
        _stores[key] = SignatureStore(key)
    return _stores[key]
