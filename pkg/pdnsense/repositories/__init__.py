"""Repository layer for persisted golden signatures."""

from .signature import SignatureStore, get_signature_store

__all__ = [
    "SignatureStore",
    "get_signature_store",
]
