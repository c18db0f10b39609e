#!/usr/bin/env python3
"""Reset the golden signature store - deletes every signature and the index.

Usage:
    python scripts/reset_signature_store.py [STORE_DIR]

WARNING: Deleted signatures cannot be re-enrolled with the same nonces on a
field device; a cleared pool means a new enrollment on trusted hardware.
"""

import sys
from pathlib import Path

from pdnsense.core.config import settings
from pdnsense.core.logging import configure_logging
from pdnsense.repositories.signature import SignatureStore


def reset_store(root: Path) -> int:
    """Remove all signatures below ``root``; returns how many were deleted."""
    store = SignatureStore(root)
    print(f"Signatures before reset: {len(store.list_signatures())}")
    removed = store.clear()
    print(f"  Deleted {removed} signatures")
    print("Signature store reset complete")
    return removed


def main() -> None:
    """Main entry point."""
    configure_logging()
    root = Path(sys.argv[1]) if len(sys.argv) > 1 else settings.SIGNATURE_STORE_DIR
    if not root.is_dir():
        print(f"Error: no signature store at {root}")
        sys.exit(1)

    # Confirm with user
    print(f"This will reset the signature store at: {root.resolve()}")
    print("WARNING: All golden signatures will be permanently deleted!")
    response = input("Type 'yes' to confirm: ")

    if response.lower() != "yes":
        print("Aborted")
        sys.exit(0)

    reset_store(root)


if __name__ == "__main__":
    main()
