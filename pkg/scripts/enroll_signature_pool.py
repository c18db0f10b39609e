#!/usr/bin/env python3
"""Pre-record a pool of one-time golden signatures for a device.

Usage:
    python scripts/enroll_signature_pool.py DEVICE_ID COUNT [KEY_SEED]

Keys use seeds KEY_SEED .. KEY_SEED + COUNT - 1, so re-running with the next
free seed extends an existing pool without nonce collisions.
"""

import sys

from pdnsense.core.config import settings
from pdnsense.core.exceptions import PdnSenseError
from pdnsense.core.logging import configure_logging
from pdnsense.repositories.signature import get_signature_store
from pdnsense.services.pdn import default_band, reference_network
from pdnsense.services.protocol import enroll_batch


def main() -> None:
    """Main entry point."""
    if len(sys.argv) < 3:
        print("Usage: python scripts/enroll_signature_pool.py DEVICE_ID COUNT [KEY_SEED]")
        sys.exit(1)

    device_id, count = sys.argv[1], int(sys.argv[2])
    key_seed = int(sys.argv[3]) if len(sys.argv) > 3 else 0
    configure_logging()

    store = get_signature_store()
    try:
        signatures = enroll_batch(
            reference_network(),
            count,
            key_seed=key_seed,
            # acquisition seeds live in their own range so they never equal a key seed
            acq_seed=key_seed + 1_000_000,
            traces=500,
            store=store,
            band=default_band(),
            device_id=device_id,
        )
    except PdnSenseError as e:
        print(f"Error: {e.detail}")
        sys.exit(1)

    print(f"Enrolled {len(signatures)} signatures for {device_id} in {settings.SIGNATURE_STORE_DIR}")
    for signature in signatures:
        print(f"  {signature.signature_id}")
    print(f"Next free key seed: {key_seed + count}")


if __name__ == "__main__":
    main()
