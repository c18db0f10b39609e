#!/usr/bin/env python3
"""
Network Config Generator for Local Development

Writes a NetworkConfig JSON document with the reference defaults, optionally
overriding the SLL count, so topology variants can be tried with --config.
"""

import sys
from pathlib import Path

from pdnsense.core.config import settings
from pdnsense.schemas.network import NetworkConfig, SllConfig


def generate_network_config(sll_count: int | None = None) -> NetworkConfig:
    """
    Build a network config.

    Args:
        sll_count: Interposer links between the verifier and its neighbour

    Returns:
        Config with every other parameter at its default
    """
    config = NetworkConfig()
    if sll_count is not None:
        config = config.model_copy(update={"sll": SllConfig(count=sll_count)})
    return config


def main() -> None:
    """Main function to generate and write a network config."""
    if len(sys.argv) > 1 and sys.argv[1] in ("-h", "--help"):
        print("Usage: python generate_network_config.py [sll_count] [output_path]")
        sys.exit(0)

    sll_count = int(sys.argv[1]) if len(sys.argv) > 1 else None
    path = Path(sys.argv[2]) if len(sys.argv) > 2 else settings.CONFIG_DIR / "network.json"

    config = generate_network_config(sll_count)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(config.model_dump_json(indent=2))

    print(f"Network config written to {path}")
    print(f"  chiplets: {len(config.chiplets)}")
    print(f"  SLL links: {config.sll.count}")
    print(f"\nUse it with: pdnsense enroll --config {path}")


if __name__ == "__main__":
    main()
