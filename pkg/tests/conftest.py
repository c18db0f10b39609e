"""Shared test fixtures for pdnsense."""

from collections.abc import Callable, Sequence
from pathlib import Path

import pytest

from pdnsense.core.config import settings
from pdnsense.repositories.signature import SignatureStore
from pdnsense.schemas.enums import ElementKind, SummaryMode
from pdnsense.schemas.network import GROUND, Element, PdnNetwork
from pdnsense.schemas.protocol import GoldenSignature, SignatureSummary, VerificationKey
from pdnsense.services.pdn import default_band, reference_network

NetworkFactory = Callable[[Sequence[tuple[ElementKind, float, str, str]]], PdnNetwork]
SignatureFactory = Callable[..., GoldenSignature]


@pytest.fixture
def reference_net() -> PdnNetwork:
    return reference_network()


@pytest.fixture
def band() -> tuple[float, ...]:
    return default_band()


@pytest.fixture
def store(tmp_path: Path) -> SignatureStore:
    return SignatureStore(tmp_path / "signatures")


@pytest.fixture
def quiet_logs(monkeypatch: pytest.MonkeyPatch) -> None:
    """Keep stdout free of log lines for commands whose output is parsed."""
    monkeypatch.setattr(settings, "LOG_LEVEL", "CRITICAL")


@pytest.fixture
def network_factory() -> NetworkFactory:
    """Wrap a bare circuit into a valid network.

    Every circuit node is tagged chiplet0; a 1 pF stub hanging off ground
    stands in for chiplet1 and draws no current from the circuit.
    """

    def build(parts: Sequence[tuple[ElementKind, float, str, str]]) -> PdnNetwork:
        nodes = [GROUND]
        for _, _, a, b in parts:
            nodes.extend(n for n in (a, b) if n not in nodes)
        elements = [Element(kind=k, value=v, node_a=a, node_b=b, name=f"e{i}") for i, (k, v, a, b) in enumerate(parts)]
        elements.append(Element(kind=ElementKind.CAPACITOR, value=1e-12, node_a="stub", node_b=GROUND, name="stub"))
        regions = {n: "chiplet0" for n in nodes}
        regions[GROUND] = "board"
        regions["stub"] = "chiplet1"
        return PdnNetwork(
            nodes=(*nodes, "stub"),
            elements=tuple(elements),
            regions=regions,
            chiplet_count=2,
        )

    return build


@pytest.fixture
def signature_factory() -> SignatureFactory:
    """Small golden signatures that need no acquisition."""

    def build(nonce: int = 1, device_id: str = "dev", used: bool = False) -> GoldenSignature:
        key = VerificationKey(actuator_ids=(0,), sensor_ids=(1, 9), frequencies=(1e9, 2e9), nonce=nonce)
        summary = SignatureSummary(
            mode=SummaryMode.FULL,
            frequencies=key.frequencies,
            sensor_ids=key.sensor_ids,
            traces=3,
            samples=[[[30, 31, 32], [28, 29, 30]], [[31, 31, 32], [27, 29, 29]]],
        )
        return GoldenSignature(
            signature_id=f"{device_id}-{nonce:016x}",
            key=key,
            trace_summary=summary,
            device_id=device_id,
            seed=nonce,
            used=used,
        )

    return build
