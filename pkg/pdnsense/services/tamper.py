"""Tamper events as perturbations of a PdnNetwork."""

import re
from functools import lru_cache
from pathlib import Path

import numpy as np
from pydantic import ValidationError as PydanticValidationError

from pdnsense.core.config import settings
from pdnsense.core.exceptions import NotFoundError, ValidationError
from pdnsense.core.logging import get_logger
from pdnsense.schemas.enums import ElementKind, TamperKind
from pdnsense.schemas.network import GROUND, Element, PdnNetwork, SllConfig, chiplet_index, chiplet_region
from pdnsense.schemas.tamper import (
    BranchMoveMagnitude,
    DesignSwapMagnitude,
    ScenarioPreset,
    SllChangeMagnitude,
    TamperEvent,
    TrojanMagnitude,
)
from pdnsense.services.pdn import (
    NetworkBuilder,
    add_sll_links,
    default_band,
    reference_network,
    solve_impedance,
)

logger = get_logger(__name__)

_SLL_NODE = re.compile(r"^sll(\d+)$")
_TROJAN_NODE = re.compile(r"^tj(\d+)_(\d+)$")


# --- Helpers ---


def _rebuild(net: PdnNetwork, builder: NetworkBuilder) -> PdnNetwork:
    try:
        return PdnNetwork(
            nodes=tuple(builder.nodes),
            elements=tuple(builder.elements),
            regions=builder.regions,
            chiplet_count=net.chiplet_count,
            verifier_chiplet=net.verifier_chiplet,
            sll_pair=net.sll_pair,
        )
    except PydanticValidationError as e:
        raise ValidationError(f"Tamper event produced an invalid network: {e}") from e


def _copy(net: PdnNetwork, drop_nodes: set[str] | None = None) -> NetworkBuilder:
    drop = drop_nodes or set()
    builder = NetworkBuilder()
    for node in net.nodes:
        if node not in drop:
            builder.add_node(node, net.regions[node])
    builder.elements = [e for e in net.elements if e.node_a not in drop and e.node_b not in drop]
    return builder


def _chiplet_of(event: TamperEvent) -> int:
    index = chiplet_index(event.target_region)
    if index is None:
        raise ValidationError(f"{event.kind.value} targets a chiplet region, got {event.target_region}")
    return index


def _grid_node(net: PdnNetwork, chiplet: int, grid_index: int) -> str:
    nodes = net.grid_nodes(chiplet)
    if grid_index >= len(nodes):
        raise ValidationError(f"Grid index {grid_index} is outside chiplet{chiplet} (grid size {len(nodes)})")
    return nodes[grid_index]


# --- Event kinds ---


def _insert_trojan(net: PdnNetwork, event: TamperEvent, magnitude: TrojanMagnitude) -> PdnNetwork:
    if magnitude.capacitance > settings.TROJAN_CAP_LIMIT:
        raise ValidationError(
            f"Trojan capacitance {magnitude.capacitance:.3g} F exceeds the dormant-Trojan cap "
            f"{settings.TROJAN_CAP_LIMIT:.3g} F"
        )
    k = _chiplet_of(event)
    anchor = _grid_node(net, k, magnitude.node_index)
    serial = sum(1 for n in net.nodes if (m := _TROJAN_NODE.match(n)) and int(m.group(1)) == k)

    builder = _copy(net)
    mid = builder.add_node(f"tj{k}_{serial}", chiplet_region(k))
    builder.add(ElementKind.RESISTOR, magnitude.resistance, anchor, mid, f"trojan{k}_{serial}.r")
    builder.add(ElementKind.CAPACITOR, magnitude.capacitance, mid, GROUND, f"trojan{k}_{serial}.c")
    return _rebuild(net, builder)


def _change_sll(net: PdnNetwork, event: TamperEvent, magnitude: SllChangeMagnitude) -> PdnNetwork:
    if event.target_region != "interposer":
        raise ValidationError(f"SLL changes target the interposer region, got {event.target_region}")
    if net.sll_pair is None:
        raise ValidationError("Network has no SLL route to modify")
    links = sorted(int(m.group(1)) for n in net.nodes if (m := _SLL_NODE.match(n)))
    if len(links) != magnitude.from_count:
        raise ValidationError(f"Network has {len(links)} SLL links, event expects {magnitude.from_count}")

    if magnitude.delta < 0:
        dropped = {f"sll{j}" for j in links[magnitude.delta :]}
        return _rebuild(net, _copy(net, dropped))

    by_name = {e.name: e for e in net.elements}
    if links:
        template = {p: by_name.get(f"sll{links[0]}.{p}") for p in ("r", "l", "c")}
        missing = [f"sll{links[0]}.{p}" for p, element in template.items() if element is None]
        if missing:
            raise ValidationError(f"SLL link {links[0]} has no element named {', '.join(missing)}")
        r, l, c = (element.value for element in template.values() if element is not None)  # noqa: E741
    else:
        defaults = SllConfig()
        r, l, c = defaults.r, defaults.l, defaults.c  # noqa: E741
    builder = _copy(net)
    start = links[-1] + 1 if links else 0
    add_sll_links(builder, start, magnitude.delta, *net.sll_pair, r, l, c)
    return _rebuild(net, builder)


def _move_branch(net: PdnNetwork, event: TamperEvent, magnitude: BranchMoveMagnitude) -> PdnNetwork:
    k = _chiplet_of(event)
    source = _grid_node(net, k, magnitude.from_index)
    target = _grid_node(net, k, magnitude.to_index)
    name = f"rc{k}_{magnitude.from_index}.r"

    elements: list[Element] = []
    moved = False
    for element in net.elements:
        if element.name == name and source in (element.node_a, element.node_b):
            a = target if element.node_a == source else element.node_a
            b = target if element.node_b == source else element.node_b
            element = element.model_copy(update={"node_a": a, "node_b": b})
            moved = True
        elements.append(element)
    if not moved:
        raise ValidationError(f"chiplet{k} has no on-die branch at grid index {magnitude.from_index}")

    builder = _copy(net)
    builder.elements = elements
    return _rebuild(net, builder)


def _swap_design(net: PdnNetwork, event: TamperEvent, magnitude: DesignSwapMagnitude) -> PdnNetwork:
    k = _chiplet_of(event)
    size = len(net.grid_nodes(k))
    weights = np.asarray(magnitude.weights, dtype=float)
    if weights.size != size:
        # resample the placement profile onto this chiplet's grid
        weights = np.interp(np.linspace(0, 1, size), np.linspace(0, 1, weights.size), weights)
    values = magnitude.total_capacitance * weights / weights.sum()

    targets = {f"rc{k}_{i}.c": float(v) for i, v in enumerate(values)}
    elements = [
        e.model_copy(update={"value": targets[e.name]}) if e.name in targets else e for e in net.elements
    ]
    if sum(1 for e in net.elements if e.name in targets) != size:
        raise ValidationError(f"chiplet{k} on-die branches are not laid out as a reference grid")
    builder = _copy(net)
    builder.elements = elements
    return _rebuild(net, builder)


def apply(net: PdnNetwork, event: TamperEvent) -> PdnNetwork:
    """Return a new network with ``event`` applied; ``net`` is left unchanged.

    Raises:
        NotFoundError: If the target region does not exist in ``net``.
        ValidationError: If the magnitude does not fit the network.
    """
    if event.target_region not in set(net.regions.values()):
        raise NotFoundError(f"Region {event.target_region}")

    magnitude = event.magnitude
    if isinstance(magnitude, TrojanMagnitude):
        tampered = _insert_trojan(net, event, magnitude)
    elif isinstance(magnitude, SllChangeMagnitude):
        tampered = _change_sll(net, event, magnitude)
    elif isinstance(magnitude, BranchMoveMagnitude):
        tampered = _move_branch(net, event, magnitude)
    else:
        tampered = _swap_design(net, event, magnitude)

    logger.debug(
        "Tamper event applied",
        kind=event.kind.value,
        region=event.target_region,
        label=event.label,
        elements=len(tampered.elements) - len(net.elements),
    )
    return tampered


# --- Presets ---


def adjacent_replacement_event(grid_size: int = 4) -> TamperEvent:
    """Same branch move as the far preset, on the chiplet next to the verifier."""
    return TamperEvent(
        kind=TamperKind.FAR_REPLACEMENT,
        target_region=chiplet_region(1),
        magnitude=BranchMoveMagnitude(from_index=grid_size - 1, to_index=0),
        label="adjacent re-placement (comparison)",
    )


def _presets() -> list[ScenarioPreset]:
    design = [
        ("aes", 2e-9, (4.0, 3.0, 2.0, 1.0), "AES core, loading concentrated near the TSVs"),
        ("fft", 3.5e-9, (1.0, 1.0, 1.0, 1.0), "FFT core, uniform loading"),
        ("cnn", 5e-9, (1.0, 2.0, 3.0, 4.0), "CNN accelerator, loading concentrated at the far end"),
    ]
    presets = [
        ScenarioPreset(
            name=name,
            case=1,
            description=text,
            event=TamperEvent(
                kind=TamperKind.DESIGN_SWAP,
                target_region=chiplet_region(1),
                magnitude=DesignSwapMagnitude(total_capacitance=total, weights=weights),
                label=f"design swap: {name.upper()}",
            ),
        )
        for name, total, weights, text in design
    ]
    presets.append(
        ScenarioPreset(
            name="sll-133",
            case=2,
            description="Interposer re-routed with 133 instead of 129 SLLs",
            event=TamperEvent(
                kind=TamperKind.INTERPOSER_SLL_CHANGE,
                target_region="interposer",
                magnitude=SllChangeMagnitude(from_count=129, to_count=133),
                label="SLL 129 -> 133",
            ),
        )
    )
    presets.append(
        ScenarioPreset(
            name="far-replacement",
            case=3,
            description="Same design on chiplet 2, placed and routed differently",
            event=TamperEvent(
                kind=TamperKind.FAR_REPLACEMENT,
                target_region=chiplet_region(2),
                magnitude=BranchMoveMagnitude(from_index=3, to_index=0),
                label="config1 -> config2",
            ),
        )
    )
    presets.append(
        ScenarioPreset(
            name="trojan",
            case=4,
            description="Dormant AES-T1100-like Trojan on chiplet 1",
            event=TamperEvent(
                kind=TamperKind.TROJAN_INSERT,
                target_region=chiplet_region(1),
                magnitude=TrojanMagnitude(),
                label="AES-T1100-like",
            ),
        )
    )
    return presets


@lru_cache(maxsize=1)
def _catalog() -> tuple[ScenarioPreset, ...]:
    net = reference_network()
    band = list(default_band())
    observe = net.grid_nodes(net.verifier_chiplet)[0]
    baseline = np.abs(solve_impedance(net, observe, observe, band).values[:, 0])
    presets = _presets()
    for preset in presets:
        tampered = apply(net, preset.event)
        after = np.abs(solve_impedance(tampered, observe, observe, band).values[:, 0])
        change = float(np.max(np.abs(after - baseline) / baseline))
        if change < settings.DETECTABILITY_FLOOR:
            raise ValidationError(
                f"Preset {preset.name} changes |Z| at {observe} by only {change:.3g}, "
                f"below the detectability floor {settings.DETECTABILITY_FLOOR:.3g}"
            )
        logger.debug("Preset checked", preset=preset.name, relative_change=change)
    return tuple(presets)


def scenario_catalog() -> list[ScenarioPreset]:
    """Named presets of the four case-study families, each checked for detectability."""
    return list(_catalog())


def get_preset(name: str) -> ScenarioPreset:
    for preset in scenario_catalog():
        if preset.name == name:
            return preset
    raise NotFoundError(f"Scenario {name}")


def load_event(reference: str | Path) -> TamperEvent:
    """Resolve a preset name or a TamperEvent JSON document."""
    names = {p.name: p for p in scenario_catalog()}
    if isinstance(reference, str) and reference in names:
        return names[reference].event
    path = Path(reference)
    if not path.is_file():
        raise NotFoundError(f"Scenario {reference}")
    try:
        return TamperEvent.model_validate_json(path.read_text())
    except PydanticValidationError as e:
        raise ValidationError(f"Invalid tamper event {path}: {e}") from e
