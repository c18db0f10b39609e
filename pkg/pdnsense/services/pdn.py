"""Frequency-domain PDN model: reference topology, nodal solver and sweep-band selection."""

import itertools
import json
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from pathlib import Path
from typing import Any, NamedTuple, TypeVar

import numpy as np
from pydantic import ValidationError as PydanticValidationError
from scipy.signal import find_peaks

from pdnsense.core.config import settings
from pdnsense.core.exceptions import DegenerateGeometryError, NotFoundError, SolveError, ValidationError
from pdnsense.core.logging import get_logger
from pdnsense.schemas.enums import ElementKind
from pdnsense.schemas.network import (
    GROUND,
    CavityGeometry,
    Element,
    ImpedanceProfile,
    NetworkConfig,
    PdnNetwork,
    chiplet_region,
)

logger = get_logger(__name__)

T = TypeVar("T")

# Distinct resonances closer than this (relative) are merged
_RESONANCE_MERGE_TOL = 1e-9

# Sweep on which removing bulk decoupling moves the low end of |Z| far more than
# the high end. Below about 100 kHz the VRM branch dominates and the ordering fails.
DECOUPLING_SWEEP_HZ = (100e3, 2e9)


# --- Network construction ---


class NetworkBuilder:
    """Accumulates nodes, region tags and elements of a network under construction."""

    def __init__(self) -> None:
        self.nodes: list[str] = []
        self.regions: dict[str, str] = {}
        self.elements: list[Element] = []
        self.add_node(GROUND, "board")

    def add_node(self, node: str, region: str) -> str:
        if node not in self.regions:
            self.nodes.append(node)
            self.regions[node] = region
        return node

    def add(self, kind: ElementKind, value: float, a: str, b: str, name: str) -> None:
        self.elements.append(Element(kind=kind, value=value, node_a=a, node_b=b, name=name))

    def series(
        self,
        name: str,
        a: str,
        b: str,
        region: str,
        r: float | None = None,
        l: float | None = None,  # noqa: E741
        c: float | None = None,
    ) -> None:
        """Series R-L-C path from ``a`` to ``b``; internal nodes are tagged ``region``."""
        parts = [(k, v) for k, v in (("r", r), ("l", l), ("c", c)) if v is not None]
        kinds = {"r": ElementKind.RESISTOR, "l": ElementKind.INDUCTOR, "c": ElementKind.CAPACITOR}
        current = a
        for i, (part, value) in enumerate(parts):
            nxt = b if i == len(parts) - 1 else self.add_node(f"{name}.{i}", region)
            self.add(kinds[part], value, current, nxt, f"{name}.{part}")
            current = nxt


def _graded(lo: float, hi: float, count: int) -> np.ndarray:
    """Log-spaced values from lo to hi across a grid of ``count`` branches."""
    if count == 1:
        return np.array([lo])
    return np.geomspace(lo, hi, count)


def add_sll_links(
    builder: NetworkBuilder,
    start: int,
    count: int,
    a: str,
    b: str,
    r: float,
    l: float,  # noqa: E741
    c: float,
) -> None:
    """Append SLL link triples ``sll<j>`` numbered from ``start``."""
    for j in range(start, start + count):
        mid = builder.add_node(f"sll{j}", "interposer")
        builder.add(ElementKind.RESISTOR, r, a, mid, f"sll{j}.r")
        builder.add(ElementKind.INDUCTOR, l, mid, b, f"sll{j}.l")
        builder.add(ElementKind.CAPACITOR, c, mid, GROUND, f"sll{j}.c")


def build_reference_network(config: NetworkConfig | None = None) -> PdnNetwork:
    """Build the board/package/interposer/chiplet topology described by ``config``.

    Args:
        config: Topology parameters; the defaults model a three-chiplet package
            with the verifier on chiplet 0.

    Returns:
        A validated, immutable network.

    Raises:
        ValidationError: If the config has fewer than two chiplets or produces
            a network that violates a network invariant.
    """
    config = config or NetworkConfig()
    if config.chiplet_count < 2:
        raise ValidationError(f"chiplet_count must be at least 2, got {config.chiplet_count}")
    a, b = config.sll.between
    if max(a, b) >= config.chiplet_count:
        raise ValidationError(f"sll.between {config.sll.between} references a missing chiplet")

    nb = NetworkBuilder()
    nb.add_node("board", "board")
    nb.add_node("vrm", "vrm")
    nb.add_node("pkg", "package")

    nb.add(ElementKind.RESISTOR, config.vrm.r, "board", "vrm", "vrm.r")
    nb.add(ElementKind.INDUCTOR, config.vrm.l, "vrm", GROUND, "vrm.l")
    for bank_name, bank in (("bulk", config.bulk), ("ceramic", config.ceramic)):
        for i in range(bank.count):
            nb.series(f"{bank_name}{i}", "board", GROUND, "board", r=bank.r, l=bank.l, c=bank.c)
    nb.series("package", "board", "pkg", "package", r=config.package.r, l=config.package.l)

    for k, chip in enumerate(config.chiplets):
        region = chiplet_region(k)
        ip = nb.add_node(f"ip{k}", "interposer")
        root = nb.add_node(f"c{k}", region)
        nb.series(f"bump{k}", "pkg", ip, "package", r=chip.bump_r, l=chip.bump_l)
        for t in range(config.tsv.count):
            nb.series(f"tsv{k}_{t}", ip, root, "interposer", r=config.tsv.r, l=config.tsv.l)

        resistances = _graded(chip.r_lo, chip.r_hi, chip.grid_size)
        capacitances = _graded(chip.c_lo, chip.c_hi, chip.grid_size)
        previous = root
        for i in range(chip.grid_size):
            node = nb.add_node(f"c{k}_{i}", region)
            nb.series(f"mesh{k}_{i}", previous, node, region, r=chip.mesh_r, l=chip.mesh_l)
            nb.series(f"rc{k}_{i}", node, GROUND, region, r=float(resistances[i]), c=float(capacitances[i]))
            previous = node

    sll_pair = (f"ip{a}", f"ip{b}")
    add_sll_links(nb, 0, config.sll.count, *sll_pair, config.sll.r, config.sll.l, config.sll.c)

    try:
        network = PdnNetwork(
            nodes=tuple(nb.nodes),
            elements=tuple(nb.elements),
            regions=nb.regions,
            chiplet_count=config.chiplet_count,
            verifier_chiplet=config.verifier_chiplet,
            sll_pair=sll_pair,
        )
    except PydanticValidationError as e:
        raise ValidationError(f"Reference network is invalid: {e}") from e

    logger.debug(
        "Reference network built",
        nodes=len(network.nodes),
        elements=len(network.elements),
        chiplets=network.chiplet_count,
    )
    return network


@lru_cache(maxsize=1)
def reference_network() -> PdnNetwork:
    """Default reference network, built once per process."""
    return build_reference_network()


def _read_json(path: Path) -> Any:
    if not path.is_file():
        raise NotFoundError(f"File {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path} is not valid JSON: {e}") from e


def load_network_config(path: Path) -> NetworkConfig:
    """Read a ``NetworkConfig`` JSON document."""
    try:
        return NetworkConfig.model_validate(_read_json(path))
    except PydanticValidationError as e:
        raise ValidationError(f"Invalid network config {path}: {e}") from e


def load_network(path: Path) -> PdnNetwork:
    """Load either a network document (elements + regions) or a ``NetworkConfig``."""
    document = _read_json(path)
    if isinstance(document, dict) and "elements" in document:
        try:
            return PdnNetwork.model_validate(document)
        except PydanticValidationError as e:
            raise ValidationError(f"Invalid network document {path}: {e}") from e
    try:
        config = NetworkConfig.model_validate(document)
    except PydanticValidationError as e:
        raise ValidationError(f"Invalid network config {path}: {e}") from e
    return build_reference_network(config)


# --- Nodal solver ---


class _Stamps(NamedTuple):
    index: dict[str, int]
    conductance: np.ndarray
    capacitance: np.ndarray
    reluctance: np.ndarray


def _stamp(matrix: np.ndarray, i: int | None, j: int | None, value: float) -> None:
    if i is not None:
        matrix[i, i] += value
    if j is not None:
        matrix[j, j] += value
    if i is not None and j is not None:
        matrix[i, j] -= value
        matrix[j, i] -= value


def _assemble(net: PdnNetwork) -> _Stamps:
    """Frequency-independent stamp matrices; Y(w) = G + jwC + Gamma/(jw)."""
    index = {node: i for i, node in enumerate(n for n in net.nodes if n != net.ground)}
    size = len(index)
    g = np.zeros((size, size))
    c = np.zeros((size, size))
    gamma = np.zeros((size, size))
    targets = {ElementKind.RESISTOR: g, ElementKind.CAPACITOR: c, ElementKind.INDUCTOR: gamma}
    for element in net.elements:
        # independent current sources are open in a small-signal solve
        if element.kind is ElementKind.CURRENT_SOURCE:
            continue
        value = element.value if element.kind is ElementKind.CAPACITOR else 1.0 / element.value
        _stamp(targets[element.kind], index.get(element.node_a), index.get(element.node_b), value)
    return _Stamps(index, g, c, gamma)


def _check_frequencies(freqs: Sequence[float], increasing: bool = False) -> np.ndarray:
    values = np.asarray(freqs, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ValidationError("At least one frequency is required")
    if not np.all(np.isfinite(values)) or np.any(values <= 0):
        raise ValidationError("Frequencies must be finite and positive")
    # harmonic stacks from sensing interleave, so ordering is only enforced for profiles
    if increasing and np.any(np.diff(values) <= 0):
        raise ValidationError("Frequencies must be strictly increasing and unique")
    if np.any(values > settings.MAX_FREQUENCY_HZ):
        raise ValidationError(
            f"Frequency {values.max():.6g} Hz is outside solver validity (max {settings.MAX_FREQUENCY_HZ:.6g} Hz)"
        )
    return values


def _node_indices(net: PdnNetwork, stamps: _Stamps, nodes: Sequence[str], role: str) -> list[int]:
    indices = []
    for node in nodes:
        if node == net.ground:
            raise ValidationError(f"{role} node must not be the ground node")
        if node not in stamps.index:
            raise NotFoundError(f"Node {node}")
        indices.append(stamps.index[node])
    return indices


def map_frequencies(fn: Callable[[int], T], count: int) -> list[T]:
    """Evaluate ``fn`` for each frequency index, on a thread pool when configured."""
    if settings.WORKERS <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=settings.WORKERS) as pool:
        return list(pool.map(fn, range(count)))


def _solve_at(stamps: _Stamps, frequency: float, rhs: np.ndarray) -> np.ndarray:
    omega = 2 * math.pi * frequency
    y = stamps.conductance + 1j * omega * stamps.capacitance + stamps.reluctance / (1j * omega)
    # symmetric row-norm equilibration; a pure LC node at resonance has a zero diagonal but a nonzero row
    norms = np.abs(y).max(axis=1)
    scale = np.ones_like(norms)
    scale[norms > 0] = 1.0 / np.sqrt(norms[norms > 0])
    scaled = y * scale[:, None] * scale[None, :]
    condition = np.linalg.cond(scaled)
    if not np.isfinite(condition) or condition > settings.ILL_CONDITION_LIMIT:
        logger.warning("Ill-conditioned admittance matrix", frequency=frequency, condition=float(condition))
        raise SolveError(frequency, f"admittance matrix is ill-conditioned (condition number {condition:.3g})")
    try:
        solution = np.linalg.solve(scaled, rhs * scale[:, None])
    except np.linalg.LinAlgError as e:
        raise SolveError(frequency) from e
    result: np.ndarray = solution * scale[:, None]
    return result


def transfer_impedances(
    net: PdnNetwork,
    sources: Sequence[str],
    observes: Sequence[str],
    freqs: Sequence[float],
) -> np.ndarray:
    """Transfer impedances for every (observe, source) pair.

    Returns:
        Complex array of shape ``(len(freqs), len(observes), len(sources))`` with
        ``Z[f, o, s] = V(observes[o]) / I(sources[s])``.
    """
    values = _check_frequencies(freqs)
    stamps = _assemble(net)
    src = _node_indices(net, stamps, sources, "Source")
    obs = _node_indices(net, stamps, observes, "Observe")

    rhs = np.zeros((len(stamps.index), len(src)), dtype=complex)
    rhs[src, range(len(src))] = 1.0

    def solve_one(i: int) -> np.ndarray:
        return _solve_at(stamps, float(values[i]), rhs)[obs, :]

    return np.stack(map_frequencies(solve_one, values.size))


def solve_impedance(net: PdnNetwork, source: str, observe: str, freqs: Sequence[float]) -> ImpedanceProfile:
    """Transfer impedance V(observe)/I(source) over ``freqs``.

    For ``source == observe`` this is the driving-point impedance.

    Raises:
        ValidationError: On a ground node, or frequencies that are non-positive, unsorted or repeated.
        NotFoundError: If a node is not part of the network.
        SolveError: If the admittance matrix is singular or ill-conditioned at a frequency.
    """
    _check_frequencies(freqs, increasing=True)
    z = transfer_impedances(net, [source], [observe], freqs)
    return ImpedanceProfile(
        frequencies=tuple(float(f) for f in freqs),
        pairs=((source, observe),),
        values=z[:, 0, :],
    )


# --- Cavity resonances and sweep band ---


def resonant_frequency(geom: CavityGeometry) -> float:
    """Resonant frequency of ``geom``'s own (m, n, p) mode in hertz."""
    return _mode_frequency(geom, geom.m, geom.n, geom.p)


def _mode_frequency(geom: CavityGeometry, m: int, n: int, p: int) -> float:
    wave = math.sqrt((m * math.pi / geom.a) ** 2 + (n * math.pi / geom.b) ** 2 + (p * math.pi / geom.d) ** 2)
    return wave / (2 * math.pi * math.sqrt(geom.mu * geom.epsilon))


def cavity_resonances(geom: CavityGeometry, max_mode: int) -> list[tuple[tuple[int, int, int], float]]:
    """All modes with components up to ``max_mode``, sorted by frequency."""
    if max_mode < 0:
        raise ValidationError(f"max_mode must be non-negative, got {max_mode}")
    modes = [
        ((m, n, p), _mode_frequency(geom, m, n, p))
        for m, n, p in itertools.product(range(max_mode + 1), repeat=3)
    ]
    return sorted(modes, key=lambda item: (item[1], item[0]))


def lowest_resonances(geom: CavityGeometry, count: int, cap: float | None = None) -> list[float]:
    """Lowest ``count`` distinct non-zero resonances below ``cap``."""
    cap = settings.MAX_RESONANCE_HZ if cap is None else cap
    distinct: list[float] = []
    for _, f in cavity_resonances(geom, max(count, 1)):
        if f <= 0 or f > cap:
            continue
        if distinct and abs(f - distinct[-1]) <= _RESONANCE_MERGE_TOL * f:
            continue
        distinct.append(f)
        if len(distinct) == count:
            break
    if not distinct:
        raise DegenerateGeometryError(f"Cavity geometry has no non-zero resonance below {cap:.6g} Hz")
    return distinct


def suggest_sweep_band(
    geom: CavityGeometry,
    count: int,
    resonances: int | None = None,
    window: float | None = None,
) -> list[float]:
    """Sweep frequencies clustered around the lowest cavity resonances.

    Point ``j`` goes to resonance ``j mod R``. A resonance that receives a
    single point gets exactly its resonant frequency; otherwise its points are
    log-spaced over ``[(1 - window) f_r, (1 + window) f_r]``.

    Raises:
        ValidationError: If ``count`` < 1.
        DegenerateGeometryError: If no non-zero resonance lies below the cap.
    """
    if count < 1:
        raise ValidationError(f"count must be at least 1, got {count}")
    resonances = settings.BAND_RESONANCES if resonances is None else resonances
    window = settings.BAND_WINDOW if window is None else window
    if resonances < 1 or not 0 < window < 1:
        raise ValidationError("resonances must be >= 1 and window in (0, 1)")

    centers = lowest_resonances(geom, resonances)
    per_center = [len(range(r, count, len(centers))) for r in range(len(centers))]
    band: list[float] = []
    for f_r, n in zip(centers, per_center, strict=True):
        if n == 1:
            band.append(f_r)
        elif n > 1:
            band.extend(np.geomspace((1 - window) * f_r, (1 + window) * f_r, n).tolist())
    return sorted(set(band))


@lru_cache(maxsize=1)
def default_band() -> tuple[float, ...]:
    """Default sweep band from the default cavity geometry."""
    return tuple(suggest_sweep_band(CavityGeometry(), settings.BAND_SIZE))


def decoupling_sweep(points: int = 100) -> tuple[float, ...]:
    """Log-spaced sweep over ``DECOUPLING_SWEEP_HZ``, wide enough to show board and die regimes."""
    if points < 2:
        raise ValidationError(f"points must be at least 2, got {points}")
    return tuple(np.geomspace(*DECOUPLING_SWEEP_HZ, points).tolist())


def find_impedance_peaks(profile: ImpedanceProfile, count: int, pair_index: int = 0) -> list[float]:
    """Frequencies of the ``count`` most prominent |Z| peaks of one pair, ascending."""
    if count < 1:
        raise ValidationError(f"count must be at least 1, got {count}")
    magnitude = np.abs(profile.values[:, pair_index])
    peaks, properties = find_peaks(magnitude, prominence=0)
    order = np.argsort(properties["prominences"])[::-1][:count]
    return sorted(profile.frequencies[int(peaks[i])] for i in order)
