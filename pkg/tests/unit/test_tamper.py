"""Unit tests for tamper events and the scenario catalog."""

from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError as PydanticValidationError

from pdnsense.core.exceptions import NotFoundError, ValidationError
from pdnsense.schemas.enums import TamperKind
from pdnsense.schemas.tamper import (
    BranchMoveMagnitude,
    DesignSwapMagnitude,
    SllChangeMagnitude,
    TamperEvent,
    TrojanMagnitude,
)
from pdnsense.services.sensing import monitor_blocks, ripple_amplitudes
from pdnsense.services.tamper import (
    adjacent_replacement_event,
    apply,
    get_preset,
    load_event,
    scenario_catalog,
)


def _sll_nodes(net) -> int:
    return len([n for n in net.nodes if n.startswith("sll")])


class TestTrojanInsert:
    """Tests for the dormant Trojan footprint."""

    def test_adds_one_rc_branch(self, reference_net) -> None:
        """Test that the default Trojan adds exactly two elements and one node on chiplet 1."""
        tampered = apply(reference_net, get_preset("trojan").event)

        assert len(tampered.elements) == len(reference_net.elements) + 2
        added = set(tampered.nodes) - set(reference_net.nodes)
        assert added == {"tj1_0"}
        assert tampered.regions["tj1_0"] == "chiplet1"

    def test_original_network_untouched(self, reference_net) -> None:
        """Test that apply returns a new network."""
        before = len(reference_net.elements)

        apply(reference_net, get_preset("trojan").event)

        assert len(reference_net.elements) == before

    def test_capacitance_over_cap_rejected(self, reference_net) -> None:
        """Test that a Trojan above 100 pF is refused."""
        event = TamperEvent(
            kind=TamperKind.TROJAN_INSERT,
            target_region="chiplet1",
            magnitude=TrojanMagnitude(capacitance=200e-12),
        )

        with pytest.raises(ValidationError):
            apply(reference_net, event)

    def test_unknown_region_not_found(self, reference_net) -> None:
        """Test that a region absent from the network is not found."""
        event = TamperEvent(kind=TamperKind.TROJAN_INSERT, target_region="chiplet7", magnitude=TrojanMagnitude())

        with pytest.raises(NotFoundError):
            apply(reference_net, event)


class TestSllChange:
    """Tests for interposer SLL edits."""

    def test_adds_links(self, reference_net) -> None:
        """Test 129 -> 133 links."""
        tampered = apply(reference_net, get_preset("sll-133").event)

        assert _sll_nodes(tampered) == 133
        assert len(tampered.elements) == len(reference_net.elements) + 12

    def test_removes_links(self, reference_net) -> None:
        """Test that a negative delta drops whole links."""
        grown = apply(reference_net, get_preset("sll-133").event)
        event = TamperEvent(
            kind=TamperKind.INTERPOSER_SLL_CHANGE,
            target_region="interposer",
            magnitude=SllChangeMagnitude(from_count=133, to_count=129),
        )

        shrunk = apply(grown, event)

        assert _sll_nodes(shrunk) == 129
        assert len(shrunk.elements) == len(reference_net.elements)

    def test_renamed_link_elements_rejected(self, reference_net) -> None:
        """Test that a loaded network without sll<j>.r element names is refused by name."""
        renamed = tuple(
            e.model_copy(update={"name": "link0.r"}) if e.name == "sll0.r" else e for e in reference_net.elements
        )
        loaded = reference_net.model_copy(update={"elements": renamed})

        with pytest.raises(ValidationError, match=r"sll0\.r"):
            apply(loaded, get_preset("sll-133").event)

    def test_count_mismatch_rejected(self, reference_net) -> None:
        """Test that the event must start from the network's link count."""
        event = TamperEvent(
            kind=TamperKind.INTERPOSER_SLL_CHANGE,
            target_region="interposer",
            magnitude=SllChangeMagnitude(from_count=100, to_count=104),
        )

        with pytest.raises(ValidationError):
            apply(reference_net, event)

    def test_non_interposer_target_rejected(self, reference_net) -> None:
        """Test that SLL changes only target the interposer."""
        event = TamperEvent(
            kind=TamperKind.INTERPOSER_SLL_CHANGE,
            target_region="chiplet1",
            magnitude=SllChangeMagnitude(from_count=129, to_count=133),
        )

        with pytest.raises(ValidationError):
            apply(reference_net, event)


class TestBranchMove:
    """Tests for far-chiplet re-placement."""

    def test_rewires_branch_without_changing_values(self, reference_net) -> None:
        """Test that the branch now hangs off the target node with identical values."""
        tampered = apply(reference_net, get_preset("far-replacement").event)

        before = {e.name: e for e in reference_net.elements}
        after = {e.name: e for e in tampered.elements}
        assert "c2_0" in (after["rc2_3.r"].node_a, after["rc2_3.r"].node_b)
        assert "c2_3" not in (after["rc2_3.r"].node_a, after["rc2_3.r"].node_b)
        assert [e.value for e in tampered.elements] == [e.value for e in reference_net.elements]
        assert after.keys() == before.keys()

    def test_out_of_grid_index_rejected(self, reference_net) -> None:
        """Test that a grid index beyond the chiplet is refused."""
        event = TamperEvent(
            kind=TamperKind.FAR_REPLACEMENT,
            target_region="chiplet2",
            magnitude=BranchMoveMagnitude(from_index=9, to_index=0),
        )

        with pytest.raises(ValidationError):
            apply(reference_net, event)

    def test_far_event_attenuated_relative_to_adjacent(self, reference_net, band) -> None:
        """Test that the same re-placement moves verifier ripple less on chiplet 2 than on chiplet 1."""
        blocks = monitor_blocks(reference_net)
        actuators, sensors = [0, 8], [0, 8, 16, 24]
        baseline = ripple_amplitudes(reference_net, blocks, actuators, sensors, band)
        far = apply(reference_net, get_preset("far-replacement").event)
        adjacent = apply(reference_net, adjacent_replacement_event(len(reference_net.grid_nodes(1))))

        far_change = np.abs(ripple_amplitudes(far, blocks, actuators, sensors, band) - baseline).max()
        adjacent_change = np.abs(ripple_amplitudes(adjacent, blocks, actuators, sensors, band) - baseline).max()

        assert 0 < far_change < adjacent_change


class TestDesignSwap:
    """Tests for chiplet design swaps."""

    @pytest.mark.parametrize(("name", "total"), [("aes", 2e-9), ("fft", 3.5e-9), ("cnn", 5e-9)])
    def test_total_capacitance(self, reference_net, name: str, total: float) -> None:
        """Test that the new branch capacitances sum to the preset total."""
        tampered = apply(reference_net, get_preset(name).event)

        caps = [e.value for e in tampered.elements if e.name and e.name.startswith("rc1_") and e.name.endswith(".c")]
        assert len(caps) == 4
        assert sum(caps) == pytest.approx(total, rel=1e-12)

    def test_weights_resampled_to_grid(self, reference_net) -> None:
        """Test that a weight profile of another length is interpolated onto the grid."""
        event = TamperEvent(
            kind=TamperKind.DESIGN_SWAP,
            target_region="chiplet1",
            magnitude=DesignSwapMagnitude(total_capacitance=1e-9, weights=(1.0, 3.0)),
        )

        tampered = apply(reference_net, event)

        caps = [e.value for e in tampered.elements if e.name in {f"rc1_{i}.c" for i in range(4)}]
        assert caps == sorted(caps)
        assert sum(caps) == pytest.approx(1e-9, rel=1e-12)


class TestTamperEventSchema:
    """Tests for event documents."""

    def test_kind_must_match_magnitude(self) -> None:
        """Test that a Trojan magnitude cannot describe an SLL change."""
        with pytest.raises(PydanticValidationError):
            TamperEvent(
                kind=TamperKind.INTERPOSER_SLL_CHANGE,
                target_region="interposer",
                magnitude=TrojanMagnitude(),
            )

    def test_sll_change_must_change_count(self) -> None:
        """Test that from_count == to_count is not an event."""
        with pytest.raises(PydanticValidationError):
            SllChangeMagnitude(from_count=129, to_count=129)


class TestScenarioCatalog:
    """Tests for the preset catalog."""

    def test_presets(self) -> None:
        """Test names and case numbers of the catalog."""
        catalog = {p.name: p.case for p in scenario_catalog()}

        assert catalog == {
            "aes": 1,
            "fft": 1,
            "cnn": 1,
            "sll-133": 2,
            "far-replacement": 3,
            "trojan": 4,
        }

    def test_unknown_preset_not_found(self) -> None:
        """Test that unknown names are not found."""
        with pytest.raises(NotFoundError):
            get_preset("rowhammer")

    def test_load_event_by_name_or_file(self, tmp_path: Path) -> None:
        """Test that a preset name and its JSON document resolve to the same event."""
        event = get_preset("trojan").event
        path = tmp_path / "trojan.json"
        path.write_text(event.model_dump_json())

        assert load_event("trojan") == event
        assert load_event(str(path)) == event

    def test_load_event_missing(self, tmp_path: Path) -> None:
        """Test that a name that is neither a preset nor a file is not found."""
        with pytest.raises(NotFoundError):
            load_event(str(tmp_path / "absent.json"))
