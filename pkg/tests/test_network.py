"""Loading, cross-reference validation, and connectivity computations."""

import numpy as np
import pytest

from stormgrid.errors import (
    DanglingReferenceError,
    DisconnectedGridError,
    FormatError,
)
from stormgrid.network import (
    Household,
    Status,
    load_networks,
    powered_households,
    powered_set,
    powered_traffic_lights,
)

from .conftest import make_power, make_roads
from .oracles import bfs_powered


class TestLoadNetworks:
    def test_toy_network_loads_powered(self, toy_files):
        net, roads, households = load_networks(*toy_files)
        assert set(net.components) == {"P", "D"}
        assert net.plants == ["P"]
        assert len(households) == 1
        assert households[0].powered is True
        assert all(c.status is Status.OPERATIONAL for c in net.components.values())
        assert net.fuel_source == {"P": "A"}

    def test_nearest_road_link_assigned(self, toy_files):
        net, _, _ = load_networks(*toy_files)
        assert net.components["P"].nearest_road_link == "L1"
        assert net.components["D"].nearest_road_link == "L1"

    def test_dangling_coupling_reference_named(self, toy_files, tmp_path):
        power, roads, _ = toy_files
        bad = tmp_path / "bad_couplings.txt"
        bad.write_text("household H 0 0 X9\n")
        with pytest.raises(DanglingReferenceError) as err:
            load_networks(power, roads, bad)
        assert "X9" in str(err.value)

    def test_dangling_edge_reference(self, toy_files, tmp_path):
        _, roads, couplings = toy_files
        bad = tmp_path / "bad_power.txt"
        bad.write_text("component P plant 0 0\nedge P GHOST\n")
        with pytest.raises(DanglingReferenceError) as err:
            load_networks(bad, roads, couplings)
        assert "GHOST" in str(err.value)

    def test_parse_error_reports_line(self, toy_files, tmp_path):
        _, roads, couplings = toy_files
        bad = tmp_path / "bad_power.txt"
        bad.write_text("component P plant 0 0\ncomponent D widget 1 1\n")
        with pytest.raises(FormatError) as err:
            load_networks(bad, roads, couplings)
        assert err.value.line_no == 2
        assert "widget" in str(err.value)

    def test_bad_coordinate(self, toy_files, tmp_path):
        _, roads, couplings = toy_files
        bad = tmp_path / "bad_power.txt"
        bad.write_text("component P plant zero 0\n")
        with pytest.raises(FormatError):
            load_networks(bad, roads, couplings)

    def test_duplicate_component_id(self, toy_files, tmp_path):
        _, roads, couplings = toy_files
        bad = tmp_path / "bad_power.txt"
        bad.write_text("component P plant 0 0\ncomponent P plant 1 1\n")
        with pytest.raises(FormatError):
            load_networks(bad, roads, couplings)

    def test_disconnected_household(self, toy_files, tmp_path):
        power, roads, _ = toy_files
        bad_power = tmp_path / "p2.txt"
        bad_power.write_text(
            "component P plant 0 0\ncomponent D pole 10 0\n"
        )  # no edge: pole is stranded
        couplings = tmp_path / "c2.txt"
        couplings.write_text("household H 10 5 D\n")
        with pytest.raises(DisconnectedGridError):
            load_networks(bad_power, roads, couplings)

    def test_light_references_validated(self, toy_files, tmp_path):
        power, roads, _ = toy_files
        bad = tmp_path / "c3.txt"
        bad.write_text("light SG1 NOWHERE D\n")
        with pytest.raises(DanglingReferenceError):
            load_networks(power, roads, bad)

    def test_unknown_record_type(self, toy_files, tmp_path):
        power, _, couplings = toy_files
        bad = tmp_path / "r2.txt"
        bad.write_text("intersection A 0 0\nhighway L1 A A 5\n")
        with pytest.raises(FormatError):
            load_networks(power, bad, couplings)


def chain_net(statuses=()):
    """plant - line - pole single path."""
    net, _ = make_power(
        [("PL", "plant", 0, 0), ("LN", "line", 1, 0), ("PO", "pole", 2, 0)],
        [("PL", "LN"), ("LN", "PO")],
    )
    for cid, status in statuses:
        net.components[cid].status = status
    return net


class TestPoweredSet:
    def test_pristine_all_powered(self):
        net = chain_net()
        assert powered_set(net) == {"PL", "LN", "PO"}

    def test_failed_line_isolates_downstream(self):
        net = chain_net([("LN", Status.FAILED)])
        assert powered_set(net) == {"PL"}

    def test_under_repair_blocks(self):
        net = chain_net([("LN", Status.UNDER_REPAIR)])
        assert powered_set(net) == {"PL"}

    def test_repaired_conducts(self):
        net = chain_net([("LN", Status.REPAIRED)])
        assert powered_set(net) == {"PL", "LN", "PO"}

    def test_fuel_starved_plant_powers_nothing(self):
        net = chain_net()
        assert powered_set(net, operational_plants=set()) == set()

    def test_matches_bfs_oracle_on_random_trees(self):
        rng = np.random.default_rng(17)
        for trial in range(200):
            n = int(rng.integers(2, 51))
            comps = [("G0", "plant", 0, 0)] + [
                (f"N{i}", "pole", i, 0) for i in range(1, n)
            ]
            # random tree: attach each node to an earlier one
            ids = [c[0] for c in comps]
            edges = [
                (ids[int(rng.integers(0, i))], ids[i]) for i in range(1, n)
            ]
            net, _ = make_power(comps, edges)
            k = int(rng.integers(0, 6))
            for cid in rng.choice(ids[1:], size=min(k, n - 1), replace=False):
                net.components[cid].status = Status.FAILED
            conducting = {
                cid: comp.conducting() for cid, comp in net.components.items()
            }
            expected = bfs_powered(net.components, net.edges, net.plants, conducting)
            assert powered_set(net) == expected, f"trial {trial}"

    def test_repair_never_shrinks_powered_set(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            n = int(rng.integers(3, 40))
            comps = [("G0", "plant", 0, 0)] + [
                (f"N{i}", "conductor", i, 0) for i in range(1, n)
            ]
            ids = [c[0] for c in comps]
            edges = [(ids[int(rng.integers(0, i))], ids[i]) for i in range(1, n)]
            net, _ = make_power(comps, edges)
            failed = rng.choice(ids[1:], size=min(4, n - 1), replace=False)
            for cid in failed:
                net.components[cid].status = Status.FAILED
            before = powered_set(net)
            net.components[failed[0]].status = Status.REPAIRED
            after = powered_set(net)
            assert before <= after


class TestPoweredFractions:
    def _ten_household_net(self):
        # plant - line - poleA (6 households); poleA - conductor - poleB (4)
        net, _ = make_power(
            [
                ("PL", "plant", 0, 0),
                ("LN", "line", 1, 0),
                ("PA", "pole", 2, 0),
                ("CO", "conductor", 3, 0),
                ("PB", "pole", 4, 0),
            ],
            [("PL", "LN"), ("LN", "PA"), ("PA", "CO"), ("CO", "PB")],
        )
        households = [
            Household(id=f"H{i}", location=(0, 0), attachment="PA") for i in range(6)
        ] + [
            Household(id=f"H{i+6}", location=(0, 0), attachment="PB") for i in range(4)
        ]
        return net, households

    def test_pristine_fraction_one(self):
        net, hh = self._ten_household_net()
        assert powered_households(net, hh) == 1.0

    def test_downstream_of_failed_conductor(self):
        net, hh = self._ten_household_net()
        net.components["CO"].status = Status.FAILED
        assert powered_households(net, hh) == pytest.approx(0.6)
        assert all(h.powered for h in hh[:6])
        assert not any(h.powered for h in hh[6:])

    def test_fuel_starved_fraction_zero(self):
        net, hh = self._ten_household_net()
        powered = powered_set(net, operational_plants=set())
        assert powered_households(net, hh, powered) == 0.0

    def test_no_households_is_fully_served(self):
        net, _ = self._ten_household_net()
        assert powered_households(net, []) == 1.0

    def test_traffic_light_fraction(self):
        net, _ = self._ten_household_net()
        roads = make_roads(
            {"A": (0, 0)},
            [("L1", "A", "A", 1)] if False else [],
            lights=[
                ("S1", "A", "PA"),
                ("S2", "A", "PA"),
                ("S3", "A", "PA"),
                ("S4", "A", "PB"),
                ("S5", "A", "PB"),
            ],
        )
        roads.intersections = {"A": (0.0, 0.0)}
        net.components["CO"].status = Status.FAILED
        assert powered_traffic_lights(net, roads) == pytest.approx(0.6)

    def test_traffic_lights_all_out(self):
        net, _ = self._ten_household_net()
        roads = make_roads(
            {"A": (0, 0)},
            [],
            lights=[("S1", "A", "PA"), ("S2", "A", "PB")],
        )
        net.components["LN"].status = Status.FAILED
        assert powered_traffic_lights(net, roads) == 0.0

    def test_no_lights_is_fully_served(self):
        net, _ = self._ten_household_net()
        roads = make_roads({"A": (0, 0)}, [])
        assert powered_traffic_lights(net, roads) == 1.0


class TestNearestRoadLink:
    def test_tie_breaks_to_lowest_link_id(self):
        # component equidistant from both link midpoints
        net, _ = make_power([("P", "plant", 100, 10)], [])
        roads = make_roads(
            {"A": (0, 0), "B": (100, 0), "C": (200, 0)},
            [("LB", "A", "B", 100), ("LA", "B", "C", 100)],
        )
        from stormgrid.network import assign_nearest_road_links

        assign_nearest_road_links(net.components, roads)
        # midpoints at (50,0) and (150,0) are equidistant from (100,10)
        assert net.components["P"].nearest_road_link == "LA"

    def test_picks_closest_midpoint(self):
        net, _ = make_power([("P", "plant", 40, 0)], [])
        roads = make_roads(
            {"A": (0, 0), "B": (100, 0), "C": (200, 0)},
            [("L1", "A", "B", 100), ("L2", "B", "C", 100)],
        )
        from stormgrid.network import assign_nearest_road_links

        assign_nearest_road_links(net.components, roads)
        assert net.components["P"].nearest_road_link == "L1"
