"""Crew-constrained repair scheduling under three priority strategies.

All strategies repair the critical tier (substations, towers, transmission
lines) ahead of the distribution tier (poles, conductors):

* component-based: substations by unpowered-household count, transmission in
  id order, then the distribution tier in a fresh uniform-random order each
  hour;
* distance-based: transmission by road distance to a plant, substations by
  unpowered-household count, distribution by road distance to its substation;
* traffic-light-based: a first pass over components feeding an unpowered
  traffic light (same keys as distance-based, substations by unpowered-light
  count), then everything else distance-based.

Scheduling walks the priority list each hour, skipping components whose road
link is still flooded or whose crew demand exceeds what is free, so lower
tiers start ahead of blocked critical work. Jobs are non-preemptive.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .coupling import RoadIndex, component_accessible, component_road_node
from .fragility import RepairModel, sample_repair
from .hazard import FloodState, HazardScenario
from .network import (
    CRITICAL_KINDS,
    ComponentKind,
    Household,
    PowerNetwork,
    RoadNetwork,
    Status,
    powered_set,
)


class Strategy(enum.Enum):
    COMPONENT_BASED = "component"
    DISTANCE_BASED = "distance"
    TRAFFIC_LIGHT_BASED = "traffic-light"

    @classmethod
    def from_name(cls, name: str) -> "Strategy":
        for s in cls:
            if s.value == name:
                return s
        valid = ", ".join(s.value for s in cls)
        raise ValueError(f"unknown strategy {name!r}; valid: {valid}")


@dataclass
class CrewPool:
    total: int
    available: int = -1

    def __post_init__(self):
        if self.total < 1:
            raise ValueError("crew pool must have at least one team")
        if self.available < 0:
            self.available = self.total
        if not (0 <= self.available <= self.total):
            raise ValueError("available crews out of range")

    def debit(self, crews: int) -> None:
        if crews > self.available:
            raise ValueError("crew pool overdrawn")
        self.available -= crews

    def credit(self, crews: int) -> None:
        if self.available + crews > self.total:
            raise ValueError("crew pool over-credited")
        self.available += crews


@dataclass
class RepairJob:
    component_id: str
    start_hour: int
    duration_hours: int
    crews: int

    def done_at(self) -> int:
        return self.start_hour + self.duration_hours


class Prioritizer:
    """Strategy orderings over failed components, with static maps precomputed.

    Road distances are measured over the currently passable subgraph (a
    component cut off by floodwater sorts last, mirroring the access gate)
    and cached per passable set, which recurs across hours and replications.
    """

    def __init__(
        self,
        net: PowerNetwork,
        roads: RoadNetwork,
        households: list[Household],
        road_index: RoadIndex | None = None,
    ):
        self.net = net
        self.roads = roads
        self.households = households
        self.index = net.index
        self.road_index = road_index or RoadIndex(roads)

        idx = self.index
        rix = self.road_index
        self.comp_node = np.array(
            [
                rix.pos[component_road_node(net.components[cid], roads)]
                for cid in idx.ids
            ],
            dtype=np.intp,
        )
        self.plant_nodes = sorted({int(self.comp_node[i]) for i in idx.plant_idx})

        kinds = [net.components[cid].kind for cid in idx.ids]
        self.is_sub = np.array([k is ComponentKind.SUBSTATION for k in kinds])
        self.is_transmission = np.array(
            [k in (ComponentKind.TOWER, ComponentKind.LINE) for k in kinds]
        )
        self.is_distribution = np.array(
            [k in (ComponentKind.POLE, ComponentKind.CONDUCTOR) for k in kinds]
        )

        self.hh_attach = np.array(
            [idx.pos[hh.attachment] for hh in households], dtype=np.intp
        )
        hh_sub = idx.substation_of[self.hh_attach] if len(households) else np.array([], dtype=np.intp)
        self.hh_by_sub: dict[int, np.ndarray] = {
            int(s): np.flatnonzero(hh_sub == s) for s in np.unique(hh_sub) if s >= 0
        }

        lights = list(roads.traffic_lights.values())
        self.light_ids = [tl.id for tl in lights]
        self.light_feed = np.array(
            [idx.pos[tl.feed_component] for tl in lights], dtype=np.intp
        )
        light_sub = (
            idx.substation_of[self.light_feed] if lights else np.array([], dtype=np.intp)
        )
        self.lights_by_sub: dict[int, np.ndarray] = {
            int(s): np.flatnonzero(light_sub == s)
            for s in np.unique(light_sub)
            if s >= 0
        }
        # Static feed path per light (component and its upstream chain);
        # inverted to: component -> lights whose path crosses it.
        through: dict[int, list[int]] = {}
        for li, feed in enumerate(self.light_feed):
            for c in idx.path_to_root(int(feed)):
                through.setdefault(c, []).append(li)
        self.lights_through: dict[int, np.ndarray] = {
            c: np.array(ls, dtype=np.intp) for c, ls in through.items()
        }

        self._dist_cache: dict[bytes, tuple[np.ndarray, dict[int, np.ndarray]]] = {}

    # -- distance fields ----------------------------------------------------

    def _distances(self, flood: FloodState | None, scenario: HazardScenario):
        if flood is None:
            mask = np.ones(len(self.road_index.link_ids), dtype=bool)
        else:
            mask = flood.passable_mask(scenario.passable_threshold_in)
        key = mask.tobytes()
        cached = self._dist_cache.get(key)
        if cached is None:
            to_plant = self.road_index.distances_from(self.plant_nodes, mask)
            from_sub = {
                int(s): self.road_index.distances_from(
                    [int(self.comp_node[s])], mask
                )
                for s in np.flatnonzero(self.is_sub)
            }
            cached = (to_plant, from_sub)
            self._dist_cache[key] = cached
        return cached

    def _dist_tc(self, c: int, to_plant: np.ndarray) -> float:
        return float(to_plant[self.comp_node[c]])

    def _dist_dc(self, c: int, from_sub: dict[int, np.ndarray]) -> float:
        s = int(self.index.substation_of[c])
        if s < 0 or s not in from_sub:
            return float("inf")
        return float(from_sub[s][self.comp_node[c]])

    # -- per-tick service state ----------------------------------------------

    def _hh_powered(self, hh_powered: np.ndarray | None) -> np.ndarray:
        if hh_powered is not None:
            return hh_powered
        powered = powered_set(self.net)
        return np.array([hh.attachment in powered for hh in self.households])

    def _light_powered(self, light_powered: np.ndarray | None) -> np.ndarray:
        if light_powered is not None:
            return light_powered
        powered = powered_set(self.net)
        lights = self.roads.traffic_lights
        return np.array(
            [lights[lid].feed_component in powered for lid in self.light_ids]
        )

    def _unpowered_households_below(self, sub: int, hh_powered: np.ndarray) -> int:
        members = self.hh_by_sub.get(sub)
        if members is None or members.size == 0:
            return 0
        return int((~hh_powered[members]).sum())

    def _unpowered_lights_below(self, sub: int, light_powered: np.ndarray) -> int:
        members = self.lights_by_sub.get(sub)
        if members is None or members.size == 0:
            return 0
        return int((~light_powered[members]).sum())

    def _feeds_unpowered_light(self, c: int, light_powered: np.ndarray) -> bool:
        lights = self.lights_through.get(c)
        if lights is None:
            return False
        return bool((~light_powered[lights]).any())

    # -- orderings ------------------------------------------------------------

    def _distance_blocks(
        self,
        comp_idx: list[int],
        to_plant: np.ndarray,
        from_sub: dict[int, np.ndarray],
        hh_powered: np.ndarray,
    ) -> list[int]:
        ids = self.index.ids
        trans = [c for c in comp_idx if self.is_transmission[c]]
        subs = [c for c in comp_idx if self.is_sub[c]]
        dcs = [c for c in comp_idx if self.is_distribution[c]]
        trans.sort(key=lambda c: (self._dist_tc(c, to_plant), ids[c]))
        subs.sort(
            key=lambda c: (-self._unpowered_households_below(c, hh_powered), ids[c])
        )
        dcs.sort(key=lambda c: (self._dist_dc(c, from_sub), ids[c]))
        return trans + subs + dcs

    def order(
        self,
        strategy: Strategy,
        failed: Iterable[str],
        flood: FloodState | None,
        scenario: HazardScenario,
        rng: np.random.Generator,
        hh_powered: np.ndarray | None = None,
        light_powered: np.ndarray | None = None,
    ) -> list[str]:
        ids = self.index.ids
        pos = self.index.pos
        comp_idx = sorted(pos[cid] for cid in failed)
        hh_pow = self._hh_powered(hh_powered)

        if strategy is Strategy.COMPONENT_BASED:
            subs = [c for c in comp_idx if self.is_sub[c]]
            trans = [c for c in comp_idx if self.is_transmission[c]]
            dcs = [c for c in comp_idx if self.is_distribution[c]]
            subs.sort(
                key=lambda c: (-self._unpowered_households_below(c, hh_pow), ids[c])
            )
            shuffled = [dcs[i] for i in rng.permutation(len(dcs))]
            return [ids[c] for c in subs + trans + shuffled]

        to_plant, from_sub = self._distances(flood, scenario)

        if strategy is Strategy.DISTANCE_BASED:
            ordered = self._distance_blocks(comp_idx, to_plant, from_sub, hh_pow)
            return [ids[c] for c in ordered]

        if strategy is Strategy.TRAFFIC_LIGHT_BASED:
            light_pow = self._light_powered(light_powered)
            first = [c for c in comp_idx if self._feeds_unpowered_light(c, light_pow)]
            rest = [c for c in comp_idx if not self._feeds_unpowered_light(c, light_pow)]
            f_trans = [c for c in first if self.is_transmission[c]]
            f_subs = [c for c in first if self.is_sub[c]]
            f_dcs = [c for c in first if self.is_distribution[c]]
            f_trans.sort(key=lambda c: (self._dist_tc(c, to_plant), ids[c]))
            f_subs.sort(
                key=lambda c: (-self._unpowered_lights_below(c, light_pow), ids[c])
            )
            f_dcs.sort(key=lambda c: (self._dist_dc(c, from_sub), ids[c]))
            second = self._distance_blocks(rest, to_plant, from_sub, hh_pow)
            return [ids[c] for c in f_trans + f_subs + f_dcs + second]

        raise ValueError(f"unknown strategy {strategy!r}")


def priority_order(
    strategy: Strategy,
    failed: Iterable[str],
    net: PowerNetwork,
    roads: RoadNetwork,
    flood: FloodState | None = None,
    scenario: HazardScenario | None = None,
    households: list[Household] | None = None,
    rng: np.random.Generator | None = None,
) -> list[str]:
    """One-shot strategy ordering; see :class:`Prioritizer` for the hot path."""
    scenario = scenario or HazardScenario()
    rng = rng if rng is not None else np.random.default_rng(0)
    prio = Prioritizer(net, roads, households or [])
    return prio.order(strategy, failed, flood, scenario, rng)


# ---------------------------------------------------------------------------
# Scheduling


DurationRng = Callable[[str], np.random.Generator]


@dataclass
class RestorationState:
    pool: CrewPool
    active: list[RepairJob] = field(default_factory=list)
    completed: list[RepairJob] = field(default_factory=list)

    def crews_in_use(self) -> int:
        return sum(job.crews for job in self.active)


def complete_due_jobs(
    state: RestorationState, net: PowerNetwork, hour: int
) -> list[str]:
    """Finish jobs whose time has elapsed; credit their crews back."""
    done: list[str] = []
    still: list[RepairJob] = []
    for job in state.active:
        comp = net.components[job.component_id]
        if job.done_at() <= hour:
            comp.status = Status.REPAIRED
            comp.repair_hours_remaining = 0.0
            state.pool.credit(job.crews)
            state.completed.append(job)
            done.append(job.component_id)
        else:
            comp.repair_hours_remaining = float(job.done_at() - hour)
            still.append(job)
    state.active = still
    return done


def start_pending_jobs(
    state: RestorationState,
    order: list[str],
    net: PowerNetwork,
    flood: FloodState,
    scenario: HazardScenario,
    repair_model: RepairModel,
    hour: int,
    duration_rng: DurationRng,
) -> list[RepairJob]:
    """Walk the priority list and start every job that is startable now.

    A component is skipped while its road link is impassable or while free
    crews fall short of its requirement; the walk continues so accessible,
    cheaper work further down the list is not blocked. A job whose crew
    demand exceeds the whole pool can never start, and the replication ends
    in the hard-cap diagnostic; size the pool to the largest requirement.
    """
    started: list[RepairJob] = []
    pool = state.pool
    for cid in order:
        comp = net.components[cid]
        if comp.status is not Status.FAILED:
            continue
        if not component_accessible(comp, flood, scenario):
            continue
        spec = repair_model.spec_for(comp.kind, comp.damage_level)
        if spec.crews > pool.available:
            continue
        duration, _ = sample_repair(comp, repair_model, duration_rng(cid))
        comp.status = Status.UNDER_REPAIR
        comp.crews_required = spec.crews
        comp.repair_hours_remaining = float(duration)
        pool.debit(spec.crews)
        job = RepairJob(
            component_id=cid, start_hour=hour, duration_hours=duration,
            crews=spec.crews,
        )
        state.active.append(job)
        started.append(job)
    return started


def schedule_tick(
    state: RestorationState,
    strategy: Strategy,
    net: PowerNetwork,
    roads: RoadNetwork,
    households: list[Household],
    flood: FloodState,
    scenario: HazardScenario,
    repair_model: RepairModel,
    hour: int,
    rng: np.random.Generator,
    prioritizer: Prioritizer | None = None,
    duration_rng: DurationRng | None = None,
) -> tuple[list[str], list[RepairJob]]:
    """One scheduling pass: complete due jobs, then start what fits.

    Returns (completed component ids, started jobs). The simulation engine
    calls the two phases separately so quality is measured between them; this
    composition serves direct use and tests.
    """
    completed = complete_due_jobs(state, net, hour)
    prio = prioritizer or Prioritizer(net, roads, households)
    failed = [
        cid for cid, c in net.components.items() if c.status is Status.FAILED
    ]
    order = prio.order(strategy, failed, flood, scenario, rng)
    if duration_rng is None:
        duration_rng = lambda cid: rng  # noqa: E731 - shared stream fallback
    started = start_pending_jobs(
        state, order, net, flood, scenario, repair_model, hour, duration_rng
    )
    return completed, started
