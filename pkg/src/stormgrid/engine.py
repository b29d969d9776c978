"""Hourly simulation loop, replication driver, and Monte Carlo aggregation.

Each replication: sample wind failures once at hour 0, then step hour by
hour; floodwater drains, due repairs complete, grid connectivity and the two
quality fractions are remeasured, and new repair jobs start under the chosen
strategy, until every failed component is repaired and every household has
power again.

Seeding is layered so comparisons are paired: the failure draw comes from a
substream of the replication seed that no strategy-dependent code touches,
and each component's repair duration comes from its own substream, so two
strategies (or two coupling settings) run against identical failure sets and
identical per-component repair times.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .coupling import RoadIndex, component_road_node, resolve_fuel_nodes
from .errors import ConfigError, SimulationCapError
from .fragility import FragilityConfig, RepairModel, sample_failures
from .hazard import FloodState, HazardScenario, drain_step, initial_flood
from .metrics import QualitySeries, normal_ci_halfwidth
from .network import Household, PowerNetwork, RoadNetwork
from .restoration import (
    CrewPool,
    Prioritizer,
    RestorationState,
    Strategy,
    complete_due_jobs,
    start_pending_jobs,
)

HARD_CAP_HOURS = 10_000

# Substream tags for the layered seeding scheme.
_STREAM_FAILURES = 0
_STREAM_SCHEDULING = 1
_STREAM_REPAIR = 2


@dataclass
class HourRecord:
    hour: int
    q_households: float
    q_traffic_lights: float
    failed_components: int
    passable_links: int
    crews_available: int
    crews_in_use: int


@dataclass
class ReplicationResult:
    seed: int
    strategy: Strategy
    households: QualitySeries
    traffic_lights: QualitySeries
    records: list[HourRecord]
    events: list[tuple[int, str, str]]
    initial_failures: list[str]

    def horizon(self) -> int:
        return self.records[-1].hour


class SimulationContext:
    """Static per-network state shared across replications and strategies.

    Holds the integer indexes, the prioritizer (with its road-distance
    caches), and the household/light attachment arrays. Replications mutate
    only component statuses and must run one at a time per context.
    """

    def __init__(
        self,
        net: PowerNetwork,
        roads: RoadNetwork,
        households: list[Household],
    ):
        self.net = net
        self.roads = roads
        self.households = households
        self.index = net.index
        self.road_index = RoadIndex(roads)
        self.prioritizer = Prioritizer(net, roads, households, self.road_index)
        self.hh_attach = self.prioritizer.hh_attach
        self.light_feed = self.prioritizer.light_feed
        self.plant_pos = self.index.plant_idx
        self.plant_ids = list(net.plants)
        self.plant_road_node = {
            pid: self.road_index.pos[component_road_node(net.components[pid], roads)]
            for pid in self.plant_ids
        }


def _fuel_ok(
    ctx: SimulationContext,
    scenario: HazardScenario,
    fuel_nodes: dict[str, str],
    flood: FloodState,
) -> dict[str, bool]:
    if not scenario.fuel_dependence:
        return {pid: True for pid in ctx.plant_ids}
    labels = ctx.road_index.labels_for(
        flood.passable_mask(scenario.passable_threshold_in)
    )
    out = {}
    for pid in ctx.plant_ids:
        src = ctx.road_index.pos[fuel_nodes[pid]]
        dst = ctx.plant_road_node[pid]
        out[pid] = bool(labels[src] == labels[dst])
    return out


def run_replication(
    net: PowerNetwork,
    roads: RoadNetwork,
    households: list[Household],
    scenario: HazardScenario,
    fragility: FragilityConfig,
    repair_model: RepairModel,
    strategy: Strategy,
    teams: int,
    seed: int,
    hard_cap: int = HARD_CAP_HOURS,
    context: SimulationContext | None = None,
) -> ReplicationResult:
    """One seeded end-to-end replication; deterministic given (seed, config)."""
    ctx = context or SimulationContext(net, roads, households)
    idx = ctx.index
    net.reset_statuses()

    failure_rng = np.random.default_rng([seed, _STREAM_FAILURES])
    schedule_rng = np.random.default_rng([seed, _STREAM_SCHEDULING])

    def duration_rng(cid: str) -> np.random.Generator:
        return np.random.default_rng([seed, _STREAM_REPAIR, idx.pos[cid]])

    flood = initial_flood(scenario, roads.link_ids)
    fuel_nodes = resolve_fuel_nodes(net, roads, scenario, ctx.road_index)

    failed = sample_failures(net, scenario, fragility, failure_rng)
    pending = set(failed)
    alive = np.ones(len(idx.ids), dtype=bool)
    for cid in failed:
        alive[idx.pos[cid]] = False

    state = RestorationState(pool=CrewPool(total=teams))
    events: list[tuple[int, str, str]] = [(0, "failed", cid) for cid in failed]
    records: list[HourRecord] = []

    q_hh = q_tl = 0.0
    hh_powered = np.zeros(len(households), dtype=bool)
    light_powered = np.zeros(len(ctx.light_feed), dtype=bool)
    fuel_ok: dict[str, bool] = {}
    last_passable = -1

    def remeasure() -> None:
        nonlocal q_hh, q_tl, hh_powered, light_powered
        live_plants = np.array(
            [p for p in ctx.plant_pos if fuel_ok[idx.ids[p]]], dtype=np.intp
        )
        powered = idx.powered_mask(alive, live_plants)
        hh_powered = (
            powered[ctx.hh_attach] if len(households) else np.ones(0, dtype=bool)
        )
        light_powered = (
            powered[ctx.light_feed]
            if len(ctx.light_feed)
            else np.ones(0, dtype=bool)
        )
        q_hh = float(hh_powered.mean()) if len(households) else 1.0
        q_tl = float(light_powered.mean()) if len(ctx.light_feed) else 1.0

    for hour in range(hard_cap + 1):
        if hour > 0:
            flood = drain_step(flood, scenario)

        completed = complete_due_jobs(state, net, hour) if hour > 0 else []
        for cid in completed:
            alive[idx.pos[cid]] = True
            events.append((hour, "repaired", cid))

        passable = flood.passable_count(scenario.passable_threshold_in)
        passable_changed = passable != last_passable
        last_passable = passable

        fuel_changed = False
        if hour == 0 or (passable_changed and scenario.fuel_dependence):
            new_fuel = _fuel_ok(ctx, scenario, fuel_nodes, flood)
            fuel_changed = new_fuel != fuel_ok
            if fuel_changed:
                for pid, ok in new_fuel.items():
                    if ok and not fuel_ok.get(pid, False):
                        events.append((hour, "fuel_restored", pid))
                fuel_ok = new_fuel

        if hour == 0 or completed or fuel_changed:
            remeasure()

        if pending and state.pool.available > 0 and (
            hour == 0 or completed or passable_changed
        ):
            order = ctx.prioritizer.order(
                strategy,
                pending,
                flood,
                scenario,
                schedule_rng,
                hh_powered=hh_powered,
                light_powered=light_powered,
            )
            started = start_pending_jobs(
                state, order, net, flood, scenario, repair_model, hour, duration_rng
            )
            for job in started:
                pending.discard(job.component_id)
                events.append((hour, "job_started", job.component_id))

        records.append(
            HourRecord(
                hour=hour,
                q_households=q_hh,
                q_traffic_lights=q_tl,
                failed_components=len(pending) + len(state.active),
                passable_links=passable,
                crews_available=state.pool.available,
                crews_in_use=state.crews_in_use(),
            )
        )

        if not pending and not state.active and q_hh >= 1.0:
            break
    else:
        raise SimulationCapError(
            hard_cap,
            {
                "unrepaired": sorted(pending)
                + sorted(j.component_id for j in state.active),
                "q_households": q_hh,
                "passable_links": last_passable,
                "strategy": strategy.value,
                "seed": seed,
            },
        )

    for hh in households:
        hh.powered = True

    hh_series = _series_from_records(records, lambda r: r.q_households)
    tl_series = _series_from_records(records, lambda r: r.q_traffic_lights)
    return ReplicationResult(
        seed=seed,
        strategy=strategy,
        households=hh_series,
        traffic_lights=tl_series,
        records=records,
        events=events,
        initial_failures=failed,
    )


def _series_from_records(
    records: list[HourRecord], getter: Callable[[HourRecord], float]
) -> QualitySeries:
    samples = [(r.hour, getter(r)) for r in records]
    t1 = samples[-1][0]
    for hour, q in samples:
        if q >= 1.0:
            t1 = hour
            break
    return QualitySeries(samples=samples, t0=samples[0][0], t1=t1)


# ---------------------------------------------------------------------------
# Monte Carlo driver


@dataclass
class MonteCarloConfig:
    confidence: float = 0.90
    relative_halfwidth: float = 0.10
    min_replications: int = 10
    max_replications: int = 200
    base_seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.confidence < 1.0):
            raise ConfigError(f"confidence must be in (0, 1), got {self.confidence}")
        if self.relative_halfwidth <= 0:
            raise ConfigError("relative halfwidth must be > 0")
        if self.min_replications < 2:
            raise ConfigError("need at least 2 replications for a CI")
        if self.max_replications < self.min_replications:
            raise ConfigError("max replications below the minimum")


@dataclass
class MonteCarloResult:
    replications: list[ReplicationResult]
    statistics: np.ndarray
    mean_statistic: float
    ci_halfwidth: float
    converged: bool

    def n(self) -> int:
        return len(self.replications)


def run_monte_carlo(
    config: MonteCarloConfig,
    run_one: Callable[[int], ReplicationResult],
) -> MonteCarloResult:
    """Replicate until the mean powered-household proportion is pinned down.

    The per-replication statistic is the time-averaged household quality.
    After each replication past the minimum, the normal-approximation CI of
    its mean is checked against the relative half-width target; hitting the
    maximum without convergence is flagged, not fatal.
    """
    results: list[ReplicationResult] = []
    stats: list[float] = []
    converged = False
    for i in range(config.max_replications):
        res = run_one(config.base_seed + i)
        results.append(res)
        stats.append(res.households.time_averaged())
        if len(stats) >= config.min_replications:
            arr = np.array(stats)
            mean = float(arr.mean())
            hw = normal_ci_halfwidth(arr, config.confidence)
            if mean > 0 and hw <= config.relative_halfwidth * mean:
                converged = True
                break
            if mean == 0 and hw == 0:
                converged = True
                break
    arr = np.array(stats)
    return MonteCarloResult(
        replications=results,
        statistics=arr,
        mean_statistic=float(arr.mean()),
        ci_halfwidth=normal_ci_halfwidth(arr, config.confidence),
        converged=converged,
    )


def make_replication_runner(
    ctx: SimulationContext,
    scenario: HazardScenario,
    fragility: FragilityConfig,
    repair_model: RepairModel,
    strategy: Strategy,
    teams: int,
    hard_cap: int = HARD_CAP_HOURS,
) -> Callable[[int], ReplicationResult]:
    def run_one(seed: int) -> ReplicationResult:
        return run_replication(
            ctx.net,
            ctx.roads,
            ctx.households,
            scenario,
            fragility,
            repair_model,
            strategy,
            teams,
            seed,
            hard_cap=hard_cap,
            context=ctx,
        )

    return run_one


@dataclass
class ExperimentResult:
    """Per-strategy Monte Carlo outputs for one scenario."""

    by_strategy: dict[Strategy, MonteCarloResult]
    baseline: Strategy
    mc_config: MonteCarloConfig
    teams: int = 0

    def mpr_horizon(self) -> float:
        """Mean 100%-restoration hour of the baseline strategy's replications."""
        base = self.by_strategy[self.baseline]
        hours = [rep.households.t1 - rep.households.t0 for rep in base.replications]
        horizon = float(np.mean(hours))
        return max(horizon, 1.0)


def run_experiment(
    net: PowerNetwork,
    roads: RoadNetwork,
    households: list[Household],
    scenario: HazardScenario,
    fragility: FragilityConfig,
    repair_model: RepairModel,
    strategies: Iterable[Strategy],
    teams: int,
    mc_config: MonteCarloConfig,
    context: SimulationContext | None = None,
) -> ExperimentResult:
    """Run every requested strategy against paired seeds and collect results."""
    ctx = context or SimulationContext(net, roads, households)
    strategies = list(strategies)
    by_strategy: dict[Strategy, MonteCarloResult] = {}
    for strategy in strategies:
        runner = make_replication_runner(
            ctx, scenario, fragility, repair_model, strategy, teams
        )
        by_strategy[strategy] = run_monte_carlo(mc_config, runner)
    baseline = (
        Strategy.COMPONENT_BASED
        if Strategy.COMPONENT_BASED in by_strategy
        else strategies[0]
    )
    return ExperimentResult(
        by_strategy=by_strategy,
        baseline=baseline,
        mc_config=mc_config,
        teams=teams,
    )
