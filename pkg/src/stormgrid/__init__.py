"""stormgrid: coupled power/road network hurricane restoration simulator."""

from .coupling import (
    RoadIndex,
    component_accessible,
    fuel_route_available,
    plant_operational,
)
from .engine import (
    ExperimentResult,
    HourRecord,
    MonteCarloConfig,
    MonteCarloResult,
    ReplicationResult,
    SimulationContext,
    run_experiment,
    run_monte_carlo,
    run_replication,
)
from .fragility import (
    FragilityConfig,
    LineFragilityParams,
    RepairModel,
    RepairSpec,
    SubstationFragilityParams,
    p_fail_conductor,
    p_fail_line,
    p_fail_pole,
    p_fail_substation,
    p_fail_tower,
    sample_failures,
    sample_repair,
)
from .hazard import (
    FloodState,
    HazardScenario,
    WindCell,
    drain_step,
    first_passable_hour,
    initial_flood,
    link_passable,
    wind_at,
)
from .metrics import (
    QualitySeries,
    ResilienceSummary,
    bootstrap_mean_ci,
    improvement_pct,
    max_possible_resilience,
    resilience_loss,
    restoration_quantiles,
)
from .network import (
    ComponentKind,
    DamageLevel,
    Household,
    PowerComponent,
    PowerNetwork,
    RoadLink,
    RoadNetwork,
    Status,
    TrafficLight,
    load_networks,
    powered_households,
    powered_set,
    powered_traffic_lights,
)
from .restoration import (
    CrewPool,
    Prioritizer,
    RepairJob,
    RestorationState,
    Strategy,
    priority_order,
    schedule_tick,
)
from .testbed import TestbedParams, generate_testbed

__version__ = "0.1.0"
