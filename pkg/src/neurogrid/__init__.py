"""Deterministic grid-world agent simulator with a behavioural-audit toolkit:
sliding-window pathology detectors, an escape-lever governor, and GP
destructive testing that evolves worlds and governor configurations."""

from .agent import (
    AversiveMemory,
    Homeostat,
    PlannerConfig,
    TickRecord,
    Trace,
    deposit_and_decay,
    homeostat_tick,
    read_trace_csv,
    run_episode,
    step_execute,
    trace_to_csv,
    write_trace_csv,
)
from .detectors import (
    MODALITIES,
    DetectorConfig,
    DetectorReport,
    detect,
    detect_all,
    prefix_edit_fraction,
    window_stats,
)
from .governor import (
    PRESETS,
    Commitment,
    Governor,
    GovernorConfig,
    accept_plan,
    calibrate,
    override_check,
    smooth_and_hysteresis,
)
from .lawmetrics import LawScores, law_scores, neurosis_score, oracle_episode_cost, regret
from .planner import CostWeights, Plan, build_view, fuse, local_policy, near_tie, plan_path, select_target
from .scenarios import canonical_scenario, scenario_by_name
from .world import (
    CellKind,
    Grid,
    Observation,
    Seasoning,
    VisibilityModel,
    WorldSpec,
    build_world,
    respawn_food,
    visible_set,
)

__version__ = "0.1.0"
