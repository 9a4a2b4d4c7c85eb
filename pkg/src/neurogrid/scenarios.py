"""Canonical minimal worlds, one per behavioural pathology.

Every scenario pins all of its numbers (geometry, seasoning, homeostat,
controller rules) so the shipped JSON files are self-contained and the runs
are reproducible. Deterministic driver choices:

- tie-canon alternation stands in for queue-order noise in the planner's
  open-list: odd ticks reverse the lexicographic tie canon;
- model cost jitter is a seed-independent hash of (tick, cell), so the same
  flicker pattern replays on every seed;
- corridor risk flicker alternates by tick parity, a deterministic stand-in
  for drifting hazard estimates.
"""

from __future__ import annotations

from .world import CellKind, Pos, Seasoning, VisibilityModel, WorldSpec

MODALITIES = (
    "flipflop",
    "plan_churn",
    "perseveration",
    "paralysis",
    "hypervigilance",
    "futile_search",
    "belief_incoherence",
    "tiebreak_thrash",
    "corridor_thrash",
    "optimality_compulsion",
    "metric_mismatch",
    "policy_oscillation",
    "myopic_pingpong",
    "exploration_paralysis",
)

EXTRA_SCENARIOS = ("healthy", "phobia")


class ScenarioError(ValueError):
    pass


def _rock() -> CellKind:
    return CellKind(kind="rock")


def _risk(r: float) -> CellKind:
    return CellKind(kind="risk_band", risk=r)


def _ice(factor: float, slip: float = 0.0) -> CellKind:
    return CellKind(kind="ice_band", energy_factor=factor, slip_prob=slip)


def _mirage(lure: float) -> CellKind:
    return CellKind(kind="mirage_band", lure=lure)


def _food(meal: float = 5.0, poisonous: bool = False) -> CellKind:
    return CellKind(kind="food", meal=meal, poisonous=poisonous)


def _wall_row(cells: dict, y: int, x0: int, x1: int) -> None:
    for x in range(x0, x1 + 1):
        cells[(x, y)] = _rock()


def _healthy() -> WorldSpec:
    return WorldSpec(
        width=10, height=10, start=(0, 0),
        cells={(9, 9): _food(meal=8.0)},
        food_respawn=True, max_ticks=60, name="healthy",
        seasoning=Seasoning(),
    )


def _flipflop() -> WorldSpec:
    # central blockage, two symmetric staircase families; the alternating
    # canon flips the opening step every replan while costs stay tied
    cells: dict[Pos, CellKind] = {(3, 1): _rock(), (6, 3): _food()}
    return WorldSpec(
        width=7, height=4, start=(0, 0), cells=cells,
        max_ticks=40, name="flipflop",
        seasoning=Seasoning(
            tie_canon_mode="alternate",
            recency_penalty=0.05, recency_decay=0.5,
        ),
    )


def _plan_churn() -> WorldSpec:
    # sub-percent model flicker on every cell keeps rewriting the prefix of
    # near-equal monotone routes
    cells: dict[Pos, CellKind] = {(13, 7): _food()}
    return WorldSpec(
        width=14, height=8, start=(0, 0), cells=cells,
        max_ticks=52, name="plan_churn",
        seasoning=Seasoning(cost_jitter_amp=0.01, jitter_salt=17),
    )


def _perseveration() -> WorldSpec:
    # two-cell pocket: A sits at 0.1 with neighbours {0.3, 0.9, 0.9}; B at 0.3
    # with other neighbours {0.4, 0.4}; the myopic min-fear rule orbits A-B
    cells: dict[Pos, CellKind] = {}
    for x in range(2, 6):
        cells[(x, 2)] = _rock()
    risks = {
        (0, 1): 0.9, (0, 2): 0.9, (1, 2): 0.9,
        (0, 0): 0.9, (1, 0): 0.5, (2, 0): 0.4, (1, 1): 0.4,
        (2, 1): 0.3,            # B
        (3, 1): 0.1,            # A
        (3, 0): 0.9, (4, 0): 0.9, (5, 0): 0.9, (6, 0): 0.9,
        (4, 1): 0.9, (5, 1): 0.9,
        (0, 3): 0.9, (1, 3): 0.9, (2, 3): 0.9, (3, 3): 0.9,
        (4, 3): 0.9, (5, 3): 0.9, (6, 3): 0.9, (6, 2): 0.9,
    }
    for pos, r in risks.items():
        cells[pos] = _risk(r)
    cells[(6, 1)] = _food()
    return WorldSpec(
        width=7, height=4, start=(0, 0), cells=cells,
        max_ticks=60, name="perseveration",
        seasoning=Seasoning(controller="local", classifier="none"),
    )


def _paralysis() -> WorldSpec:
    # near-equal first steps plus a decision cost for moving from rest make
    # "do nothing this tick" the per-tick argmin, forever
    cells: dict[Pos, CellKind] = {(6, 1): _food()}
    return WorldSpec(
        width=7, height=4, start=(0, 1), cells=cells,
        proceed_cue_tick=0, max_ticks=40, name="paralysis",
        seasoning=Seasoning(idle_cost=1.0, move_commit_extra=0.5),
    )


def _hypervigilance() -> WorldSpec:
    # two avenues within one percent; the pause-to-reevaluate rule never exits
    # the near-tie band
    cells: dict[Pos, CellKind] = {(3, 1): _rock(), (3, 2): _risk(0.08), (6, 1): _food()}
    return WorldSpec(
        width=7, height=4, start=(0, 1), cells=cells,
        proceed_cue_tick=0, max_ticks=40, name="hypervigilance",
        seasoning=Seasoning(pause_on_near_tie=True),
    )


def _futile_search() -> WorldSpec:
    # mirage bands attract from afar and repel up close; the strip between
    # them is unmodelled rough ground, so the dance burns unforecast energy
    cells: dict[Pos, CellKind] = {}
    for y in range(4):
        cells[(2, y)] = _mirage(lure=0.55)
        cells[(4, y)] = _mirage(lure=0.55)
        for x in (1, 3, 5):
            cells[(x, y)] = _ice(factor=1.35)
    cells[(6, 2)] = _food()
    return WorldSpec(
        width=7, height=4, start=(0, 1), cells=cells,
        max_ticks=60, name="futile_search",
        seasoning=Seasoning(mirage_near_factor=4.0, mirage_radius=1, classifier="none"),
    )


def _belief_incoherence() -> WorldSpec:
    # rough direct lane vs a shallow strip: the myopic module scores the strip
    # acceptable while the global planner detours along the lane
    cells: dict[Pos, CellKind] = {}
    for x in range(1, 12):
        cells[(x, 0)] = _risk(0.3)
    for x in range(0, 13):
        cells[(x, 1)] = _risk(0.2)
    cells[(12, 0)] = _food()
    return WorldSpec(
        width=13, height=2, start=(0, 0), cells=cells,
        max_ticks=44, name="belief_incoherence",
        seasoning=Seasoning(w_risk=2.0, local_w_risk=0.2, classifier="none"),
    )


def _tiebreak_thrash() -> WorldSpec:
    # compact obstacle with equal-cost staircases on both sides; canon
    # alternation flips the opening step each replan
    cells: dict[Pos, CellKind] = {(3, 2): _rock(), (7, 5): _food()}
    return WorldSpec(
        width=8, height=6, start=(0, 0), cells=cells,
        max_ticks=40, name="tiebreak_thrash",
        seasoning=Seasoning(tie_canon_mode="alternate"),
    )


def _corridor_thrash() -> WorldSpec:
    # two long passages; corridor A's hazard estimate flickers by parity, so
    # the route choice alternates at the mouth and never gets past it
    cells: dict[Pos, CellKind] = {}
    _wall_row(cells, 1, 1, 5)
    for x in range(1, 7):
        cells[(x, 2)] = _risk(0.015)
    cells[(6, 1)] = _food()
    return WorldSpec(
        width=7, height=4, start=(0, 1), cells=cells,
        max_ticks=60, name="corridor_thrash",
        seasoning=Seasoning(
            corridor_flicker_amp=0.65,
            corridor_flicker_cells=[(x, 0) for x in range(1, 7)],
            classifier="corridor", corridor_split_y=1.5,
        ),
    )


def _optimality_compulsion() -> WorldSpec:
    # accept-any-nonworse plus faint flicker: every swap to a cosmetically
    # better plan costs the tick it takes to re-program the actuators
    cells: dict[Pos, CellKind] = {(11, 2): _food()}
    return WorldSpec(
        width=12, height=4, start=(0, 1), cells=cells,
        max_ticks=56, name="optimality_compulsion",
        seasoning=Seasoning(cost_jitter_amp=0.004, jitter_salt=5, swap_costs_tick=True),
    )


def _metric_mismatch() -> WorldSpec:
    # an unmodelled ice field right at the start: the planner forecasts unit
    # energy, execution pays four times that across the band; the long clean
    # runway afterwards lets recalibrated forecasts prove themselves
    cells: dict[Pos, CellKind] = {}
    for y in range(1, 5):
        for x in range(12):
            cells[(x, y)] = _ice(factor=4.0)
    return WorldSpec(
        width=12, height=12, start=(0, 0), cells=cells, goal=(11, 11),
        max_ticks=60, name="metric_mismatch",
        seasoning=Seasoning(classifier="none"),
    )


def _policy_oscillation() -> WorldSpec:
    # shared corridor to a fork: risky-short branch vs safe-long branch; the
    # risk weight spikes on a threat cue and decays, flipping the class
    cells: dict[Pos, CellKind] = {}
    for x in range(0, 8):
        cells[(x, 1)] = _rock()
    cells[(9, 0)] = _risk(1.0)
    cells[(10, 0)] = _risk(1.0)
    cells[(11, 0)] = _food()
    return WorldSpec(
        width=12, height=2, start=(0, 0), cells=cells,
        max_ticks=60, name="policy_oscillation",
        seasoning=Seasoning(
            w_risk=0.6, threat_period=3, threat_spike=2.5, threat_decay=0.35,
            classifier="risk",
        ),
    )


def _myopic_pingpong() -> WorldSpec:
    # food beacons at both ends of a foggy corridor; each reveal of a risk
    # fence makes the opposite heading look better, escalating outwards
    cells: dict[Pos, CellKind] = {
        (0, 0): _food(), (12, 0): _food(),
        (4, 0): _risk(2.5), (2, 0): _risk(14.0),
        (8, 0): _risk(4.8), (10, 0): _risk(26.0),
    }
    return WorldSpec(
        width=13, height=1, start=(6, 0), cells=cells,
        visibility=VisibilityModel(mode="lv", radius=1),
        max_ticks=48, name="myopic_pingpong",
        seasoning=Seasoning(classifier="none"),
    )


def _exploration_paralysis() -> WorldSpec:
    # a known safe patch, an unknown half holding the food, and an
    # uncertainty penalty slightly too high to ever justify the crossing
    cells: dict[Pos, CellKind] = {(6, 2): _food()}
    return WorldSpec(
        width=8, height=4, start=(1, 1), cells=cells,
        visibility=VisibilityModel(mode="lv", radius=1),
        max_ticks=50, name="exploration_paralysis",
        seasoning=Seasoning(
            uncertainty_penalty=3.0, idle_cost=1.2,
            initial_seen=[(0, 0, 3, 3)], classifier="none",
        ),
    )


def _phobia() -> WorldSpec:
    # remembered bad cells at the short gap push routes (and even the chosen
    # food) to the far gap once the memory weight dominates
    cells: dict[Pos, CellKind] = {}
    for y in range(10):
        if y not in (1, 8):
            cells[(5, y)] = _rock()
    cells[(7, 2)] = _food(meal=6.0)
    cells[(7, 7)] = _food(meal=6.0)
    return WorldSpec(
        width=10, height=10, start=(2, 2), cells=cells,
        max_ticks=60, name="phobia",
        seasoning=Seasoning(
            w_mem=3.0,
            memory_seed=[(4, 1, 1.5), (5, 1, 2.5), (6, 1, 1.5)],
            rho_decay=0.002, classifier="none",
        ),
    )


_BUILDERS = {
    "healthy": _healthy,
    "flipflop": _flipflop,
    "plan_churn": _plan_churn,
    "perseveration": _perseveration,
    "paralysis": _paralysis,
    "hypervigilance": _hypervigilance,
    "futile_search": _futile_search,
    "belief_incoherence": _belief_incoherence,
    "tiebreak_thrash": _tiebreak_thrash,
    "corridor_thrash": _corridor_thrash,
    "optimality_compulsion": _optimality_compulsion,
    "metric_mismatch": _metric_mismatch,
    "policy_oscillation": _policy_oscillation,
    "myopic_pingpong": _myopic_pingpong,
    "exploration_paralysis": _exploration_paralysis,
    "phobia": _phobia,
}


def canonical_scenario(modality: str) -> WorldSpec:
    """Minimal world provoking the given pathology, governor off."""
    if modality not in MODALITIES:
        raise ScenarioError(f"unknown modality id {modality!r}")
    spec = _BUILDERS[modality]()
    spec.validate()
    return spec


def scenario_by_name(name: str) -> WorldSpec:
    """Any shipped scenario: the fourteen canonical ones plus healthy/phobia."""
    if name not in _BUILDERS:
        raise ScenarioError(f"unknown scenario {name!r}")
    spec = _BUILDERS[name]()
    spec.validate()
    return spec


def all_scenario_names() -> tuple[str, ...]:
    return tuple(MODALITIES) + EXTRA_SCENARIOS
