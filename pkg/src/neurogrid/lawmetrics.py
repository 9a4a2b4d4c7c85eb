"""Law-pressure scores, regret against the full-information oracle, and the
aggregate pathology score used by destructive testing.

The oracle is the reality-anchored reference: cheapest route cost under the
true realized-cost model (true risk, true terrain energy, slip expectation),
full visibility, no aversive memory, no governor. Realized episode cost uses
the same base weights, accrues one time unit per tick (idling is not free),
and stops at first arrival at the designated aid cell so foraging tails do
not pollute the comparison.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np

from .agent import Trace
from .planner import CANON_FIXED, AgentView, CostWeights, Plan, plan_path
from .world import Grid, Pos, WorldSpec, build_world


class MetricError(ValueError):
    pass


@dataclass
class LawScores:
    time_to_aid: float
    proceed_latency: float          # nan marks "no proceed cue in scenario"
    energy_per_meter: float
    freeze_ticks: float
    detour_inflation: float         # percent vs the oracle route length
    churn: float                    # adopted-prefix rewrites per episode
    goal_switches: float
    energy_budget: float
    regret: float
    neurosis_aggregate: float = 0.0

    def to_dict(self) -> dict:
        return {k: _jsonable(v) for k, v in asdict(self).items()}


def _jsonable(v):
    if isinstance(v, float) and math.isnan(v):
        return None
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return v


# --- oracle --------------------------------------------------------------------

def true_cost_field(grid: Grid, weights: CostWeights) -> np.ndarray:
    """Per-cell realized cost of entering: time and energy inflated by the
    slip expectation (1/(1-p) attempts), risk paid once on entry."""
    slip = np.clip(grid.slip, 0.0, 0.999)
    attempts = 1.0 / (1.0 - slip)
    cost = (weights.w_dist + weights.w_energy * grid.energy) * attempts
    cost = cost + weights.w_risk * grid.risk
    return np.maximum(cost, 0.01)


def _true_view(grid: Grid, weights: CostWeights) -> AgentView:
    h, w = grid.blocked.shape
    cost = true_cost_field(grid, weights)
    ones = np.ones((h, w))
    return AgentView(
        blocked=grid.blocked.copy(),
        model_cost=cost,
        local_cost=cost,
        dist_term=np.full((h, w), weights.w_dist),
        risk_term=weights.w_risk * grid.risk,
        energy_term=cost - weights.w_dist - weights.w_risk * grid.risk,
        mem_term=np.zeros((h, w)),
        adjust_term=np.zeros((h, w)),
        pred_energy=grid.energy.copy(),
        risk_model=grid.risk.copy(),
        seen=np.ones((h, w), dtype=bool),
        unknown=np.zeros((h, w), dtype=bool),
        weights=weights,
    )


def aid_cells(spec: WorldSpec) -> list[Pos]:
    if spec.goal is not None:
        return [spec.goal]
    return sorted(p for p, ck in spec.cells.items() if ck.kind == "food")


def base_weights(spec: WorldSpec) -> CostWeights:
    s = spec.seasoning
    return CostWeights(s.w_dist, s.w_risk, s.w_energy, 0.0)


def oracle_route(spec: WorldSpec) -> Optional[Plan]:
    """Cheapest plan from start to the cheapest aid cell under the true model."""
    grid = build_world(spec)
    view = _true_view(grid, base_weights(spec))
    best = None
    for target in aid_cells(spec):
        plan = plan_path(view, spec.start, target, CANON_FIXED)
        if plan is not None and (best is None or plan.c_total < best.c_total):
            best = plan
    return best


def oracle_episode_cost(spec: WorldSpec) -> float:
    plan = oracle_route(spec)
    if plan is None:
        raise MetricError("oracle found no path to any aid cell")
    return plan.c_total


# --- realized side ----------------------------------------------------------------

def _arrival_index(trace: Trace, spec: WorldSpec) -> Optional[int]:
    aid = set(aid_cells(spec))
    prev = spec.start
    for i, r in enumerate(trace.records):
        pos = (r.x, r.y)
        if pos in aid and r.action != "none" and pos != prev:
            return i
        prev = pos
    return None


def realized_episode_cost(trace: Trace, spec: WorldSpec) -> float:
    """Reality-anchored episode cost: one w_dist per tick elapsed plus
    weighted realized risk and energy, accrued up to first aid arrival (whole
    trace when the agent never arrives)."""
    w = base_weights(spec)
    end = _arrival_index(trace, spec)
    end = len(trace.records) - 1 if end is None else end
    total = 0.0
    for r in trace.records[: end + 1]:
        total += w.w_dist + w.w_risk * r.risk_step + w.w_energy * r.energy_step
    return total


def regret(trace: Trace, spec: WorldSpec, oracle_cost: Optional[float] = None) -> float:
    """Realized episode cost minus the oracle's optimal cost."""
    if oracle_cost is None:
        oracle_cost = oracle_episode_cost(spec)
    if oracle_cost <= 0:
        raise MetricError("oracle cost must be positive")
    return realized_episode_cost(trace, spec) - oracle_cost


# --- law scores -------------------------------------------------------------------

def law_scores(
    trace: Trace,
    spec: WorldSpec,
    reports=None,
    weights: Optional[dict] = None,
    oracle: Optional[Plan] = None,
) -> LawScores:
    rs = trace.records
    n = len(rs)
    arrival = _arrival_index(trace, spec)
    time_to_aid = float(rs[arrival].tick) if arrival is not None else float(spec.max_ticks)

    if spec.proceed_cue_tick is None:
        proceed_latency = math.nan
    else:
        cue = spec.proceed_cue_tick
        lat = None
        for r in rs:
            if r.tick >= cue and r.action != "none":
                lat = float(r.tick - cue)
                break
        proceed_latency = lat if lat is not None else float(spec.max_ticks - cue)

    moves = 0
    prev = spec.start
    for r in rs:
        pos = (r.x, r.y)
        if r.action != "none" and pos != prev:
            moves += 1
        prev = pos
    energy_budget = float(sum(r.energy_step for r in rs))
    energy_per_meter = energy_budget / max(1, moves)
    freeze = float(sum(1 for r in rs if r.action == "none"))

    if oracle is None:
        oracle = oracle_route(spec)
    if oracle is None:
        detour = math.nan
        regret_v = math.nan
    else:
        path_len = moves if arrival is None else _moves_until(trace, spec, arrival)
        detour = 100.0 * (path_len - len(oracle.steps)) / max(1, len(oracle.steps))
        regret_v = realized_episode_cost(trace, spec) - oracle.c_total

    # adopted-prefix rewrites beyond what execution consumed
    churn = 0.0
    prev_steps = None
    moves_since = 0
    prev_pos2 = spec.start
    for r in rs:
        if r.adopted_steps is not None:
            if prev_steps is not None:
                expected = tuple(prev_steps[moves_since:])[:4]
                if tuple(r.adopted_steps[:4]) != expected:
                    churn += 1
            prev_steps = r.adopted_steps
            moves_since = 0
        if r.action != "none" and (r.x, r.y) != prev_pos2:
            moves_since += 1
        prev_pos2 = (r.x, r.y)

    switches = 0.0
    prev_target = None
    prev_pos = spec.start
    for r in rs:
        if r.target is not None and prev_target is not None and r.target != prev_target:
            if prev_pos != prev_target:
                switches += 1
        if r.target is not None:
            prev_target = r.target
        prev_pos = (r.x, r.y)

    out = LawScores(
        time_to_aid=time_to_aid,
        proceed_latency=proceed_latency,
        energy_per_meter=energy_per_meter,
        freeze_ticks=freeze,
        detour_inflation=detour,
        churn=churn,
        goal_switches=switches,
        energy_budget=energy_budget,
        regret=regret_v,
    )
    if reports is not None:
        out.neurosis_aggregate = neurosis_score(reports, out, weights)
    return out


def _moves_until(trace: Trace, spec: WorldSpec, end: int) -> int:
    moves = 0
    prev = spec.start
    for r in trace.records[: end + 1]:
        pos = (r.x, r.y)
        if r.action != "none" and pos != prev:
            moves += 1
        prev = pos
    return moves


# --- aggregate score ---------------------------------------------------------------

# Normalization constants: frozen per-metric scales of the canonical scenario
# suite (a metric at its canonical-suite maximum contributes ~1.0).
NORMALIZERS: dict[str, float] = {
    "churn": 20.0,
    "freeze_ticks": 50.0,
    "detour_inflation": 100.0,
    "energy_budget": 120.0,
    "goal_switches": 8.0,
    "flip_rate": 10.0,
    "mismatch_persist": 20.0,
    "meander_index": 1.0,
    "fired": 1.0,
}

DEFAULT_SCORE_WEIGHTS: dict[str, float] = {k: 1.0 for k in NORMALIZERS}


def neurosis_score(reports, law: Optional[LawScores] = None,
                   weights: Optional[dict] = None) -> float:
    """Weighted sum of normalized audit metrics plus one weighted unit per
    fired detector. Homogeneous of degree one in the weights."""
    w = dict(DEFAULT_SCORE_WEIGHTS)
    if weights:
        for k, v in weights.items():
            if v < 0:
                raise MetricError("score weights must be non-negative")
            w[k] = v
    total = 0.0
    if law is not None:
        for key in ("churn", "freeze_ticks", "detour_inflation", "energy_budget",
                    "goal_switches"):
            v = getattr(law, key)
            if v is None or (isinstance(v, float) and not math.isfinite(v)):
                continue
            total += w[key] * max(0.0, v) / NORMALIZERS[key]
    stat_peaks = {"flip_rate": 0.0, "mismatch_persist": 0.0, "meander_index": 0.0}
    fired = 0
    for r in reports:
        if r.fired:
            fired += 1
        for k in stat_peaks:
            if k in r.stats and math.isfinite(r.stats[k]):
                stat_peaks[k] = max(stat_peaks[k], r.stats[k])
    for k, v in stat_peaks.items():
        total += w[k] * v / NORMALIZERS[k]
    total += w["fired"] * float(fired)
    return total


def law_pressure(law: LawScores, spec: WorldSpec) -> float:
    """Scalar pressure on the three operational laws: aid latency, proceed
    latency, and energy per meter."""
    t = law.time_to_aid / max(1, spec.max_ticks)
    p = 0.0 if math.isnan(law.proceed_latency) else law.proceed_latency / max(1, spec.max_ticks)
    e = law.energy_per_meter if math.isfinite(law.energy_per_meter) else 4.0
    return float(t + p + min(e, 4.0) / 4.0)


def scores_to_json(law: LawScores) -> str:
    return json.dumps(law.to_dict(), indent=1, sort_keys=True) + "\n"
