"""The embodied loop: homeostat, aversive memory, execution, trace recording.

Tick order is fixed: observe/reveal -> homeostat -> weight schedule ->
(re)plan -> arbitration (governor, or the baseline pass-through with any
scenario-pinned pathologies) -> execute -> food/memory update -> record.
Given (spec, configs, seed) the whole episode is a pure function; the CSV
export is byte-identical across runs and platforms.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ._kernels import step_distance
from .governor import Decision, Governor, GovernorConfig, PRESETS
from .planner import (
    CANON_FIXED,
    AgentView,
    CostWeights,
    Plan,
    build_view,
    canon_for_tick,
    local_policy,
    near_tie,
    plan_path,
    select_target,
)
from .rng import substream
from .world import (
    DELTA,
    REVERSE,
    Grid,
    Pos,
    Seasoning,
    WorldSpec,
    build_world,
    respawn_food,
    visible_set,
)


@dataclass(frozen=True)
class Homeostat:
    h: float = 0.0
    H_star: float = 0.0
    theta_h: float = 0.0
    dh_per_tick: float = 1.0
    starve_delta: Optional[float] = None


def homeostat_tick(hs: Homeostat) -> tuple[Homeostat, bool]:
    """Advance hunger one tick; trigger planning when the deviation from the
    set-point exceeds the threshold."""
    h = hs.h + hs.dh_per_tick
    trigger = abs(h - hs.H_star) > hs.theta_h
    return replace(hs, h=h), trigger


@dataclass
class AversiveMemory:
    """Per-cell penalty field deposited after bad outcomes.

    Deposits are amplified by gamma_amp and overgeneralised over a Chebyshev
    neighbourhood with geometric falloff; the whole field decays each tick.
    """

    shape: tuple[int, int]
    gamma_amp: float = 3.0
    rho_decay: float = 0.02
    gen_radius: int = 1
    gen_falloff: float = 0.5
    M: np.ndarray = None

    def __post_init__(self):
        if self.M is None:
            self.M = np.zeros(self.shape)
        if self.gamma_amp < 1.0:
            raise ValueError("gamma_amp must be >= 1")
        if not 0.0 <= self.rho_decay < 1.0:
            raise ValueError("rho_decay must lie in [0, 1)")
        if self.gen_radius < 0 or not 0.0 < self.gen_falloff <= 1.0:
            raise ValueError("bad generalisation parameters")


def _deposit_decay_inplace(mem: AversiveMemory, event: Optional[tuple[Pos, float]]) -> None:
    M = mem.M
    if event is not None:
        (px, py), severity = event
        if severity < 0:
            raise ValueError("severity must be >= 0")
        h, w = M.shape
        amp = mem.gamma_amp * severity
        M[py, px] += amp
        for dy in range(-mem.gen_radius, mem.gen_radius + 1):
            for dx in range(-mem.gen_radius, mem.gen_radius + 1):
                d = max(abs(dx), abs(dy))
                if d == 0:
                    continue
                x, y = px + dx, py + dy
                if 0 <= x < w and 0 <= y < h:
                    M[y, x] += amp * mem.gen_falloff ** d
    if mem.rho_decay:
        M *= 1.0 - mem.rho_decay
    M[M < 1e-6] = 0.0


def deposit_and_decay(mem: AversiveMemory, event: Optional[tuple[Pos, float]]) -> AversiveMemory:
    """Pure form of the memory update: generalized deposit, then decay."""
    out = replace(mem, M=mem.M.copy())
    _deposit_decay_inplace(out, event)
    return out


def step_execute(
    grid: Grid,
    pos: Pos,
    move: str,
    rng: np.random.Generator,
) -> tuple[Pos, float, float]:
    """Execute one move; returns (new position, realized energy, realized risk).

    Ice cells slip with their slip probability: the agent stays in place and
    still pays the terrain energy factor. Mirage lure never pays out.
    """
    dx, dy = DELTA[move]
    target = (pos[0] + dx, pos[1] + dy)
    if not grid.passable(target):
        raise ValueError(f"move {move} from {pos} enters impassable {target}")
    tx, ty = target
    factor = float(grid.energy[ty, tx])
    slip_p = float(grid.slip[ty, tx])
    if slip_p > 0.0 and rng.random() < slip_p:
        return pos, factor, 0.0
    return target, factor, float(grid.risk[ty, tx])


@dataclass
class TickRecord:
    tick: int
    x: int
    y: int
    h: float
    action: str                      # move direction or "none"
    was_replan: bool
    plan_len: int
    plan_cost: float
    c1: float
    c2: float
    near_tie: Optional[bool]
    local_first: str
    global_first: str
    policy_class: str
    w_risk: float
    w_energy: float
    w_mem: float
    revealed_count: int
    d_goal: float
    energy_step: float
    risk_step: float
    governor_decision: str
    override: str
    commit_remaining: int
    # rich fields, not part of the CSV interchange
    plan_steps: Optional[tuple[str, ...]] = None
    adopted_steps: Optional[tuple[str, ...]] = None
    adopted_cost: float = math.nan
    pred_step_cost: float = math.nan
    pred_energy: float = 0.0
    rationale_gap: float = 0.0
    target: Optional[Pos] = None


CSV_COLUMNS = (
    "tick,x,y,h,action,was_replan,plan_len,plan_cost,c1,c2,near_tie,"
    "local_first,global_first,policy_class,w_risk,w_energy,w_mem,"
    "revealed_count,d_goal,energy_step,risk_step,governor_decision,override,"
    "commit_remaining"
).split(",")

TERMINALS = ("goal_reached", "starved", "max_ticks", "no_path")


@dataclass
class Trace:
    scenario_id: str
    seed: int
    records: list[TickRecord]
    terminal: str
    governor_label: str = "off"

    def __len__(self) -> int:
        return len(self.records)


@dataclass
class CurrentPlan:
    steps: list[str]
    cells: list[Pos]
    cell_costs: list[float]
    target: Pos
    policy_class: str
    adopted_tick: int

    def remaining_cost(self) -> float:
        return float(sum(self.cell_costs))

    def advance(self) -> None:
        self.steps.pop(0)
        self.cells.pop(0)
        self.cell_costs.pop(0)


@dataclass(frozen=True)
class PlannerConfig:
    """Optional overrides on top of the scenario's pinned numbers; used by
    counterfactual probes (memory off, forced visibility, ...)."""

    w_dist: Optional[float] = None
    w_risk: Optional[float] = None
    w_energy: Optional[float] = None
    w_mem: Optional[float] = None
    visibility: Optional[str] = None     # "gv" | "lv"
    memory_off: bool = False


def classify_plan(plan, grid: Grid, season: Seasoning) -> str:
    mode = season.classifier
    if mode == "auto":
        if season.corridor_split_y is not None:
            mode = "corridor"
        elif bool(np.any(grid.risk > 0)):
            mode = "risk"
        else:
            mode = "none"
    if mode == "none" or plan is None:
        return "none"
    cells = plan.cells if isinstance(plan, Plan) else plan
    if not cells:
        return "none"
    if mode == "corridor":
        # identify the corridor by the near prefix; the final climb to the
        # target is shared by both passages
        split = season.corridor_split_y or 0.0
        return "corridor_B" if any(y > split for (_, y) in cells[:4]) else "corridor_A"
    risky = any(grid.risk[y, x] > 0 for (x, y) in cells)
    return "risky_short" if risky else "safe_long"


def resolve_governor(governor) -> tuple[Optional[GovernorConfig], str]:
    if governor is None or governor == "off":
        return None, "off"
    if isinstance(governor, str):
        if governor not in PRESETS:
            raise ValueError(f"unknown governor preset {governor!r}")
        return PRESETS[governor], governor
    if isinstance(governor, GovernorConfig):
        return governor, "custom"
    raise TypeError("governor must be None, a preset name, or a GovernorConfig")


class _Episode:
    def __init__(
        self,
        spec: WorldSpec,
        planner_cfg: Optional[PlannerConfig],
        governor,
        seed: int,
    ):
        self.spec = spec
        self.grid = build_world(spec)
        self.season = spec.seasoning
        self.pcfg = planner_cfg or PlannerConfig()
        self.seed = seed
        gov_cfg, self.gov_label = resolve_governor(governor)
        self.gov = Governor(gov_cfg, self.grid, self.season) if gov_cfg else None
        self.rng_respawn = substream(seed, "respawn")
        self.rng_slip = substream(seed, "slip")

        s = self.season
        self.homeostat = Homeostat(s.h0, s.h_star, s.theta_h, s.dh_per_tick, s.starve_delta)
        self.memory = AversiveMemory(
            (spec.height, spec.width),
            gamma_amp=s.gamma_amp,
            rho_decay=s.rho_decay,
            gen_radius=s.gen_radius,
            gen_falloff=s.gen_falloff,
        )
        if not self.pcfg.memory_off:
            for (x, y, m) in s.memory_seed:
                self.memory.M[y, x] = m
        self.recency = np.zeros((spec.height, spec.width)) if s.recency_penalty > 0 else None

        vis = spec.visibility
        if self.pcfg.visibility is not None:
            from .world import VisibilityModel

            vis = VisibilityModel(
                mode=self.pcfg.visibility,
                radius=vis.radius if vis.radius else 2,
            )
        self.vis = vis
        self.seen = np.zeros((spec.height, spec.width), dtype=bool)
        for (x0, y0, x1, y1) in s.initial_seen:
            self.seen[y0:y1 + 1, x0:x1 + 1] = True
        # the surveyed region is fixed at episode start: live reveals show
        # geometry but do not count as validated ground for the uncertainty
        # penalty (re-validation doctrine)
        self.surveyed = None
        if s.initial_seen and s.uncertainty_penalty > 0:
            self.surveyed = self.seen.copy()
            for (x, y) in visible_set(self.grid, spec.start, vis):
                self.surveyed[y, x] = True
        self.seen_epoch = 0
        self._all_seen = False
        self.food_state = dict(self.grid.foods)
        self.pos = spec.start
        self.last_move: Optional[str] = None
        self.at_rest = True
        self.idle_run = 0
        self.spike = 0.0
        self.current: Optional[CurrentPlan] = None
        self.records: list[TickRecord] = []
        self._d_cache: dict = {}
        self._view_cache: dict = {}

    # -- weights ---------------------------------------------------------------

    def base_weights(self) -> tuple[float, float, float, float]:
        s, p = self.season, self.pcfg
        w_dist = s.w_dist if p.w_dist is None else p.w_dist
        w_risk = s.w_risk if p.w_risk is None else p.w_risk
        w_energy = s.w_energy if p.w_energy is None else p.w_energy
        w_mem = s.w_mem if p.w_mem is None else p.w_mem
        if p.memory_off:
            w_mem = 0.0
        return w_dist, w_risk, w_energy, w_mem

    def scheduled_w_risk(self, tick: int, base: float) -> float:
        s = self.season
        if s.threat_period > 0:
            if tick > 0 and tick % s.threat_period == 0:
                self.spike += s.threat_spike
            w = base + self.spike
            self.spike *= s.threat_decay
            return float(min(max(w, s.w_risk_min), s.w_risk_max))
        return base

    # -- per-tick helpers --------------------------------------------------------

    def observe(self, tick: int) -> list[Pos]:
        if self._all_seen:
            return []
        vis = visible_set(self.grid, self.pos, self.vis)
        newly = [p for p in sorted(vis) if not self.seen[p[1], p[0]]]
        for (x, y) in newly:
            self.seen[y, x] = True
        if newly:
            self.seen_epoch += 1
            self._all_seen = bool(self.seen.all())
        return newly

    def d_goal(self, target: Optional[Pos]) -> float:
        if target is None:
            return 0.0
        key = (target, self.seen_epoch)
        if key not in self._d_cache:
            self._d_cache.clear()
            blocked = self.grid.blocked & self.seen
            self._d_cache[key] = step_distance(blocked, target[0], target[1])
        d = self._d_cache[key][self.pos[1], self.pos[0]]
        return float(d) if math.isfinite(d) else float(self.spec.width * self.spec.height)

    def pick_target(self, view: AgentView) -> Optional[Pos]:
        if self.spec.goal is not None:
            return self.spec.goal
        foods = [p for p in self.food_state if p != self.pos]
        if not foods:
            return None
        choice = select_target(view, self.pos, sorted(foods))
        return None if choice is None else choice[0]

    def run(self) -> Trace:
        spec = self.spec
        terminal = "max_ticks"
        for tick in range(spec.max_ticks):
            reveals = self.observe(tick)
            self.homeostat, hunger_trigger = homeostat_tick(self.homeostat)
            if (
                self.homeostat.starve_delta is not None
                and self.homeostat.h - self.homeostat.H_star > self.homeostat.starve_delta
            ):
                self.record_idle(tick, reveals, "starved")
                terminal = "starved"
                break

            w_dist, w_risk_base, w_energy, w_mem = self.base_weights()
            w_risk = self.scheduled_w_risk(tick, w_risk_base)
            if self.gov:
                w_risk = self.gov.effective_w_risk(w_risk)
            weights = CostWeights(w_dist, w_risk, w_energy, w_mem)

            canon = canon_for_tick(self.season, tick)
            if self.gov and self.gov.use_fixed_canon():
                canon = CANON_FIXED
            view = self.build_tick_view(weights, tick)

            target = self.pick_target(view)
            if target == self.pos:
                target = None

            fresh: Optional[Plan] = None
            local_move, local_cost = local_policy(view, self.pos, canon)
            need_plan = target is not None and (
                self.season.replan_every_tick
                or hunger_trigger
                or self.current is None
                or not self.current.steps
                or self.current.target != target
            )
            if need_plan and self.gov:
                # a commit window means: execute without reconsideration
                if (
                    self.gov.commitment.active
                    and self.current is not None
                    and self.current.steps
                    and self.current.target == target
                ):
                    need_plan = False
                elif not self.gov.allow_replan(tick, len(reveals)):
                    need_plan = False
            if need_plan:
                fresh = plan_path(
                    view, self.pos, target, canon,
                    want_alt_risk=view.local_w_risk is not None,
                )
                if self.gov:
                    self.gov.note_replanned(tick)
                if fresh is None:
                    self.record_idle(tick, reveals, "no_path")
                    terminal = "no_path"
                    break

            near: Optional[bool] = None
            if fresh is not None and len(fresh.alternatives) >= 2 and fresh.c_total > 0:
                # the path sum and the sweep value can differ by an ulp
                near = near_tie(fresh.c1, max(fresh.c1, fresh.c2), self.season.eta)

            decision = self.decide(tick, view, fresh, local_move, near, reveals, target)
            self.apply_decision(tick, view, decision, fresh, local_move, near, reveals, target)

            if spec.goal is not None and self.pos == spec.goal:
                terminal = "goal_reached"
                break
        return Trace(spec.name, self.seed, self.records, terminal, self.gov_label)

    def build_tick_view(self, weights: CostWeights, tick: int) -> AgentView:
        gov = self.gov
        return build_view(
            self.grid,
            self.seen,
            self.memory.M if not self.pcfg.memory_off else np.zeros_like(self.memory.M),
            weights,
            self.season,
            tick,
            self.pos,
            recency=self.recency,
            alpha_energy=gov.view_alpha_energy() if gov else None,
            mirage_trust=gov.mirage_trust() if gov else 1.0,
            uncertainty_penalty=gov.uncertainty_penalty() if gov else None,
            shaping=gov.shaping(self.last_move, self.pos) if gov else None,
            surveyed=self.surveyed,
            base_cache=self._view_cache,
        )

    # -- decision ---------------------------------------------------------------

    def decide(self, tick, view, fresh, local_move, near, reveals, target) -> Decision:
        season = self.season
        if self.gov:
            d_for_quota = self.d_goal(target) if target is not None else None
            classify = lambda p: classify_plan(p, self.grid, season)
            return self.gov.decide(
                tick, self.pos, view, fresh, self.current, local_move,
                near, self.last_move, reveals, d_for_quota, self.at_rest, classify,
            )
        # baseline pass-through, including any scenario-pinned pathologies
        if season.controller == "local":
            return Decision(local_move, None, "local")
        plan = fresh if season.accept_any_plan or self.current is None else None
        if near and season.pause_on_near_tie:
            return Decision(None, plan, "pause")
        live_steps = None
        if plan is not None:
            live_steps = plan.steps
        elif self.current is not None and self.current.steps:
            live_steps = tuple(self.current.steps)
        if not live_steps:
            return Decision(None, plan, "hold")
        step = live_steps[0]
        if season.idle_cost is not None:
            dx, dy = DELTA[step]
            c_move = view.cost_at((self.pos[0] + dx, self.pos[1] + dy))
            if self.at_rest:
                c_move += season.move_commit_extra
            if season.idle_cost < c_move:
                return Decision(None, plan, "idle")
        if (
            season.swap_costs_tick
            and plan is not None
            and self.current is not None
            and self.current.steps
            and list(plan.steps) != list(self.current.steps)
        ):
            return Decision(None, plan, "swap")
        return Decision(step, plan, "plan")

    def apply_decision(self, tick, view, decision, fresh, local_move, near, reveals, target):
        season = self.season
        if decision.adopt is not None:
            p = decision.adopt
            self.current = CurrentPlan(
                steps=list(p.steps),
                cells=list(p.cells),
                cell_costs=[view.cost_at(c) for c in p.cells],
                target=p.target,
                policy_class=classify_plan(p, self.grid, season),
                adopted_tick=tick,
            )
        if decision.commit and self.gov and self.current is not None:
            self.gov.start_commit(len(self.current.steps))

        action = decision.action
        moved = False
        energy = 0.0
        risk = 0.0
        pred_cost = math.nan
        pred_energy = 0.0
        crossed_frontier = False
        old_pos = self.pos
        if action is not None:
            dx, dy = DELTA[action]
            nxt = (old_pos[0] + dx, old_pos[1] + dy)
            pred_cost = view.cost_at(nxt)
            pred_energy = float(view.pred_energy[nxt[1], nxt[0]])
            crossed_frontier = bool(view.unknown[nxt[1], nxt[0]])
            new_pos, energy, risk = step_execute(self.grid, old_pos, action, self.rng_slip)
            moved = new_pos != old_pos
            self.pos = new_pos

        followed = False
        if moved and self.current is not None and self.current.steps and action == self.current.steps[0]:
            self.current.advance()
            followed = True

        event = None
        if moved and self.pos in self.food_state:
            ck = self.food_state[self.pos]
            self.homeostat = replace(self.homeostat, h=self.homeostat.h - ck.meal)
            if ck.poisonous:
                event = (self.pos, season.poison_severity)
                energy += season.poison_energy_penalty
            elif ck.meal <= 0:
                event = (self.pos, season.no_food_severity)
            if self.spec.food_respawn:
                respawn_food(self.food_state, self.grid, self.pos, self.rng_respawn)
            else:
                del self.food_state[self.pos]
            if self.current is not None and self.current.target == self.pos:
                self.current = None
        _deposit_decay_inplace(self.memory, event)

        if self.recency is not None:
            self.recency *= season.recency_decay
            if moved:
                self.recency[old_pos[1], old_pos[0]] += season.recency_penalty

        if action is None:
            self.idle_run += 1
        else:
            self.idle_run = 0
            self.last_move = action
        self.at_rest = action is None

        if self.gov:
            entered_kind = self.grid.kind_at(self.pos).kind if moved else "open"
            self.gov.after_execute(
                tick, moved, action, self.pos, pred_energy, energy, entered_kind,
                crossed_frontier and moved, risk, followed,
            )

        gap = 0.0
        if fresh is not None and view.local_w_risk is not None and local_move is not None:
            if fresh.first_step is not None and local_move != fresh.first_step:
                alt = next((a for a in fresh.alternatives if a.step == local_move), None)
                if alt is not None:
                    gap = abs(view.weights.w_risk - view.local_w_risk) * alt.risk_sum

        commit_remaining = 0
        if self.gov:
            commit_remaining = max(self.gov.commitment.steps_remaining, 0)
        cur = self.current
        self.records.append(
            TickRecord(
                tick=tick,
                x=self.pos[0],
                y=self.pos[1],
                h=self.homeostat.h,
                action=action if action is not None else "none",
                was_replan=fresh is not None,
                plan_len=len(cur.steps) if cur else 0,
                plan_cost=cur.remaining_cost() if cur else math.nan,
                c1=fresh.c1 if fresh is not None else math.nan,
                c2=fresh.c2 if fresh is not None else math.nan,
                near_tie=near,
                local_first=local_move or "",
                global_first=(fresh.first_step or "") if fresh is not None else "",
                policy_class=cur.policy_class if cur else "none",
                w_risk=view.weights.w_risk,
                w_energy=view.weights.w_energy,
                w_mem=view.weights.w_mem,
                revealed_count=len(reveals),
                d_goal=self.d_goal(target),
                energy_step=energy,
                risk_step=risk,
                governor_decision=decision.label,
                override=decision.override,
                commit_remaining=commit_remaining,
                plan_steps=fresh.steps if fresh is not None else None,
                adopted_steps=decision.adopt.steps if decision.adopt is not None else None,
                adopted_cost=decision.adopt.c_total if decision.adopt is not None else math.nan,
                pred_step_cost=pred_cost,
                pred_energy=pred_energy,
                rationale_gap=gap,
                target=target,
            )
        )

    def record_idle(self, tick: int, reveals: list[Pos], label: str) -> None:
        self.records.append(
            TickRecord(
                tick=tick, x=self.pos[0], y=self.pos[1], h=self.homeostat.h,
                action="none", was_replan=False, plan_len=0, plan_cost=math.nan,
                c1=math.nan, c2=math.nan, near_tie=None, local_first="",
                global_first="", policy_class="none",
                w_risk=0.0, w_energy=0.0, w_mem=0.0,
                revealed_count=len(reveals), d_goal=0.0, energy_step=0.0,
                risk_step=0.0, governor_decision=label, override="",
                commit_remaining=0,
            )
        )


def run_episode(
    spec: WorldSpec,
    planner_cfg: Optional[PlannerConfig] = None,
    governor=None,
    detector_cfg=None,
    seed: int = 0,
) -> Trace:
    """Simulate one episode. `governor` is None/"off", a preset name, or a
    GovernorConfig. `detector_cfg` is accepted for signature parity with the
    audit pipeline; the in-loop governor uses its own cheap triggers."""
    del detector_cfg
    return _Episode(spec, planner_cfg, governor, seed).run()


# --- trace CSV interchange -----------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return format(v, ".9g")
    if isinstance(v, bool):
        return "1" if v else "0"
    return str(v)


def trace_to_csv(trace: Trace) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in trace.records:
        writer.writerow([
            r.tick, r.x, r.y, _fmt(r.h), r.action, _fmt(r.was_replan),
            r.plan_len, _fmt(r.plan_cost), _fmt(r.c1), _fmt(r.c2),
            "" if r.near_tie is None else _fmt(bool(r.near_tie)),
            r.local_first, r.global_first, r.policy_class,
            _fmt(r.w_risk), _fmt(r.w_energy), _fmt(r.w_mem),
            r.revealed_count, _fmt(r.d_goal), _fmt(r.energy_step),
            _fmt(r.risk_step), r.governor_decision, r.override,
            r.commit_remaining,
        ])
    return buf.getvalue()


def write_trace_csv(trace: Trace, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(trace_to_csv(trace))


def _parse_float(s: str) -> float:
    return math.nan if s == "" else float(s)


def read_trace_csv(path) -> Trace:
    """Load an interchange CSV. Rich fields (plan step sequences, prediction
    columns) are not part of the interchange and come back as None/defaults;
    detectors that need them degrade as documented."""
    records = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_COLUMNS:
            raise ValueError("unrecognized trace header")
        for row in reader:
            d = dict(zip(CSV_COLUMNS, row))
            records.append(
                TickRecord(
                    tick=int(d["tick"]), x=int(d["x"]), y=int(d["y"]),
                    h=_parse_float(d["h"]), action=d["action"],
                    was_replan=d["was_replan"] == "1",
                    plan_len=int(d["plan_len"]),
                    plan_cost=_parse_float(d["plan_cost"]),
                    c1=_parse_float(d["c1"]), c2=_parse_float(d["c2"]),
                    near_tie=None if d["near_tie"] == "" else d["near_tie"] == "1",
                    local_first=d["local_first"], global_first=d["global_first"],
                    policy_class=d["policy_class"],
                    w_risk=_parse_float(d["w_risk"]),
                    w_energy=_parse_float(d["w_energy"]),
                    w_mem=_parse_float(d["w_mem"]),
                    revealed_count=int(d["revealed_count"]),
                    d_goal=_parse_float(d["d_goal"]),
                    energy_step=_parse_float(d["energy_step"]),
                    risk_step=_parse_float(d["risk_step"]),
                    governor_decision=d["governor_decision"],
                    override=d["override"],
                    commit_remaining=int(d["commit_remaining"]),
                )
            )
    return Trace("", -1, records, "max_ticks", "unknown")
