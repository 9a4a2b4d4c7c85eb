"""Escape levers applied between planner proposal and actuator.

The governor is a small deterministic layer: short commitments, margin gates,
pause budgets, tabu on immediate undo, weight smoothing with hysteresis bands,
online metric calibration, and frontier incentives. Each lever can be enabled
independently; per-pathology bundles ship as named presets so an audit can
switch on exactly one cure.

Lever application order is fixed and observable in traces: weight smoothing /
hysteresis and view shaping happen before planning; at decision time the order
is overrides -> committed step -> fusion/veto arbitration -> hysteresis dwell
-> near-tie handling -> margin acceptance -> progress quota -> tabu filter ->
frontier forcing -> idle gates -> commitment bookkeeping -> anti-idle tax.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .planner import CANON_FIXED, AgentView, Plan, fuse, plan_path
from .world import DELTA, REVERSE, Grid, Pos, Seasoning

LEVERS = (
    "commit",
    "commit_near_tie",
    "margin_accept",
    "margin_idle",
    "idle_tax",
    "min_step",
    "pause_budget",
    "canonical_tiebreak",
    "preserve_heading",
    "tabu",
    "visit_penalty",
    "progress_quota",
    "fusion",
    "veto",
    "smooth",
    "hysteresis",
    "calibrate_energy",
    "calibrate_uncertainty",
    "mirage_blind",
    "reversal_cost",
    "frontier_bonus",
    "min_dwell_cross",
    "replan_throttle",
)


@dataclass(frozen=True)
class GovernorConfig:
    levers: frozenset = frozenset()
    K: int = 4                      # commit steps
    tau: int = 6                    # commit ticks
    Delta: float = 0.3              # margin to switch
    beta: float = 2.0               # large-gain factor
    B_pause: int = 0                # near-tie pause budget
    B_detour: int = 6               # detour budget steps per window
    T_idle: int = 2                 # min dwell before forced step
    lambda_idle: float = 0.5        # idle slack
    gamma_quota: float = 1.0        # progress quota per window
    quota_window: int = 8
    theta_minus: float = 2.2
    theta_plus: float = 3.2
    alpha_ema: float = 0.3
    S_switch: float = 0.0           # switching cost
    Q_improve: float = math.inf     # accepted swaps per episode
    tabu_len: int = 1
    idle_tax_rate: float = 0.25
    visit_penalty: float = 0.25
    visit_decay: float = 0.7
    frontier_bonus: float = 0.0
    reversal_cost: float = 0.3
    fusion_alpha: float = 0.8
    risk_veto: float = 0.8
    risk_breach: float = 0.8
    calib_persistence: int = 3
    calib_clip: tuple[float, float] = (0.2, 5.0)
    eps_regret: float = 0.05

    def __post_init__(self):
        unknown = set(self.levers) - set(LEVERS)
        if unknown:
            raise ValueError(f"unknown levers: {sorted(unknown)}")
        if self.beta <= 1.0:
            raise ValueError("beta must exceed 1")
        if self.theta_plus <= self.theta_minus:
            raise ValueError("theta_plus must exceed theta_minus")
        if not 0.0 < self.alpha_ema <= 1.0:
            raise ValueError("alpha_ema must lie in (0, 1]")
        for name in ("K", "tau", "B_pause", "B_detour", "T_idle", "tabu_len"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def has(self, lever: str) -> bool:
        return lever in self.levers

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["levers"] = sorted(self.levers)
        d["calib_clip"] = list(self.calib_clip)
        d["Q_improve"] = None if math.isinf(self.Q_improve) else self.Q_improve
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GovernorConfig":
        kw = dict(d)
        kw["levers"] = frozenset(kw.get("levers", []))
        if kw.get("calib_clip") is not None:
            kw["calib_clip"] = tuple(kw["calib_clip"])
        if kw.get("Q_improve") is None:
            kw["Q_improve"] = math.inf
        return cls(**kw)


@dataclass
class Commitment:
    """Counters and per-episode governor memory; the committed plan itself is
    the agent's current plan."""

    steps_remaining: int = 0
    ticks_remaining: int = 0
    pause_left: int = 0
    tabu_move: Optional[str] = None
    tabu_expiry: int = -1
    idle_tax: float = 0.0
    alpha_hat: dict = field(default_factory=dict)

    @property
    def active(self) -> bool:
        return self.steps_remaining > 0 and self.ticks_remaining > 0

    def clear(self) -> None:
        self.steps_remaining = 0
        self.ticks_remaining = 0


# --- pure lever primitives ----------------------------------------------------

def accept_plan(c_new: float, c_cur: float, delta: float, s_switch: float) -> bool:
    """Materiality gate: a replacement must amortize its switching cost."""
    if c_new < 0 or c_cur < 0:
        raise ValueError("plan costs must be non-negative")
    return c_new + s_switch <= c_cur - delta


def smooth_and_hysteresis(
    raw_w: float,
    prev_smoothed: float,
    current_class: str,
    theta_minus: float,
    theta_plus: float,
    alpha_ema: float,
) -> tuple[float, str]:
    """EMA the weight, then flip the policy class only on band exit."""
    if theta_plus <= theta_minus:
        raise ValueError("invalid hysteresis band")
    smoothed = alpha_ema * raw_w + (1.0 - alpha_ema) * prev_smoothed
    cls = current_class
    if smoothed > theta_plus:
        cls = "safe_long"
    elif smoothed < theta_minus:
        cls = "risky_short"
    return smoothed, cls


def calibrate(
    alpha_hat: float,
    rho: float,
    persistence: int,
    min_persistence: int = 3,
    clip: tuple[float, float] = (0.2, 5.0),
) -> float:
    """Scale a prediction-correction factor once a realized/predicted
    deviation has persisted long enough."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    if persistence < min_persistence:
        return alpha_hat
    return float(min(max(alpha_hat * rho, clip[0]), clip[1]))


def override_check(
    current,
    fresh_cost: Optional[float],
    cfg: GovernorConfig,
    view: AgentView,
    grid: Grid,
    reveals: list[Pos],
    committed: bool,
) -> Optional[str]:
    """First applicable of safety breach, large gain, novel observation.

    `current` is the committed plan (remaining steps/cells); overrides only
    make sense while a commitment is active."""
    if not committed or current is None or not current.steps:
        return None
    prefix = current.cells[: cfg.K]
    for (x, y) in prefix:
        if view.seen[y, x] and float(grid.risk[y, x]) > cfg.risk_breach:
            return "safety_breach"
    if fresh_cost is not None and math.isfinite(fresh_cost):
        if fresh_cost <= current.remaining_cost() - cfg.beta * cfg.Delta:
            return "large_gain"
    if reveals:
        ahead = set(prefix)
        for p in reveals:
            if p in ahead and (not grid.passable(p) or float(grid.risk[p[1], p[0]]) > 0.0):
                return "novel_observation"
    return None


@dataclass
class Decision:
    action: Optional[str]          # move direction, or None for no move
    adopt: Optional[Plan]          # plan to adopt as current (None keeps current)
    label: str
    override: str = ""
    commit: bool = False           # (re)start a commit window after adoption


class Governor:
    """Episode-local lever state machine."""

    def __init__(self, cfg: GovernorConfig, grid: Grid, seasoning: Seasoning):
        self.cfg = cfg
        self.grid = grid
        self.seasoning = seasoning
        self.commitment = Commitment(pause_left=cfg.B_pause)
        self.smoothed_w: Optional[float] = None
        self.hyst_class = "risky_short"
        self.visits = np.zeros(grid.blocked.shape)
        self.rho_acc: list[float] = []
        self.alpha_energy: dict[str, float] = {}
        self.u_trust = 1.0
        self.idle_run = 0
        self.ticks_since_frontier = 0
        self.swaps_done = 0
        self.window_anchor_d: Optional[float] = None
        self.window_anchor_tick = 0
        self.last_replan_tick = -(10 ** 9)

    # -- pre-plan hooks -------------------------------------------------------

    def effective_w_risk(self, raw: float) -> float:
        if not self.cfg.has("smooth") and not self.cfg.has("hysteresis"):
            return raw
        prev = raw if self.smoothed_w is None else self.smoothed_w
        alpha = self.cfg.alpha_ema if self.cfg.has("smooth") else 1.0
        self.smoothed_w, self.hyst_class = smooth_and_hysteresis(
            raw, prev, self.hyst_class,
            self.cfg.theta_minus, self.cfg.theta_plus, alpha,
        )
        return self.smoothed_w

    def mirage_trust(self) -> float:
        return 0.0 if self.cfg.has("mirage_blind") else 1.0

    def uncertainty_penalty(self) -> float:
        u = self.seasoning.uncertainty_penalty
        if self.cfg.has("calibrate_uncertainty"):
            u *= self.u_trust
        if self.cfg.has("frontier_bonus"):
            u -= self.cfg.frontier_bonus
        return u

    def view_alpha_energy(self) -> dict[str, float]:
        return dict(self.alpha_energy) if self.cfg.has("calibrate_energy") else {}

    def shaping(self, last_move: Optional[str], pos: Pos) -> Optional[np.ndarray]:
        out = None
        if self.cfg.has("visit_penalty"):
            out = self.cfg.visit_penalty * self.visits
        if self.cfg.has("reversal_cost") and last_move is not None:
            if out is None:
                out = np.zeros(self.grid.blocked.shape)
            dx, dy = DELTA[REVERSE[last_move]]
            q = (pos[0] + dx, pos[1] + dy)
            if self.grid.in_bounds(q):
                out[q[1], q[0]] += self.cfg.reversal_cost
        return out

    def allow_replan(self, tick: int, reveals: int) -> bool:
        if not self.cfg.has("replan_throttle"):
            return True
        if self.idle_run == 0 or reveals > 0:
            return True
        return tick - self.last_replan_tick >= self.cfg.tau

    def use_fixed_canon(self) -> bool:
        return self.cfg.has("canonical_tiebreak")

    # -- decision ---------------------------------------------------------------

    def decide(
        self,
        tick: int,
        pos: Pos,
        view: AgentView,
        fresh: Optional[Plan],
        current,
        local_move: Optional[str],
        near: Optional[bool],
        last_move: Optional[str],
        reveals: list[Pos],
        d_goal: Optional[float],
        at_rest: bool,
        classify,
    ) -> Decision:
        cfg = self.cfg
        com = self.commitment
        season = self.seasoning

        fresh_c = fresh.c_total if fresh is not None else None
        override = override_check(
            current, fresh_c, cfg, view, self.grid, reveals, com.active,
        ) or ""
        if override:
            com.clear()

        if com.active and current is not None and current.steps:
            step = current.steps[0]
            dx, dy = DELTA[step]
            if view.passable((pos[0] + dx, pos[1] + dy)):
                return Decision(step, None, "committed")
            com.clear()

        plan: Optional[Plan] = None
        step: Optional[str] = None
        label = "plan"

        if season.controller == "local":
            step = local_move
            label = "local"
        else:
            plan = fresh
            if plan is not None and cfg.has("fusion") and plan.alternatives:
                fused = self._fused_choice(view, pos, plan)
                if fused is not plan:
                    plan, label = fused, "fused"
            if (
                plan is not None
                and cfg.has("hysteresis")
                and current is not None
                and current.steps
                and current.policy_class == self.hyst_class
                and classify(plan) not in (self.hyst_class, "none")
            ):
                plan, label = None, "dwell"
            if plan is not None and near:
                if cfg.has("preserve_heading") and last_move is not None and plan.first_step != last_move:
                    alt = _alt_for(plan, last_move)
                    if alt is not None and alt.cost <= (1.0 + season.eta) * plan.c_total:
                        rerouted = _reroute(view, pos, plan.target, last_move)
                        if rerouted is not None:
                            plan, label = rerouted, "heading"
                if (
                    plan is not None
                    and cfg.has("commit_near_tie")
                    and current is not None
                    and current.steps
                    and plan.first_step != current.steps[0]
                    and plan.c_total > current.remaining_cost() - cfg.beta * cfg.Delta
                ):
                    plan, label = None, "keep_prior"
            if plan is not None and near and season.pause_on_near_tie:
                if not cfg.has("pause_budget"):
                    return Decision(None, None, "pause", override)
                if com.pause_left > 0:
                    com.pause_left -= 1
                    return Decision(None, None, "pause", override)
            if (
                plan is not None
                and cfg.has("margin_accept")
                and current is not None
                and current.steps
                and list(plan.steps) != list(current.steps)
            ):
                if self.swaps_done >= cfg.Q_improve or not accept_plan(
                    plan.c_total, current.remaining_cost(), cfg.Delta, cfg.S_switch
                ):
                    plan, label = None, "keep_margin"
                else:
                    self.swaps_done += 1
            quota_fire = False
            if cfg.has("progress_quota") and d_goal is not None:
                if self.window_anchor_d is None:
                    self.window_anchor_d, self.window_anchor_tick = d_goal, tick
                elif tick - self.window_anchor_tick >= cfg.quota_window:
                    if self.window_anchor_d - d_goal < cfg.gamma_quota and fresh is not None:
                        plan, label, quota_fire = fresh, "quota_commit", True
                    self.window_anchor_d, self.window_anchor_tick = d_goal, tick
            if plan is not None:
                step = plan.first_step
            elif current is not None and current.steps:
                step, label = current.steps[0], label if label != "plan" else "continue"
            if quota_fire and step is not None:
                return self._finish(tick, plan, step, "quota_commit", override,
                                    force_commit=True, season=season, view=view,
                                    pos=pos, at_rest=at_rest, near=near, is_swap=False)

        # tabu filter: never immediately undo the previous move
        if step is not None and cfg.has("tabu") and self._tabu_blocks(tick, step):
            alt_step = self._tabu_alternative(view, pos, plan, step)
            if alt_step is not None:
                if season.controller == "local":
                    step, label = alt_step, "tabu"
                    plan = None
                else:
                    target = plan.target if plan is not None else current.target
                    rerouted = _reroute(view, pos, target, alt_step)
                    if rerouted is not None:
                        plan, step, label = rerouted, alt_step, "tabu"
                    else:
                        step, label, plan = alt_step, "tabu", None

        # frontier forcing: after T_idle ticks without a frontier visit, take
        # the best safe step into the unknown and commit
        if (
            cfg.has("min_dwell_cross")
            and self.ticks_since_frontier >= cfg.T_idle
            and (step is None or not self._enters_unknown(view, pos, step))
        ):
            fr = self._frontier_step(view, pos)
            if fr is not None:
                return self._finish(tick, None, fr, "frontier_step", override,
                                    force_commit=True, season=season, view=view,
                                    pos=pos, at_rest=at_rest, near=near, is_swap=False)

        is_swap = (
            plan is not None
            and current is not None
            and bool(current.steps)
            and list(plan.steps) != list(current.steps)
        )
        return self._finish(tick, plan, step, label, override,
                            force_commit=False, season=season, view=view,
                            pos=pos, at_rest=at_rest, near=near, is_swap=is_swap)

    def _finish(self, tick, plan, step, label, override, force_commit,
                season, view, pos, at_rest, near, is_swap) -> Decision:
        cfg = self.cfg
        com = self.commitment
        if step is None:
            if self._min_step_due():
                return Decision(None, None, "hold", override)
            return Decision(None, plan, "hold", override)

        # idle-preference pathology with its governed counter-levers
        if season.idle_cost is not None and not force_commit:
            dx, dy = DELTA[step]
            c_move = view.cost_at((pos[0] + dx, pos[1] + dy))
            if at_rest:
                c_move += season.move_commit_extra
            c_idle = season.idle_cost + (com.idle_tax if cfg.has("idle_tax") else 0.0)
            move_ok = cfg.has("margin_idle") and c_move <= c_idle + cfg.Delta
            forced = self._min_step_due()
            if not move_ok and not forced and c_idle < c_move:
                return Decision(None, plan, "idle", override)
            if forced:
                label = "forced_step"
                force_commit = True

        if season.swap_costs_tick and is_swap and not force_commit:
            return Decision(None, plan, "swap", override)

        commit = force_commit or cfg.has("commit") or (cfg.has("commit_near_tie") and bool(near))
        return Decision(step, plan, label, override, commit=commit)

    # -- post-execution bookkeeping ----------------------------------------------

    def note_replanned(self, tick: int) -> None:
        self.last_replan_tick = tick

    def start_commit(self, n_steps: int) -> None:
        self.commitment.steps_remaining = min(self.cfg.K, n_steps)
        self.commitment.ticks_remaining = self.cfg.tau

    def after_execute(
        self,
        tick: int,
        moved: bool,
        action: Optional[str],
        pos: Pos,
        pred_energy: float,
        real_energy: float,
        entered_kind: str,
        crossed_frontier: bool,
        realized_risk: float,
        followed_commit: bool,
    ) -> None:
        cfg = self.cfg
        com = self.commitment
        if action is None:
            self.idle_run += 1
            if cfg.has("idle_tax"):
                com.idle_tax += cfg.idle_tax_rate
        else:
            self.idle_run = 0
            com.idle_tax = 0.0
            com.pause_left = cfg.B_pause
            if cfg.has("tabu") and moved:
                com.tabu_move = REVERSE[action]
                com.tabu_expiry = tick + cfg.tabu_len
        if cfg.has("visit_penalty"):
            self.visits *= cfg.visit_decay
            if moved:
                self.visits[pos[1], pos[0]] += 1.0
        if com.active:
            if followed_commit and moved:
                com.steps_remaining -= 1
            com.ticks_remaining -= 1
        if cfg.has("calibrate_energy") and moved and pred_energy > 0:
            ratio = real_energy / pred_energy
            if abs(ratio - 1.0) > 0.1:
                self.rho_acc.append(ratio)
            else:
                self.rho_acc = []
            if len(self.rho_acc) >= cfg.calib_persistence:
                rho = float(np.mean(self.rho_acc))
                prev = self.alpha_energy.get(entered_kind, 1.0)
                self.alpha_energy[entered_kind] = calibrate(
                    prev, rho, len(self.rho_acc), cfg.calib_persistence, cfg.calib_clip,
                )
                self.commitment.alpha_hat = dict(self.alpha_energy)
                self.rho_acc = []
        if crossed_frontier:
            if cfg.has("calibrate_uncertainty") and realized_risk <= 0.1:
                self.u_trust *= 0.5
            self.ticks_since_frontier = 0
        else:
            self.ticks_since_frontier += 1

    # -- helpers --------------------------------------------------------------

    def _min_step_due(self) -> bool:
        return self.cfg.has("min_step") and self.idle_run >= self.cfg.T_idle

    def _tabu_blocks(self, tick: int, step: str) -> bool:
        com = self.commitment
        return com.tabu_move == step and tick <= com.tabu_expiry

    def _tabu_alternative(self, view, pos, plan: Optional[Plan], banned: str) -> Optional[str]:
        if plan is not None and plan.alternatives:
            order = [a.step for a in plan.alternatives]
        else:
            ranked = []
            for i, d in enumerate(CANON_FIXED):
                dx, dy = DELTA[d]
                q = (pos[0] + dx, pos[1] + dy)
                if view.passable(q):
                    ranked.append((float(view.local_cost[q[1], q[0]]), i, d))
            order = [d for _, _, d in sorted(ranked)]
        for d in order:
            if d == banned:
                continue
            dx, dy = DELTA[d]
            if view.passable((pos[0] + dx, pos[1] + dy)):
                return d
        return None

    def _enters_unknown(self, view, pos, step) -> bool:
        dx, dy = DELTA[step]
        q = (pos[0] + dx, pos[1] + dy)
        return view.passable(q) and bool(view.unknown[q[1], q[0]])

    def _frontier_step(self, view, pos) -> Optional[str]:
        best = None
        for i, d in enumerate(CANON_FIXED):
            dx, dy = DELTA[d]
            q = (pos[0] + dx, pos[1] + dy)
            if not view.passable(q) or not bool(view.unknown[q[1], q[0]]):
                continue
            c = view.cost_at(q)
            if best is None or (c, i) < best[:2]:
                best = (c, i, d)
        return None if best is None else best[2]

    def _fused_choice(self, view: AgentView, pos: Pos, fresh: Plan) -> Plan:
        cfg = self.cfg
        best = None
        for i, alt in enumerate(fresh.alternatives):
            dx, dy = DELTA[alt.step]
            cell = (pos[0] + dx, pos[1] + dy)
            if cfg.has("veto") and float(view.risk_model[cell[1], cell[0]]) > cfg.risk_veto:
                continue
            score = fuse(alt.cost, float(view.local_cost[cell[1], cell[0]]), cfg.fusion_alpha)
            if best is None or score < best[0]:
                best = (score, i, alt.step)
        if best is None or best[2] == fresh.first_step:
            return fresh
        rerouted = _reroute(view, pos, fresh.target, best[2])
        return fresh if rerouted is None else rerouted


def _alt_for(plan: Plan, step: str):
    for a in plan.alternatives:
        if a.step == step:
            return a
    return None


def _reroute(view: AgentView, pos: Pos, target: Pos, first: str) -> Optional[Plan]:
    return plan_path(view, pos, target, CANON_FIXED, force_first=first)


# --- presets -------------------------------------------------------------------

def _cfg(levers: set[str], **kw) -> GovernorConfig:
    return GovernorConfig(levers=frozenset(levers), **kw)


PRESETS: dict[str, GovernorConfig] = {
    "default": _cfg({"margin_accept", "commit"}, K=2, Delta=0.05),
    "flipflop": _cfg({"commit_near_tie", "margin_accept", "canonical_tiebreak", "commit"}, K=4),
    "plan_churn": _cfg({"margin_accept", "commit", "replan_throttle"}, K=4, Delta=0.3),
    "perseveration": _cfg({"tabu", "visit_penalty"}, tabu_len=1),
    "paralysis": _cfg({"min_step", "margin_idle", "idle_tax"}, T_idle=2, Delta=0.5),
    "hypervigilance": _cfg({"pause_budget", "commit_near_tie", "margin_accept", "commit"}, B_pause=0, K=4),
    "futile_search": _cfg({"mirage_blind", "progress_quota", "commit"}, K=4, gamma_quota=1.0),
    "belief_incoherence": _cfg({"fusion", "veto", "commit"}, K=6, fusion_alpha=0.8),
    "tiebreak_thrash": _cfg({"preserve_heading", "canonical_tiebreak", "margin_accept", "commit"}, K=4),
    "corridor_thrash": _cfg({"commit", "margin_accept"}, K=8, Delta=0.3, S_switch=0.1),
    "optimality_compulsion": _cfg({"margin_accept", "commit"}, K=4, Delta=0.2, S_switch=0.1),
    "metric_mismatch": _cfg({"calibrate_energy"}, calib_persistence=3),
    "policy_oscillation": _cfg({"smooth", "hysteresis", "commit"}, alpha_ema=0.3, K=4),
    "myopic_pingpong": _cfg({"reversal_cost", "commit", "margin_accept"}, K=8, Delta=0.5),
    "exploration_paralysis": _cfg(
        {"frontier_bonus", "min_dwell_cross", "calibrate_uncertainty"},
        frontier_bonus=4.0, T_idle=2,
    ),
}
