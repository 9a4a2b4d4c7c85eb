"""Global route planning and the short-horizon local rule.

The global planner is a uniform-cost sweep to the goal (A* with a zero
heuristic): one sweep yields the optimal cost-to-goal for every cell, from
which we extract the canonical path, the competing first-step costs c1 <= c2
needed by the near-tie machinery, and per-alternative risk totals. Ties are
broken by a fixed lexicographic canon (N < E < S < W on equal value, which
also implies lower x then lower y for equidistant frontiers).

The local rule is deliberately myopic: argmin of the scalarized cell cost over
passable orthogonal neighbours, canon on ties, no goal term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._kernels import value_sweep
from .rng import noise_field, unit_noise
from .world import DELTA, DIRS, Grid, Pos, Seasoning, chebyshev

CANON_FIXED: tuple[str, ...] = ("N", "E", "S", "W")
CANON_ALT: tuple[str, ...] = ("W", "S", "E", "N")  # inverted insertion order

COST_FLOOR = 0.01


@dataclass(frozen=True)
class CostWeights:
    w_dist: float = 1.0
    w_risk: float = 1.0
    w_energy: float = 0.0
    w_mem: float = 0.0

    def __post_init__(self):
        for name in ("w_dist", "w_risk", "w_energy", "w_mem"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0")


@dataclass(frozen=True)
class Alternative:
    step: str
    cost: float
    risk_sum: float = 0.0


@dataclass(frozen=True)
class Plan:
    steps: tuple[str, ...]
    cells: tuple[Pos, ...]
    c_total: float
    decomposition: dict[str, float]
    alternatives: tuple[Alternative, ...]
    target: Pos

    @property
    def c1(self) -> float:
        return self.c_total

    @property
    def c2(self) -> float:
        if len(self.alternatives) < 2:
            return math.nan
        return self.alternatives[1].cost

    @property
    def first_step(self) -> Optional[str]:
        return self.steps[0] if self.steps else None


@dataclass
class AgentView:
    """Model-side picture of the world at one tick.

    model_cost is the scalarized planning cost per entered cell (clamped to
    COST_FLOOR); pred_energy is the model's raw energy forecast per entered
    cell, which is what realized/predicted audits compare against.
    """

    blocked: np.ndarray
    model_cost: np.ndarray
    local_cost: np.ndarray
    dist_term: np.ndarray
    risk_term: np.ndarray
    energy_term: np.ndarray
    mem_term: np.ndarray
    adjust_term: np.ndarray
    pred_energy: np.ndarray
    risk_model: np.ndarray
    seen: np.ndarray
    unknown: np.ndarray
    weights: CostWeights
    local_w_risk: Optional[float] = None
    _sweeps: dict = field(default_factory=dict, repr=False)

    def sweep_to(self, goal: Pos) -> np.ndarray:
        if goal not in self._sweeps:
            self._sweeps[goal] = value_sweep(self.model_cost, self.blocked, goal[0], goal[1])
        return self._sweeps[goal]

    def passable(self, pos: Pos) -> bool:
        x, y = pos
        h, w = self.blocked.shape
        return 0 <= x < w and 0 <= y < h and not self.blocked[y, x]

    def cost_at(self, pos: Pos) -> float:
        return float(self.model_cost[pos[1], pos[0]])


def build_view(
    grid: Grid,
    seen: np.ndarray,
    memory: np.ndarray,
    weights: CostWeights,
    seasoning: Seasoning,
    tick: int,
    agent_pos: Pos,
    recency: Optional[np.ndarray] = None,
    alpha_energy: Optional[dict[str, float]] = None,
    mirage_trust: float = 1.0,
    uncertainty_penalty: Optional[float] = None,
    shaping: Optional[np.ndarray] = None,
    surveyed: Optional[np.ndarray] = None,
    base_cache: Optional[dict] = None,
) -> AgentView:
    """Assemble the planner's cost model for this tick.

    Unknown cells are optimistic: passable, zero risk, unit energy. The
    uncertainty penalty (if any) is a flat additive cost on unsurveyed cells;
    when no survey mask is given, unsurveyed means not-yet-seen. Mirage lure
    is model-only: attractive beyond mirage_radius, repulsive within it, and
    never realized at execution.

    The static layers (distance, known risk, calibrated energy, uncertainty)
    only change on reveals or recalibration; callers in a tick loop pass a
    `base_cache` dict so they are rebuilt only then.
    """
    h, w = grid.blocked.shape
    key = None
    base = None
    if base_cache is not None:
        key = (
            weights,
            seen.tobytes(),
            None if surveyed is None else surveyed.tobytes(),
            tuple(sorted((alpha_energy or {}).items())),
            uncertainty_penalty,
        )
        base = base_cache.get(key)
    if base is None:
        blocked = grid.blocked & seen
        risk_model = np.where(seen, grid.risk, 0.0)
        energy_model = np.ones((h, w))
        if alpha_energy:
            for kind, alpha in alpha_energy.items():
                if alpha != 1.0:
                    energy_model = np.where(seen & grid.kind_mask(kind), alpha, energy_model)
        dist_term = np.full((h, w), weights.w_dist)
        risk_term = weights.w_risk * risk_model
        energy_term = weights.w_energy * energy_model
        unknown = ~surveyed if surveyed is not None else ~seen
        static_adjust = np.zeros((h, w))
        u_pen = seasoning.uncertainty_penalty if uncertainty_penalty is None else uncertainty_penalty
        if u_pen:
            static_adjust = np.where(unknown, float(u_pen), 0.0)
        base = (blocked, risk_model, energy_model, dist_term, risk_term,
                energy_term, unknown, static_adjust,
                dist_term + risk_term + energy_term + static_adjust)
        if base_cache is not None:
            base_cache.clear()
            base_cache[key] = base
    (blocked, risk_model, energy_model, dist_term, risk_term,
     energy_term, unknown, static_adjust, static_sum) = base

    adjust = static_adjust
    dynamic = None

    def dyn():
        nonlocal adjust, dynamic
        if dynamic is None:
            dynamic = adjust.copy()
            adjust = dynamic
        return dynamic

    if np.any(grid.lure > 0):
        ax, ay = agent_pos
        ys, xs = np.mgrid[0:h, 0:w]
        cheb = np.maximum(np.abs(xs - ax), np.abs(ys - ay))
        lure_mask = seen & (grid.lure > 0)
        far = lure_mask & (cheb > seasoning.mirage_radius)
        near = lure_mask & ~far
        d = dyn()
        d -= np.where(far, grid.lure * mirage_trust, 0.0)
        d += np.where(
            near, (seasoning.mirage_near_factor - 1.0) * weights.w_dist * mirage_trust, 0.0
        )
    if recency is not None and np.any(recency):
        dyn()
        dynamic += recency
    if seasoning.cost_jitter_amp > 0:
        amp = seasoning.cost_jitter_amp
        salt = seasoning.jitter_salt
        d = dyn()
        if seasoning.cost_jitter_cells is None:
            jit = amp * (2.0 * noise_field(salt, tick, w, h) - 1.0)
            d += np.where(blocked, 0.0, jit)
        else:
            for (x, y) in seasoning.cost_jitter_cells:
                d[y, x] += amp * (2.0 * unit_noise(salt, tick, x, y) - 1.0)
    if seasoning.corridor_flicker_amp > 0 and tick % 2 == 1:
        d = dyn()
        for (x, y) in seasoning.corridor_flicker_cells:
            d[y, x] += seasoning.corridor_flicker_amp
    if shaping is not None:
        dyn()
        dynamic += shaping

    if dynamic is None:
        raw = static_sum
    else:
        raw = static_sum + (dynamic - static_adjust)
    mem_term = weights.w_mem * memory if weights.w_mem else None
    if mem_term is not None and np.any(mem_term):
        raw = raw + mem_term
    else:
        mem_term = None
    model_cost = np.maximum(raw, COST_FLOOR)
    # fold the clamp into the adjustment bucket so the decomposition still sums
    adjust_term = adjust + (model_cost - raw)
    zero = np.zeros((h, w))
    mem_out = mem_term if mem_term is not None else zero

    if seasoning.local_w_risk is not None:
        local_raw = dist_term + seasoning.local_w_risk * risk_model + energy_term + mem_out + adjust
        local_cost = np.maximum(local_raw, COST_FLOOR)
        local_w_risk = seasoning.local_w_risk
    else:
        local_cost = model_cost
        local_w_risk = None

    return AgentView(
        blocked=blocked,
        model_cost=model_cost,
        local_cost=local_cost,
        dist_term=dist_term,
        risk_term=risk_term,
        energy_term=energy_term,
        mem_term=mem_out,
        adjust_term=adjust_term,
        pred_energy=energy_model,
        risk_model=risk_model,
        seen=seen,
        unknown=unknown,
        weights=weights,
        local_w_risk=local_w_risk,
    )


def canon_for_tick(seasoning: Seasoning, tick: int) -> tuple[str, ...]:
    if seasoning.tie_canon_mode == "alternate" and tick % 2 == 1:
        return CANON_ALT
    return CANON_FIXED


def _descend(view: AgentView, value: np.ndarray, start: Pos, goal: Pos,
             canon: tuple[str, ...], first: Optional[Pos] = None):
    """Walk the value field from start to goal, canon-first on exact ties.

    Returns (steps, cells). `first` forces the initial cell (used to score
    alternatives)."""
    steps: list[str] = []
    cells: list[Pos] = []
    pos = start
    if first is not None:
        for d in canon:
            dx, dy = DELTA[d]
            if (pos[0] + dx, pos[1] + dy) == first:
                steps.append(d)
                cells.append(first)
                pos = first
                break
    guard = view.blocked.size + 1
    while pos != goal and len(cells) <= guard:
        best_val = math.inf
        best = None
        for d in canon:
            dx, dy = DELTA[d]
            q = (pos[0] + dx, pos[1] + dy)
            if not view.passable(q):
                continue
            v = value[q[1], q[0]]
            if not math.isfinite(v):
                continue
            val = view.cost_at(q) + v
            if val < best_val:
                best_val = val
                best = (d, q)
        if best is None:
            return None
        steps.append(best[0])
        cells.append(best[1])
        pos = best[1]
    if pos != goal:
        return None
    return tuple(steps), tuple(cells)


def plan_path(
    view: AgentView,
    start: Pos,
    goal: Pos,
    canon: tuple[str, ...] = CANON_FIXED,
    want_alt_risk: bool = False,
    force_first: Optional[str] = None,
) -> Optional[Plan]:
    """Minimum-cost plan from start to goal under the view's cost model.

    Returns None when the goal is unreachable in the current view. The
    alternatives list carries the best achievable cost per distinct first
    step, sorted ascending (canon order on exact ties), so alternatives[0]
    matches c_total exactly. `force_first` pins the opening move and returns
    the best plan through it (None when no such route exists).
    """
    if not view.passable(start) or not view.passable(goal):
        return None
    value = view.sweep_to(goal)
    if not math.isfinite(value[start[1], start[0]]):
        return None
    if start == goal:
        return Plan((), (), 0.0, _zero_decomp(), (), goal)

    alts = []
    for d in CANON_FIXED:
        dx, dy = DELTA[d]
        q = (start[0] + dx, start[1] + dy)
        if not view.passable(q):
            continue
        v = value[q[1], q[0]]
        if not math.isfinite(v):
            continue
        cost = float(view.cost_at(q) + v)
        risk_sum = 0.0
        if want_alt_risk:
            walked = _descend(view, value, start, goal, canon, first=q)
            if walked is not None:
                _, cells = walked
                risk_sum = float(sum(view.risk_model[c[1], c[0]] for c in cells))
        alts.append((cost, canon.index(d), Alternative(d, cost, risk_sum)))
    alts.sort(key=lambda t: (t[0], t[1]))
    alternatives = tuple(a for _, _, a in alts)

    first_cell = None
    if force_first is not None:
        dx, dy = DELTA[force_first]
        first_cell = (start[0] + dx, start[1] + dy)
        if not view.passable(first_cell):
            return None
        if not math.isfinite(value[first_cell[1], first_cell[0]]):
            return None
    walked = _descend(view, value, start, goal, canon, first=first_cell)
    if walked is None:
        return None
    steps, cells = walked
    decomp = _zero_decomp()
    for (x, y) in cells:
        decomp["dist"] += float(view.dist_term[y, x])
        decomp["risk"] += float(view.risk_term[y, x])
        decomp["energy"] += float(view.energy_term[y, x])
        decomp["mem"] += float(view.mem_term[y, x])
        decomp["adjust"] += float(view.adjust_term[y, x])
    c_total = float(sum(view.model_cost[y, x] for (x, y) in cells))
    return Plan(steps, cells, c_total, decomp, alternatives, goal)


def _zero_decomp() -> dict[str, float]:
    return {"dist": 0.0, "risk": 0.0, "energy": 0.0, "mem": 0.0, "adjust": 0.0}


def near_tie(c1: float, c2: float, eta: float) -> bool:
    """True when the top-two plan costs are within the near-tie band."""
    if not (0 < c1 <= c2):
        raise ValueError("near_tie expects 0 < c1 <= c2")
    if not (0 <= eta <= 0.1):
        raise ValueError("eta must lie in [0, 0.1]")
    return bool(c2 <= (1.0 + eta) * c1)


def local_policy(view: AgentView, pos: Pos, canon: tuple[str, ...] = CANON_FIXED):
    """Myopic minimum-fear move: argmin of the local scalarized cell cost over
    passable neighbours, canon on ties. Returns (move, cost) or (None, inf)
    when fully enclosed."""
    best = None
    best_cost = math.inf
    for d in canon:
        dx, dy = DELTA[d]
        q = (pos[0] + dx, pos[1] + dy)
        if not view.passable(q):
            continue
        c = float(view.local_cost[q[1], q[0]])
        if c < best_cost:
            best_cost = c
            best = d
    return best, best_cost


def fuse(c_global: float, c_local: float, alpha: float) -> float:
    """Confidence-weighted arbitration of a candidate's global and local cost."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    return alpha * c_global + (1.0 - alpha) * c_local


def select_target(
    view: AgentView,
    start: Pos,
    foods: list[Pos],
    canon: tuple[str, ...] = CANON_FIXED,
) -> Optional[tuple[Pos, float]]:
    """Cheapest-to-reach food under the current model.

    Ties resolve to lower cost, then lower x, then lower y. Returns
    (position, plan cost) or None when nothing is reachable."""
    if not foods:
        return None
    sweep = view.sweep_to(start)
    c_start = view.cost_at(start)
    best = None
    for f in sorted(foods):
        v = sweep[f[1], f[0]]
        if not math.isfinite(v):
            continue
        if f == start:
            cost = 0.0
        else:
            cost = float(v - c_start + view.cost_at(f))
        if best is None or cost < best[1]:
            best = (f, cost)
    return best
