"""Scenario geometry and cell semantics.

A WorldSpec is a fully pinned, serializable description of one scenario:
grid cells, visibility model, homeostat numbers, and the "seasoning" knobs
that provoke specific behavioural pathologies (tie-canon alternation, model
cost jitter, idle preference, mirage semantics, ...). build_world freezes it
into numpy layers the planner and executor read.

Movement is 4-connected (N, E, S, W with y increasing northwards); sensing is
Chebyshev. Out-of-bounds behaves as rock so planning stays total.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from typing import Iterable, Optional

import numpy as np

Pos = tuple[int, int]

DIRS: tuple[str, ...] = ("N", "E", "S", "W")
DELTA: dict[str, Pos] = {"N": (0, 1), "E": (1, 0), "S": (0, -1), "W": (-1, 0)}
REVERSE: dict[str, str] = {"N": "S", "S": "N", "E": "W", "W": "E"}

PASSABLE_KINDS = ("open", "food", "risk_band", "ice_band", "mirage_band")
ALL_KINDS = PASSABLE_KINDS + ("rock", "social")


class WorldError(ValueError):
    """Invalid world specification or scenario file."""


@dataclass(frozen=True)
class CellKind:
    kind: str = "open"
    meal: float = 0.0
    poisonous: bool = False
    risk: float = 0.0
    slip_prob: float = 0.0
    energy_factor: float = 1.0
    lure: float = 0.0

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise WorldError(f"unknown cell kind {self.kind!r}")
        if not 0.0 <= self.slip_prob <= 1.0:
            raise WorldError("slip_prob must be in [0, 1]")
        if self.energy_factor < 1.0:
            raise WorldError("energy_factor must be >= 1")
        if min(self.risk, self.meal, self.lure) < 0.0:
            raise WorldError("risk, meal and lure must be non-negative")

    @property
    def passable(self) -> bool:
        # social cells are immovable and hence the same as rocks
        return self.kind in PASSABLE_KINDS


ROCK = CellKind(kind="rock")
OPEN = CellKind(kind="open")


@dataclass(frozen=True)
class VisibilityModel:
    mode: str = "gv"  # "gv" | "lv"
    radius: int = 0

    def __post_init__(self):
        if self.mode not in ("gv", "lv"):
            raise WorldError(f"visibility mode must be gv or lv, got {self.mode!r}")
        if self.mode == "lv" and self.radius < 1:
            raise WorldError("lv radius must be >= 1")


@dataclass(frozen=True)
class Observation:
    tick: int
    revealed: frozenset[Pos]


@dataclass
class Seasoning:
    """Scenario-pinned controller knobs and pathology triggers.

    Everything numeric a canonical scenario relies on lives here so its JSON
    file is self-contained.
    """

    # control loop
    replan_every_tick: bool = True
    controller: str = "global"  # "global" | "local"
    eta: float = 0.02
    accept_any_plan: bool = True
    # tie-break instability (queue-order noise analogue): flips the canon
    # between (N,E,S,W) and (E,N,W,S) on odd ticks
    tie_canon_mode: str = "fixed"  # "fixed" | "alternate"
    # decaying model-only penalty on recently traversed cells
    recency_penalty: float = 0.0
    recency_decay: float = 0.5
    # deterministic model-only cost flicker, seed-independent
    cost_jitter_amp: float = 0.0
    cost_jitter_cells: Optional[list[Pos]] = None  # None -> every passable cell
    jitter_salt: int = 0
    # parity flicker: listed cells gain `amp` model cost on odd ticks (a
    # deterministic stand-in for drifting hazard estimates)
    corridor_flicker_amp: float = 0.0
    corridor_flicker_cells: list[Pos] = field(default_factory=list)
    # pathological pause / idle / swap rules
    pause_on_near_tie: bool = False
    idle_cost: Optional[float] = None
    move_commit_extra: float = 0.0
    swap_costs_tick: bool = False
    # limited-visibility model shaping
    uncertainty_penalty: float = 0.0
    initial_seen: list[tuple[int, int, int, int]] = field(default_factory=list)
    # mirage semantics: attract beyond `mirage_radius` (Chebyshev), repel within
    mirage_near_factor: float = 1.0
    mirage_radius: int = 1
    # aversive memory
    memory_seed: list[tuple[int, int, float]] = field(default_factory=list)
    gamma_amp: float = 3.0
    rho_decay: float = 0.02
    gen_radius: int = 1
    gen_falloff: float = 0.5
    poison_severity: float = 1.0
    no_food_severity: float = 0.3
    poison_energy_penalty: float = 1.0
    # cost weights (the reality-anchored account uses these same numbers)
    w_dist: float = 1.0
    w_risk: float = 1.0
    w_energy: float = 0.0
    w_mem: float = 0.0
    # belief split: a local module scoring risk differently from the global one
    local_w_risk: Optional[float] = None
    # state-coupled risk-weight schedule (threat cue spike, exponential decay)
    threat_period: int = 0
    threat_spike: float = 0.0
    threat_decay: float = 0.7
    w_risk_min: float = 0.0
    w_risk_max: float = 10.0
    # homeostat
    h0: float = 0.0
    h_star: float = 0.0
    theta_h: float = 0.0
    dh_per_tick: float = 1.0
    starve_delta: Optional[float] = None
    # trace annotation
    classifier: str = "auto"  # auto | corridor | risk | none
    corridor_split_y: Optional[float] = None

    def __post_init__(self):
        if self.controller not in ("global", "local"):
            raise WorldError("controller must be global or local")
        if self.tie_canon_mode not in ("fixed", "alternate"):
            raise WorldError("tie_canon_mode must be fixed or alternate")
        if not 0.0 <= self.eta <= 0.1:
            raise WorldError("eta must be in [0, 0.1]")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cost_jitter_cells"] = (
            None if self.cost_jitter_cells is None
            else [list(p) for p in self.cost_jitter_cells]
        )
        d["corridor_flicker_cells"] = [list(p) for p in self.corridor_flicker_cells]
        d["initial_seen"] = [list(r) for r in self.initial_seen]
        d["memory_seed"] = [[x, y, m] for (x, y, m) in self.memory_seed]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Seasoning":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise WorldError(f"unknown seasoning fields: {sorted(extra)}")
        kw = dict(d)
        if kw.get("cost_jitter_cells") is not None:
            kw["cost_jitter_cells"] = [tuple(p) for p in kw["cost_jitter_cells"]]
        kw["corridor_flicker_cells"] = [tuple(p) for p in kw.get("corridor_flicker_cells", [])]
        kw["initial_seen"] = [tuple(r) for r in kw.get("initial_seen", [])]
        kw["memory_seed"] = [(int(x), int(y), float(m)) for x, y, m in kw.get("memory_seed", [])]
        return cls(**kw)


@dataclass
class WorldSpec:
    width: int
    height: int
    start: Pos
    cells: dict[Pos, CellKind] = field(default_factory=dict)
    goal: Optional[Pos] = None
    food_respawn: bool = False
    visibility: VisibilityModel = field(default_factory=VisibilityModel)
    proceed_cue_tick: Optional[int] = None
    max_ticks: int = 100
    seasoning: Seasoning = field(default_factory=Seasoning)
    name: str = ""

    def cell(self, pos: Pos) -> CellKind:
        if not self.in_bounds(pos):
            return ROCK
        return self.cells.get(pos, OPEN)

    def in_bounds(self, pos: Pos) -> bool:
        x, y = pos
        return 0 <= x < self.width and 0 <= y < self.height

    def validate(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise WorldError("zero dimensions")
        if self.max_ticks <= 0:
            raise WorldError("max_ticks must be positive")
        for pos in self.cells:
            if not self.in_bounds(pos):
                raise WorldError(f"cell {pos} out of bounds")
        if not self.in_bounds(self.start) or not self.cell(self.start).passable:
            raise WorldError("start impassable")
        if self.goal is not None:
            if not self.in_bounds(self.goal) or not self.cell(self.goal).passable:
                raise WorldError("goal impassable")
        for pos, ck in self.cells.items():
            if ck.kind == "food" and not ck.passable:
                raise WorldError(f"food cell {pos} impassable")


class Grid:
    """Immutable numpy view of a validated WorldSpec."""

    def __init__(self, spec: WorldSpec):
        spec.validate()
        self.spec = spec
        self.width = spec.width
        self.height = spec.height
        h, w = spec.height, spec.width
        self.blocked = np.zeros((h, w), dtype=bool)
        self.risk = np.zeros((h, w))
        self.energy = np.ones((h, w))
        self.slip = np.zeros((h, w))
        self.lure = np.zeros((h, w))
        self.meal = np.zeros((h, w))
        self.poison = np.zeros((h, w), dtype=bool)
        self.kind_code = np.zeros((h, w), dtype=np.int8)
        self.foods: dict[Pos, CellKind] = {}
        for pos, ck in spec.cells.items():
            x, y = pos
            self.kind_code[y, x] = ALL_KINDS.index(ck.kind)
            if not ck.passable:
                self.blocked[y, x] = True
                continue
            self.risk[y, x] = ck.risk
            self.energy[y, x] = ck.energy_factor
            self.slip[y, x] = ck.slip_prob
            self.lure[y, x] = ck.lure
            if ck.kind == "food":
                self.meal[y, x] = ck.meal
                self.poison[y, x] = ck.poisonous
                self.foods[pos] = ck
        for a in (self.blocked, self.risk, self.energy, self.slip,
                  self.lure, self.meal, self.poison, self.kind_code):
            a.setflags(write=False)

    def kind_mask(self, kind: str) -> np.ndarray:
        return self.kind_code == ALL_KINDS.index(kind)

    def in_bounds(self, pos: Pos) -> bool:
        x, y = pos
        return 0 <= x < self.width and 0 <= y < self.height

    def kind_at(self, pos: Pos) -> CellKind:
        return self.spec.cell(pos)

    def passable(self, pos: Pos) -> bool:
        return self.in_bounds(pos) and not self.blocked[pos[1], pos[0]]

    def neighbors(self, pos: Pos) -> list[tuple[str, Pos]]:
        x, y = pos
        out = []
        for d in DIRS:
            dx, dy = DELTA[d]
            q = (x + dx, y + dy)
            if self.passable(q):
                out.append((d, q))
        return out

    def all_positions(self) -> Iterable[Pos]:
        for y in range(self.height):
            for x in range(self.width):
                yield (x, y)


def build_world(spec: WorldSpec) -> Grid:
    return Grid(spec)


def chebyshev(a: Pos, b: Pos) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def visible_set(grid: Grid, pos: Pos, model: VisibilityModel) -> set[Pos]:
    """Cells in view from pos: whole board under GV, the (2r+1)^2 chess-king
    block clipped to bounds under LV."""
    if not grid.in_bounds(pos):
        raise WorldError(f"position {pos} out of bounds")
    if model.mode == "gv":
        return set(grid.all_positions())
    r = model.radius
    x0, y0 = pos
    return {
        (x, y)
        for x in range(max(0, x0 - r), min(grid.width, x0 + r + 1))
        for y in range(max(0, y0 - r), min(grid.height, y0 + r + 1))
    }


def respawn_food(
    food_state: dict[Pos, CellKind],
    grid: Grid,
    eaten: Pos,
    rng: np.random.Generator,
) -> Pos:
    """Move an eaten food to a uniformly drawn passable, food-free, non-start
    cell somewhere else on the board, keeping the eaten cell's meal/poison
    parameters.

    Mutates food_state (the episode-local overlay). Raises WorldError when the
    board has no free cell left.
    """
    if eaten not in food_state:
        raise WorldError(f"no food at {eaten}")
    ck = food_state.pop(eaten)
    candidates = [
        p for p in grid.all_positions()
        if grid.passable(p) and p not in food_state
        and p != grid.spec.start and p != eaten
    ]
    if not candidates:
        food_state[eaten] = ck
        raise WorldError("no free cell for food respawn")
    new_pos = candidates[int(rng.integers(0, len(candidates)))]
    food_state[new_pos] = ck
    return new_pos


# --- scenario file round-trip ------------------------------------------------

_CELL_DEFAULTS = CellKind()


def _cell_to_json(pos: Pos, ck: CellKind) -> dict:
    d: dict = {"x": pos[0], "y": pos[1], "kind": ck.kind}
    for fname in ("meal", "poisonous", "risk", "slip_prob", "energy_factor", "lure"):
        v = getattr(ck, fname)
        if v != getattr(_CELL_DEFAULTS, fname):
            d[fname] = v
    return d


_SPEC_KEYS = {
    "width", "height", "start", "goal", "cells", "visibility",
    "food_respawn", "proceed_cue_tick", "max_ticks", "seasoning", "name",
}
_REJECTED_KEYS = {"weather", "topography", "slopes", "terrain_familiarity"}


def serialize_spec(spec: WorldSpec) -> dict:
    return {
        "name": spec.name,
        "width": spec.width,
        "height": spec.height,
        "start": list(spec.start),
        "goal": None if spec.goal is None else list(spec.goal),
        "cells": [
            _cell_to_json(pos, ck)
            for pos, ck in sorted(spec.cells.items(), key=lambda kv: (kv[0][1], kv[0][0]))
        ],
        "visibility": {"mode": spec.visibility.mode, "r": spec.visibility.radius},
        "food_respawn": spec.food_respawn,
        "proceed_cue_tick": spec.proceed_cue_tick,
        "max_ticks": spec.max_ticks,
        "seasoning": spec.seasoning.to_dict(),
    }


def parse_spec(d: dict) -> WorldSpec:
    unknown = set(d) - _SPEC_KEYS
    stubs = unknown & _REJECTED_KEYS
    if stubs:
        raise WorldError(f"unsupported scenario fields: {sorted(stubs)}")
    if unknown:
        raise WorldError(f"unknown scenario fields: {sorted(unknown)}")
    try:
        cells: dict[Pos, CellKind] = {}
        for c in d.get("cells", []):
            pos = (int(c["x"]), int(c["y"]))
            params = {k: v for k, v in c.items() if k not in ("x", "y")}
            cells[pos] = CellKind(**params)
        vis = d.get("visibility", {"mode": "gv", "r": 0})
        spec = WorldSpec(
            width=int(d["width"]),
            height=int(d["height"]),
            start=tuple(d["start"]),
            cells=cells,
            goal=None if d.get("goal") is None else tuple(d["goal"]),
            food_respawn=bool(d.get("food_respawn", False)),
            visibility=VisibilityModel(mode=vis["mode"], radius=int(vis.get("r", 0))),
            proceed_cue_tick=d.get("proceed_cue_tick"),
            max_ticks=int(d.get("max_ticks", 100)),
            seasoning=Seasoning.from_dict(d.get("seasoning", {})),
            name=d.get("name", ""),
        )
    except (KeyError, TypeError) as exc:
        raise WorldError(f"malformed scenario file: {exc}") from exc
    spec.validate()
    return spec


def load_spec(path) -> WorldSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_spec(json.load(fh))


def save_spec(spec: WorldSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(serialize_spec(spec), fh, indent=1, sort_keys=True)
        fh.write("\n")
