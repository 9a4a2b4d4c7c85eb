"""Planner contracts, with the independent shortest-path oracle.

The oracle below is a forward Dijkstra on an explicit heap, written against
the same cost semantics (pay the entered cell) but sharing no code with the
production sweep; the equivalence test is the dual-route check.
"""

import heapq
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from neurogrid.planner import (
    CANON_FIXED,
    CostWeights,
    build_view,
    fuse,
    local_policy,
    near_tie,
    plan_path,
    select_target,
)
from neurogrid.scenarios import canonical_scenario, scenario_by_name
from neurogrid.world import CellKind, Seasoning, WorldSpec, build_world

DELTAS = {"N": (0, 1), "E": (1, 0), "S": (0, -1), "W": (-1, 0)}


def dijkstra_oracle(cost, blocked, start, goal):
    """Independent forward Dijkstra; returns the optimal path cost or inf."""
    h, w = cost.shape
    dist = {start: 0.0}
    heap = [(0.0, start)]
    done = set()
    while heap:
        d, pos = heapq.heappop(heap)
        if pos in done:
            continue
        if pos == goal:
            return d
        done.add(pos)
        x, y = pos
        for dx, dy in DELTAS.values():
            nx, ny = x + dx, y + dy
            if not (0 <= nx < w and 0 <= ny < h) or blocked[ny, nx]:
                continue
            nd = d + cost[ny, nx]
            if nd < dist.get((nx, ny), math.inf):
                dist[(nx, ny)] = nd
                heapq.heappush(heap, (nd, (nx, ny)))
    return math.inf


def simple_view(spec, weights=None, tick=0, pos=None, memory=None):
    grid = build_world(spec)
    w = weights or CostWeights()
    seen = np.ones((spec.height, spec.width), dtype=bool)
    mem = memory if memory is not None else np.zeros((spec.height, spec.width))
    return grid, build_view(grid, seen, mem, w, spec.seasoning, tick, pos or spec.start)


class TestPlanPath:
    def test_manhattan_on_empty_grid(self):
        spec = WorldSpec(width=7, height=4, start=(0, 0))
        _, view = simple_view(spec)
        plan = plan_path(view, (0, 0), (6, 3))
        assert plan.c_total == pytest.approx(9.0)
        assert len(plan.steps) == 9

    def test_no_path_returns_none(self):
        cells = {(1, y): CellKind(kind="rock") for y in range(4)}
        spec = WorldSpec(width=4, height=4, start=(0, 0), cells=cells)
        _, view = simple_view(spec)
        assert plan_path(view, (0, 0), (3, 3)) is None

    def test_alternatives_sorted_and_c1_equals_total(self):
        spec = WorldSpec(width=7, height=4, start=(1, 1))
        _, view = simple_view(spec)
        plan = plan_path(view, (1, 1), (6, 3))
        costs = [a.cost for a in plan.alternatives]
        assert costs == sorted(costs)
        assert plan.alternatives[0].cost == pytest.approx(plan.c_total, abs=1e-12)

    def test_decomposition_sums_to_total(self):
        spec = canonical_scenario("futile_search")
        _, view = simple_view(spec, weights=CostWeights(1.0, 1.0, 0.0, 0.0))
        foods = [p for p, ck in spec.cells.items() if ck.kind == "food"]
        plan = plan_path(view, spec.start, foods[0])
        assert sum(plan.decomposition.values()) == pytest.approx(plan.c_total, abs=1e-9)

    def test_oracle_equivalence_on_random_grids(self):
        rng = np.random.default_rng(42)
        checked = 0
        for _ in range(200):
            w = int(rng.integers(3, 13))
            h = int(rng.integers(3, 13))
            cells = {}
            for x in range(w):
                for y in range(h):
                    r = rng.random()
                    if r < 0.15 and (x, y) not in ((0, 0), (w - 1, h - 1)):
                        cells[(x, y)] = CellKind(kind="rock")
                    elif r < 0.5:
                        cells[(x, y)] = CellKind(kind="risk_band",
                                                 risk=float(rng.uniform(0, 2)))
            spec = WorldSpec(width=w, height=h, start=(0, 0), cells=cells)
            _, view = simple_view(spec, weights=CostWeights(1.0, float(rng.uniform(0.2, 2.0)), 0.0, 0.0))
            goal = (w - 1, h - 1)
            plan = plan_path(view, (0, 0), goal)
            oracle = dijkstra_oracle(view.model_cost, view.blocked, (0, 0), goal)
            if plan is None:
                assert math.isinf(oracle)
            else:
                assert plan.c_total == pytest.approx(oracle, abs=1e-9)
                checked += 1
        assert checked > 120

    def test_deterministic_byte_for_byte(self):
        spec = canonical_scenario("plan_churn")
        _, view1 = simple_view(spec, tick=3)
        _, view2 = simple_view(spec, tick=3)
        foods = [p for p, ck in spec.cells.items() if ck.kind == "food"]
        p1 = plan_path(view1, spec.start, foods[0])
        p2 = plan_path(view2, spec.start, foods[0])
        assert p1.steps == p2.steps
        assert p1.c_total == p2.c_total

    def test_memory_monotonicity(self):
        spec = scenario_by_name("phobia")
        grid = build_world(spec)
        mem = np.zeros((spec.height, spec.width))
        for (x, y, m) in spec.seasoning.memory_seed:
            mem[y, x] = m
        costs = []
        for w_mem in (0.0, 1.0, 3.0):
            seen = np.ones((spec.height, spec.width), dtype=bool)
            view = build_view(grid, seen, mem, CostWeights(1, 1, 0, w_mem),
                              spec.seasoning, 0, spec.start)
            plan = plan_path(view, spec.start, (7, 2))
            costs.append(plan.c_total)
        assert costs[0] <= costs[1] <= costs[2]

    def test_zero_memory_weight_equals_memory_free_plan(self):
        spec = scenario_by_name("phobia")
        grid = build_world(spec)
        mem = np.zeros((spec.height, spec.width))
        for (x, y, m) in spec.seasoning.memory_seed:
            mem[y, x] = m
        seen = np.ones((spec.height, spec.width), dtype=bool)
        with_mem = build_view(grid, seen, mem, CostWeights(1, 1, 0, 0.0),
                              spec.seasoning, 0, spec.start)
        without = build_view(grid, seen, np.zeros_like(mem), CostWeights(1, 1, 0, 0.0),
                             spec.seasoning, 0, spec.start)
        p1 = plan_path(with_mem, spec.start, (7, 2))
        p2 = plan_path(without, spec.start, (7, 2))
        assert p1.steps == p2.steps

    def test_weight_scaling_leaves_choice_unchanged(self):
        spec = canonical_scenario("belief_incoherence")
        for k in (1.0, 3.0, 0.5):
            season = Seasoning(**{**spec.seasoning.to_dict(),
                                  "w_dist": k * 1.0, "w_risk": k * 2.0,
                                  "local_w_risk": None,
                                  "cost_jitter_cells": None,
                                  "corridor_flicker_cells": [],
                                  "initial_seen": [], "memory_seed": []})
            grid = build_world(spec)
            seen = np.ones((spec.height, spec.width), dtype=bool)
            view = build_view(grid, seen, np.zeros((spec.height, spec.width)),
                              CostWeights(k * 1.0, k * 2.0, 0, 0), season, 0, spec.start)
            plan = plan_path(view, spec.start, (12, 0))
            if k == 1.0:
                reference = plan.steps
            else:
                assert plan.steps == reference

    def test_phobia_path_avoids_memory_and_is_longer(self):
        spec = scenario_by_name("phobia")
        grid = build_world(spec)
        mem = np.zeros((spec.height, spec.width))
        for (x, y, m) in spec.seasoning.memory_seed:
            mem[y, x] = m
        seen = np.ones((spec.height, spec.width), dtype=bool)
        view = build_view(grid, seen, mem, CostWeights(1, 1, 0, 3.0),
                          spec.seasoning, 0, spec.start)
        plan = plan_path(view, spec.start, (7, 2))
        assert all(mem[y, x] == 0 for (x, y) in plan.cells)
        free = build_view(grid, seen, np.zeros_like(mem), CostWeights(1, 1, 0, 0),
                          spec.seasoning, 0, spec.start)
        assert len(plan.steps) > len(plan_path(free, spec.start, (7, 2)).steps)


class TestNearTie:
    def test_inside_band(self):
        assert near_tie(100, 101, 0.02) is True

    def test_outside_band(self):
        assert near_tie(100, 103, 0.02) is False

    def test_exact_tie_with_zero_eta(self):
        for c in (0.5, 7.0, 123.4):
            assert near_tie(c, c, 0.0) is True

    def test_preconditions(self):
        with pytest.raises(ValueError):
            near_tie(0.0, 1.0, 0.02)
        with pytest.raises(ValueError):
            near_tie(2.0, 1.0, 0.02)
        with pytest.raises(ValueError):
            near_tie(1.0, 1.0, 0.5)


class TestLocalPolicy:
    def test_pocket_argmin(self):
        spec = canonical_scenario("perseveration")
        _, view = simple_view(spec, pos=(3, 1))
        move, cost = local_policy(view, (3, 1))
        # A's neighbours score {B: 0.3, others: 0.9}; the argmin is B, westward
        assert move == "W"
        assert cost == pytest.approx(1.3)

    def test_all_equal_canon_picks_north(self):
        spec = WorldSpec(width=5, height=5, start=(2, 2))
        _, view = simple_view(spec, pos=(2, 2))
        move, _ = local_policy(view, (2, 2))
        assert move == "N"

    def test_single_open_neighbor_forced(self):
        cells = {
            (2, 3): CellKind(kind="rock"),
            (1, 2): CellKind(kind="rock"),
            (2, 1): CellKind(kind="rock"),
        }
        spec = WorldSpec(width=5, height=5, start=(2, 2), cells=cells)
        _, view = simple_view(spec, pos=(2, 2))
        move, _ = local_policy(view, (2, 2))
        assert move == "E"

    def test_fully_enclosed_returns_none(self):
        cells = {p: CellKind(kind="rock")
                 for p in ((2, 3), (1, 2), (2, 1), (3, 2))}
        spec = WorldSpec(width=5, height=5, start=(2, 2), cells=cells)
        _, view = simple_view(spec, pos=(2, 2))
        move, cost = local_policy(view, (2, 2))
        assert move is None and math.isinf(cost)


class TestFuse:
    @pytest.mark.parametrize("alpha,expected", [(1.0, 10.0), (0.0, 20.0), (0.25, 17.5)])
    def test_convex_combination(self, alpha, expected):
        assert fuse(10, 20, alpha) == pytest.approx(expected)

    def test_alpha_bounds(self):
        with pytest.raises(ValueError):
            fuse(1, 2, 1.5)


class TestSelectTarget:
    def test_argmin_over_plan_costs(self):
        cells = {(5, 0): CellKind(kind="food", meal=1),
                 (0, 9): CellKind(kind="food", meal=1)}
        spec = WorldSpec(width=10, height=10, start=(0, 0), cells=cells)
        _, view = simple_view(spec)
        pos, cost = select_target(view, (0, 0), [(5, 0), (0, 9)])
        assert pos == (5, 0) and cost == pytest.approx(5.0)

    def test_memory_inflation_switches_target(self):
        spec = scenario_by_name("phobia")
        grid = build_world(spec)
        mem = np.zeros((spec.height, spec.width))
        for (x, y, m) in spec.seasoning.memory_seed:
            mem[y, x] = m
        seen = np.ones((spec.height, spec.width), dtype=bool)
        foods = [(7, 2), (7, 7)]
        free = build_view(grid, seen, np.zeros_like(mem), CostWeights(1, 1, 0, 0),
                          spec.seasoning, 0, spec.start)
        assert select_target(free, spec.start, foods)[0] == (7, 2)
        averse = build_view(grid, seen, mem, CostWeights(1, 1, 0, 3.0),
                            spec.seasoning, 0, spec.start)
        assert select_target(averse, spec.start, foods)[0] == (7, 7)

    def test_equal_costs_pick_lower_x(self):
        cells = {(4, 0): CellKind(kind="food", meal=1),
                 (0, 4): CellKind(kind="food", meal=1)}
        spec = WorldSpec(width=6, height=6, start=(0, 0), cells=cells)
        _, view = simple_view(spec)
        assert select_target(view, (0, 0), [(4, 0), (0, 4)])[0] == (0, 4)

    def test_no_food_returns_none(self):
        spec = WorldSpec(width=3, height=3, start=(0, 0))
        _, view = simple_view(spec)
        assert select_target(view, (0, 0), []) is None


@given(st.integers(min_value=0, max_value=2 ** 31), st.integers(min_value=2, max_value=6))
@settings(max_examples=30, deadline=None)
def test_forced_first_step_costs_at_least_best(seed, size):
    rng = np.random.default_rng(seed)
    cells = {}
    for x in range(size):
        for y in range(size):
            if rng.random() < 0.4:
                cells[(x, y)] = CellKind(kind="risk_band", risk=float(rng.uniform(0, 1)))
    spec = WorldSpec(width=size, height=size, start=(0, 0), cells=cells)
    grid = build_world(spec)
    seen = np.ones((size, size), dtype=bool)
    view = build_view(grid, seen, np.zeros((size, size)), CostWeights(),
                      spec.seasoning, 0, (0, 0))
    goal = (size - 1, size - 1)
    best = plan_path(view, (0, 0), goal)
    if best is None:
        return
    for d in CANON_FIXED:
        forced = plan_path(view, (0, 0), goal, force_first=d)
        if forced is not None:
            assert forced.c_total >= best.c_total - 1e-9
            assert forced.steps[0] == d
