import json

import pytest
from hypothesis import given, settings, strategies as st

from neurogrid.rng import substream
from neurogrid.scenarios import all_scenario_names, canonical_scenario, scenario_by_name
from neurogrid.world import (
    CellKind,
    Seasoning,
    VisibilityModel,
    WorldError,
    WorldSpec,
    build_world,
    chebyshev,
    parse_spec,
    respawn_food,
    serialize_spec,
    visible_set,
)


def open_world(w=10, h=10, **kw):
    return WorldSpec(width=w, height=h, start=(0, 0), **kw)


class TestCellKind:
    def test_rock_and_social_are_equally_impassable(self):
        assert not CellKind(kind="rock").passable
        assert not CellKind(kind="social").passable

    def test_parameter_invariants(self):
        with pytest.raises(WorldError):
            CellKind(kind="ice_band", slip_prob=1.5)
        with pytest.raises(WorldError):
            CellKind(kind="ice_band", energy_factor=0.5)
        with pytest.raises(WorldError):
            CellKind(kind="risk_band", risk=-1)
        with pytest.raises(WorldError):
            CellKind(kind="lava")


class TestBuildWorld:
    def test_empty_world_all_passable(self):
        grid = build_world(open_world())
        assert sum(grid.passable(p) for p in grid.all_positions()) == 100

    def test_start_on_rock_rejected(self):
        spec = open_world(cells={(0, 0): CellKind(kind="rock")})
        with pytest.raises(WorldError, match="start impassable"):
            build_world(spec)

    def test_zero_dimensions_rejected(self):
        with pytest.raises(WorldError):
            build_world(WorldSpec(width=0, height=3, start=(0, 0)))

    def test_out_of_bounds_behaves_as_rock(self):
        grid = build_world(open_world())
        assert not grid.passable((-1, 0))
        assert grid.kind_at((10, 10)).kind == "rock"

    def test_canonical_flipflop_geometry(self):
        spec = canonical_scenario("flipflop")
        grid = build_world(spec)
        assert (spec.width, spec.height) == (7, 4)
        rocks = [p for p in grid.all_positions() if not grid.passable(p)]
        assert rocks == [(3, 1)]
        assert spec.start == (0, 0)


class TestVisibility:
    def test_lv_radius_two_is_5x5_block(self):
        grid = build_world(open_world())
        vis = visible_set(grid, (5, 5), VisibilityModel(mode="lv", radius=2))
        assert len(vis) == 25

    def test_lv_radius_one_corner_clips_to_four(self):
        grid = build_world(open_world())
        vis = visible_set(grid, (0, 0), VisibilityModel(mode="lv", radius=1))
        assert vis == {(0, 0), (1, 0), (0, 1), (1, 1)}

    def test_gv_covers_whole_board(self):
        grid = build_world(open_world(7, 4))
        assert len(visible_set(grid, (3, 2), VisibilityModel())) == 28

    @given(
        r=st.integers(min_value=1, max_value=4),
        x=st.integers(min_value=0, max_value=9),
        y=st.integers(min_value=0, max_value=9),
    )
    @settings(max_examples=60, deadline=None)
    def test_visibility_monotone_in_radius(self, r, x, y):
        grid = build_world(open_world())
        small = visible_set(grid, (x, y), VisibilityModel(mode="lv", radius=r))
        big = visible_set(grid, (x, y), VisibilityModel(mode="lv", radius=r + 1))
        assert small <= big <= visible_set(grid, (x, y), VisibilityModel())

    def test_radius_zero_lv_rejected(self):
        with pytest.raises(WorldError):
            VisibilityModel(mode="lv", radius=0)


class TestRespawn:
    def _grid(self):
        spec = open_world(cells={(5, 5): CellKind(kind="food", meal=4.0)}, food_respawn=True)
        return build_world(spec)

    def test_deterministic_for_fixed_seed(self):
        grid = self._grid()
        outs = set()
        for _ in range(2):
            food = dict(grid.foods)
            outs.add(respawn_food(food, grid, (5, 5), substream(7, "respawn")))
        assert len(outs) == 1

    def test_keeps_meal_parameters(self):
        grid = self._grid()
        food = dict(grid.foods)
        pos = respawn_food(food, grid, (5, 5), substream(7, "respawn"))
        assert food[pos].meal == 4.0
        assert (5, 5) not in food

    def test_never_lands_on_start_or_food(self):
        grid = self._grid()
        for seed in range(40):
            food = dict(grid.foods)
            pos = respawn_food(food, grid, (5, 5), substream(seed, "respawn"))
            assert pos != grid.spec.start

    def test_exhausted_board_errors(self):
        # only start and the just-eaten cell are passable
        spec = WorldSpec(width=2, height=1, start=(0, 0),
                         cells={(1, 0): CellKind(kind="food", meal=1.0)},
                         food_respawn=True)
        grid = build_world(spec)
        food = dict(grid.foods)
        with pytest.raises(WorldError, match="no free cell"):
            respawn_food(food, grid, (1, 0), substream(1, "respawn"))

    def test_missing_food_errors(self):
        grid = self._grid()
        with pytest.raises(WorldError):
            respawn_food({}, grid, (5, 5), substream(1, "respawn"))


class TestScenarioFiles:
    @pytest.mark.parametrize("name", all_scenario_names())
    def test_round_trip_bit_identical(self, name):
        spec = scenario_by_name(name)
        blob = json.dumps(serialize_spec(spec), sort_keys=True)
        again = json.dumps(serialize_spec(parse_spec(json.loads(blob))), sort_keys=True)
        assert blob == again

    def test_unknown_fields_rejected(self):
        d = serialize_spec(scenario_by_name("healthy"))
        d["mystery"] = 1
        with pytest.raises(WorldError, match="unknown scenario fields"):
            parse_spec(d)

    def test_weather_and_topography_stubs_rejected(self):
        d = serialize_spec(scenario_by_name("healthy"))
        d["weather"] = {"rain": 1}
        with pytest.raises(WorldError, match="unsupported scenario fields"):
            parse_spec(d)

    def test_unknown_modality_id_errors(self):
        with pytest.raises(ValueError, match="unknown modality"):
            canonical_scenario("procrastination")

    def test_chebyshev(self):
        assert chebyshev((0, 0), (2, 5)) == 5
