"""Detector statistics and predicates.

The edit-distance oracle here is a memoless brute-force enumeration over edit
scripts, written before the production DP and shared with the acceptance
suite; the DP is checked against it exhaustively on small alphabets and on
random move-strings up to length six.
"""

import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from neurogrid.agent import TickRecord, Trace, run_episode
from neurogrid.detectors import (
    MODALITIES,
    DetectorConfig,
    DetectorError,
    detect,
    detect_all,
    levenshtein,
    prefix_edit_fraction,
    window_stats,
)
from neurogrid.scenarios import canonical_scenario, scenario_by_name


def brute_edit_distance(a, b):
    """Plain recursion over insert/delete/substitute; exponential and tiny."""
    if not a:
        return len(b)
    if not b:
        return len(a)
    sub = brute_edit_distance(a[1:], b[1:]) + (a[0] != b[0])
    ins = brute_edit_distance(a, b[1:]) + 1
    delete = brute_edit_distance(a[1:], b) + 1
    return min(sub, ins, delete)


class TestEditDistance:
    def test_exhaustive_binary_alphabet(self):
        words = [w for n in range(5) for w in itertools.product("NE", repeat=n)]
        for a in words:
            for b in words:
                assert levenshtein(a, b) == brute_edit_distance(a, b)

    def test_exhaustive_full_alphabet_short(self):
        words = [w for n in range(4) for w in itertools.product("NESW", repeat=n)]
        for a in words:
            for b in words:
                assert levenshtein(a, b) == brute_edit_distance(a, b)

    @given(
        st.lists(st.sampled_from("NESW"), max_size=6),
        st.lists(st.sampled_from("NESW"), max_size=6),
    )
    @settings(max_examples=300, deadline=None)
    def test_random_move_strings(self, a, b):
        assert levenshtein(tuple(a), tuple(b)) == brute_edit_distance(tuple(a), tuple(b))


class TestPrefixEditFraction:
    def test_identical_prefixes(self):
        assert prefix_edit_fraction("RRUU", "RRUU", 4) == 0.0

    def test_spec_pair(self):
        # oracle: brute enumeration agrees
        assert brute_edit_distance(tuple("RRUU"), tuple("URRU")) == 2
        assert prefix_edit_fraction("RRUU", "URRU", 4) == pytest.approx(0.5)

    def test_single_substitution(self):
        assert prefix_edit_fraction("R", "U", 1) == 1.0

    def test_shorter_plans_truncate_but_divisor_stays(self):
        assert prefix_edit_fraction("NN", "NNEE", 4) == pytest.approx(0.5)

    def test_k_must_be_positive(self):
        with pytest.raises(DetectorError):
            prefix_edit_fraction("N", "N", 0)


def synthetic_trace(d_goals=None, positions=None, actions=None, energies=None,
                    preds=None, n=None):
    n = n or len(d_goals or positions or actions or energies)
    records = []
    pos = (0, 0)
    for i in range(n):
        if positions is not None:
            pos = positions[i]
        elif actions is not None and actions[i] in "NESW":
            dx, dy = {"N": (0, 1), "E": (1, 0), "S": (0, -1), "W": (-1, 0)}[actions[i]]
            pos = (pos[0] + dx, pos[1] + dy) if i else pos
        records.append(TickRecord(
            tick=i, x=pos[0], y=pos[1], h=float(i),
            action=(actions[i] if actions else "E"),
            was_replan=True, plan_len=5, plan_cost=5.0,
            c1=10.0, c2=10.0, near_tie=True, local_first="", global_first="E",
            policy_class="none", w_risk=1.0, w_energy=0.0, w_mem=0.0,
            revealed_count=0,
            d_goal=(d_goals[i] if d_goals else 0.0),
            energy_step=(energies[i] if energies else 1.0),
            risk_step=0.0, governor_decision="plan", override="",
            commit_remaining=0,
            pred_energy=(preds[i] if preds else 1.0),
            target=(99, 99),
        ))
    return Trace("synthetic", 0, records, "max_ticks")


class TestWindowStats:
    def test_progress_rate_telescopes(self):
        t = synthetic_trace(d_goals=[10.0, 9.0, 8.0, 7.0])
        s = window_stats(t, (0, 4))
        assert s.progress_rate == pytest.approx(1.0)

    def test_cycle_period_two(self):
        pos = [(0, 0), (1, 0)] * 5
        t = synthetic_trace(positions=pos, actions=["E", "W"] * 5)
        s = window_stats(t, (0, 10))
        assert s.cycle_period == 2.0

    def test_standing_still_is_not_a_cycle(self):
        pos = [(0, 0)] * 10
        t = synthetic_trace(positions=pos, actions=["none"] * 10)
        s = window_stats(t, (0, 10))
        assert s.cycle_period == 0.0

    def test_rho_energy_ratio(self):
        t = synthetic_trace(energies=[1.2] * 10, preds=[1.0] * 10)
        s = window_stats(t, (0, 10))
        assert s.rho_energy == pytest.approx(1.2)

    def test_planning_execution_ratio_infinite_when_frozen(self):
        t = synthetic_trace(actions=["none"] * 8)
        s = window_stats(t, (0, 8))
        assert math.isinf(s.planning_execution_ratio)

    def test_empty_window_rejected(self):
        t = synthetic_trace(actions=["E"] * 4)
        with pytest.raises(DetectorError):
            window_stats(t, (3, 3))

    def test_translation_invariance(self):
        spec = canonical_scenario("perseveration")
        trace = run_episode(spec, seed=1)
        shifted = Trace(
            trace.scenario_id, trace.seed,
            [TickRecord(**{**r.__dict__, "tick": r.tick + 1000}) for r in trace.records],
            trace.terminal,
        )
        a = window_stats(trace, (5, 25)).values
        b = window_stats(shifted, (5, 25)).values
        assert a == b
        ra = detect("perseveration", trace)
        rb = detect("perseveration", shifted)
        assert rb.window == (ra.window[0] + 1000, ra.window[1] + 1000)
        assert ra.stats == rb.stats


class TestDetect:
    def test_trace_shorter_than_window_errors(self):
        t = synthetic_trace(actions=["E"] * 5)
        with pytest.raises(DetectorError, match="shorter"):
            detect("flipflop", t)

    def test_unknown_modality(self):
        t = synthetic_trace(actions=["E"] * 25)
        with pytest.raises(DetectorError, match="unknown modality"):
            detect("melancholy", t)

    def test_straight_run_fires_nothing(self):
        spec = scenario_by_name("healthy")
        trace = run_episode(spec, seed=11)
        assert all(not r.fired for r in detect_all(trace))

    def test_perseveration_canonical_fires_with_cycle_stat(self):
        trace = run_episode(canonical_scenario("perseveration"), seed=1)
        rep = detect("perseveration", trace)
        assert rep.fired
        assert rep.stats["cycle_period"] == 2.0

    def test_ice_scenario_fires_metric_mismatch_with_rho(self):
        trace = run_episode(canonical_scenario("metric_mismatch"), seed=1)
        rep = detect("metric_mismatch", trace)
        assert rep.fired
        assert rep.stats["rho_energy"] >= 1.25
        # hand-computed: the window holding the crossing has 4 ice entries at
        # factor 4 among 20 unit-energy moves
        assert rep.stats["rho_energy"] == pytest.approx(1.6, abs=0.2)

    def test_report_soundness_recompute(self):
        cfg = DetectorConfig()
        for name in ("perseveration", "paralysis", "corridor_thrash",
                     "metric_mismatch", "belief_incoherence"):
            trace = run_episode(canonical_scenario(name), seed=1)
            rep = detect(name, trace, cfg)
            assert rep.fired
            a = rep.window[0] - trace.records[0].tick
            again = window_stats(trace, (a, a + cfg.H), cfg)
            for key, val in rep.stats.items():
                assert again.values[key] == pytest.approx(val, nan_ok=True)

    def test_report_json_shape(self):
        from neurogrid.detectors import reports_to_json
        import json

        trace = run_episode(canonical_scenario("paralysis"), seed=1)
        blob = reports_to_json(detect_all(trace))
        data = json.loads(blob)
        assert len(data) == 14
        for item in data:
            assert set(item) == {"modality", "fired", "window", "stats"}
            assert list(item["stats"]) == sorted(item["stats"])
