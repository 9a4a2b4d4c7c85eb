"""Acceptance suite: ten criteria, one test each, one pass/fail line printed
per criterion. Criterion 8 runs the destructive-testing harness at its full
pinned scale and dominates the suite's runtime (several minutes on two cores).

Every trace produced while checking criteria 1-9 is registered together with
its (scenario file, governor, seed) triple; criterion 10 replays each one
through the CLI and demands byte-identical output.
"""

import itertools
import json
import math
from pathlib import Path

import numpy as np
import pytest

from genomes import corridor_world_genome, inert_decorations, pocket_world_genome
from neurogrid.agent import run_episode, trace_to_csv, write_trace_csv
from neurogrid.cli import EXIT_OK, main as cli_main
from neurogrid.detectors import (
    MODALITIES,
    DetectorConfig,
    detect,
    detect_all,
    levenshtein,
    prefix_edit_fraction,
    window_stats,
)
from neurogrid.evolver import (
    BankEntry,
    EvoConfig,
    Fitness,
    Genome,
    ScenarioBank,
    decode,
    evolve,
    is_one_minimal,
    random_search,
    shrink,
    synthesize_governor,
)
from neurogrid.governor import PRESETS, smooth_and_hysteresis
from neurogrid.lawmetrics import law_scores, oracle_episode_cost, oracle_route, realized_episode_cost
from neurogrid.agent import PlannerConfig
from neurogrid.scenarios import canonical_scenario, scenario_by_name
from neurogrid.world import save_spec

EPS_REGRET = 0.05

_REPLAYS: list[tuple[str, str, int, str]] = []   # scenario file, governor, seed, trace file
_DIR: Path = None


@pytest.fixture(scope="module", autouse=True)
def _setup_dir(tmp_path_factory):
    global _DIR
    _DIR = tmp_path_factory.mktemp("acceptance")
    yield


def _register(spec, governor: str, seed: int, trace) -> None:
    idx = len(_REPLAYS)
    spec_path = _DIR / f"spec-{idx:03d}-{spec.name}.json"
    trace_path = _DIR / f"trace-{idx:03d}-{spec.name}-{governor}-{seed}.csv"
    save_spec(spec, spec_path)
    write_trace_csv(trace, trace_path)
    _REPLAYS.append((str(spec_path), governor, seed, str(trace_path)))


def _run(spec, governor, seed):
    trace = run_episode(spec, governor=None if governor == "off" else governor, seed=seed)
    _register(spec, governor, seed, trace)
    return trace


def _ok(n: int, text: str) -> None:
    print(f"\nACCEPTANCE {n:02d} PASS {text}")


def test_01_perseveration_exactness():
    spec = canonical_scenario("perseveration")
    off = _run(spec, "off", 1)
    pos = [(r.x, r.y) for r in off.records]
    first_a = pos.index((3, 1))
    tail = pos[first_a:]
    expected = [(3, 1), (2, 1)] * (len(tail) // 2 + 1)
    assert tail == expected[: len(tail)], "deterministic A,B,A,B orbit"
    assert off.terminal == "max_ticks"

    cured = _run(spec, "perseveration", 1)
    cpos = [(r.x, r.y) for r in cured.records]
    for i in range(len(cpos) - 3):
        w = cpos[i:i + 4]
        assert not (w[0] == w[2] and w[1] == w[3] and w[0] != w[1]), \
            "no period-2 cycle survives more than 2 ticks"
    oracle = oracle_episode_cost(spec)
    reg = realized_episode_cost(cured, spec) - oracle
    assert reg <= EPS_REGRET * oracle + 1e-9
    _ok(1, f"pocket orbit reproduced and broken; regret {reg:.3f} <= 5% of {oracle:.2f}")


def test_02_targeted_firing_matrix():
    for m in MODALITIES:
        spec = canonical_scenario(m)
        for seed in (1, 2, 3):
            trace = _run(spec, "off", seed) if seed == 1 else run_episode(spec, seed=seed)
            fired = {r.modality for r in detect_all(trace) if r.fired}
            assert m in fired, f"{m} must fire its own detector (seed {seed})"
    healthy = scenario_by_name("healthy")
    for seed in range(100):
        trace = run_episode(healthy, seed=seed)
        fired = [r.modality for r in detect_all(trace) if r.fired]
        assert not fired, f"healthy world fired {fired} on seed {seed}"
    _register(healthy, "off", 0, run_episode(healthy, seed=0))
    _ok(2, "all 14 canonical scenarios fire their detector; healthy silent on 100 seeds")


def test_03_cure_matrix():
    rows = []
    for m in MODALITIES:
        spec = canonical_scenario(m)
        cured = _run(spec, m, 1)
        rep = detect(m, cured)
        assert not rep.fired, f"{m} detector must fall silent under its preset"
        oracle = oracle_episode_cost(spec)
        reg = realized_episode_cost(cured, spec) - oracle
        assert reg <= EPS_REGRET * oracle + 1e-9, f"{m} regret {reg} vs oracle {oracle}"
        rows.append(f"{m}:{reg / oracle:.1%}")
    _ok(3, "every lever preset silences its modality at <=5% regret "
           f"({', '.join(rows[:4])}, ...)")


def test_04_phobia_reproduction():
    spec = scenario_by_name("phobia")
    seeded = {(x, y) for (x, y, _) in spec.seasoning.memory_seed}
    trace = _run(spec, "off", 3)
    path = [(r.x, r.y) for r in trace.records]
    assert not any(p in seeded for p in path), "realized path avoids remembered cells"
    ls = law_scores(trace, spec)
    assert ls.detour_inflation > 0
    first_food = next(p for p in path if p in ((7, 2), (7, 7)))
    assert first_food == (7, 7), "aversion re-targets the farther food"

    free = run_episode(spec, planner_cfg=PlannerConfig(memory_off=True), seed=3)
    oracle = oracle_route(spec)
    moves = 0
    prev = spec.start
    for r in free.records:
        if (r.x, r.y) == oracle.target:
            moves += 1
            break
        if r.action != "none" and (r.x, r.y) != prev:
            moves += 1
        prev = (r.x, r.y)
    assert moves == len(oracle.steps), "memory-free path length equals the oracle optimum"
    _ok(4, f"phobic detour {ls.detour_inflation:.0f}% with retargeting; "
           f"memory off recovers the {len(oracle.steps)}-step optimum")


def test_05_oracle_equivalences():
    # route costs: production sweep vs the independent heap Dijkstra
    from test_planner import dijkstra_oracle, simple_view
    from neurogrid.planner import plan_path
    from neurogrid.world import CellKind, WorldSpec

    rng = np.random.default_rng(202)
    agreed = 0
    for _ in range(200):
        w, h = int(rng.integers(3, 13)), int(rng.integers(3, 13))
        cells = {}
        for x in range(w):
            for y in range(h):
                r = rng.random()
                if r < 0.15 and (x, y) not in ((0, 0), (w - 1, h - 1)):
                    cells[(x, y)] = CellKind(kind="rock")
                elif r < 0.55:
                    cells[(x, y)] = CellKind(kind="risk_band", risk=float(rng.uniform(0, 2)))
        spec = WorldSpec(width=w, height=h, start=(0, 0), cells=cells)
        _, view = simple_view(spec)
        plan = plan_path(view, (0, 0), (w - 1, h - 1))
        oracle = dijkstra_oracle(view.model_cost, view.blocked, (0, 0), (w - 1, h - 1))
        if plan is None:
            assert math.isinf(oracle)
        else:
            assert plan.c_total == pytest.approx(oracle, abs=1e-9)
            agreed += 1
    assert agreed >= 120

    # prefix edit fraction vs memoless brute-force enumeration
    from test_detectors import brute_edit_distance

    words2 = [w for n in range(5) for w in itertools.product("NE", repeat=n)]
    for a in words2:
        for b in words2:
            assert levenshtein(a, b) == brute_edit_distance(a, b)
    rng2 = np.random.default_rng(7)
    for _ in range(300):
        a = tuple(rng2.choice(list("NESW"), size=int(rng2.integers(0, 7))))
        b = tuple(rng2.choice(list("NESW"), size=int(rng2.integers(0, 7))))
        assert prefix_edit_fraction(a, b, 6) == brute_edit_distance(a[:6], b[:6]) / 6
    _ok(5, f"sweep == Dijkstra on {agreed} reachable random grids; "
           "prefix edits match brute enumeration")


def test_06_metric_mismatch_closure():
    spec = canonical_scenario("metric_mismatch")
    off = _run(spec, "off", 1)
    cfg = DetectorConfig()
    sustained = max(
        window_stats(off, (a, a + cfg.H), cfg).values["rho_energy"]
        for a in range(len(off.records) - cfg.H + 1)
    )
    rep = detect("metric_mismatch", off, cfg)
    assert rep.fired and rep.stats["rho_energy"] >= 1.25
    assert sustained >= 1.25

    cured = _run(spec, "metric_mismatch", 1)
    cal_tick = next(
        (r.tick for r in cured.records if r.pred_energy > 1.0), None
    )
    assert cal_tick is not None, "calibration must engage"
    n = len(cured.records)
    closed = None
    for a in range(n - cfg.H + 1):
        s = window_stats(cured, (a, a + cfg.H), cfg)
        if 0.9 <= s.values["rho_energy"] <= 1.1:
            closed = a + cfg.H - 1
            break
    assert closed is not None and closed <= cal_tick + 30, \
        f"rho back to [0.9,1.1] by tick {closed} (calibrated at {cal_tick})"
    assert not detect("metric_mismatch", cured, cfg).fired
    _ok(6, f"pre-calibration rho {sustained:.2f} >= 1.25; calibrated at tick "
           f"{cal_tick}, ratio within [0.9,1.1] by tick {closed}")


def test_07_hysteresis_and_smoothing():
    signal = [2.6 + 0.25 * (-1) ** i for i in range(60)]
    smoothed, cls, flips = signal[0], "risky_short", 0
    for w in signal:
        smoothed, new = smooth_and_hysteresis(w, smoothed, cls, 2.2, 3.2, 0.3)
        flips += new != cls
        cls = new
    assert flips == 0

    crossings = flips_nohyst = 0
    smoothed, cls = signal[0], "risky_short"
    prev_side = signal[0] > 2.6
    for w in signal:
        smoothed, new = smooth_and_hysteresis(w, smoothed, cls, 2.6 - 1e-12, 2.6, 1.0)
        flips_nohyst += new != cls
        cls = new
        side = w > 2.6
        crossings += side != prev_side
        prev_side = side
    assert flips_nohyst >= crossings - 1

    spec = canonical_scenario("policy_oscillation")
    off = _run(spec, "off", 1)
    on = _run(spec, "policy_oscillation", 1)

    def class_flips(trace):
        flips = 0
        last = None
        for r in trace.records:
            if r.policy_class in ("risky_short", "safe_long"):
                if last is not None and r.policy_class != last:
                    flips += 1
                last = r.policy_class
        return flips

    assert class_flips(off) >= 2
    assert class_flips(on) == 0
    _ok(7, f"EMA+band: 0 flips inside the band vs {flips_nohyst} without "
           f"hysteresis; scenario flips {class_flips(off)} -> 0 under the preset")


def test_08_evolver_at_scale():
    wins = 0
    pairs = []
    bank_for_later = None
    for master in range(10):
        cfg = EvoConfig(pop=32, generations=20, seeds_per_genome=3, master_seed=master)
        res = evolve(cfg)
        seq = res.best_per_generation
        assert all(b >= a for a, b in zip(seq, seq[1:])), "elitism monotonicity"
        assert len(seq) == 21
        top = res.bank.entries[0]
        assert top.fitness.fired, "top bank entry fires at least one detector"
        _, rs_fit = random_search(cfg)
        wins += res.best_fitness.scalar >= rs_fit.scalar
        pairs.append((res.best_fitness.scalar, rs_fit.scalar))
        if bank_for_later is None:
            bank_for_later = res.bank
    assert wins >= 8, f"evolve must beat equal-budget random search on >=8/10 ({pairs})"

    genome = Genome(pocket_world_genome().genes + inert_decorations())
    entry = BankEntry("shrink-case", genome, decode(genome), Fitness(valid=True), seeds=(0, 1))
    small = shrink(entry, "perseveration")
    assert len(small.genes) <= len(genome.genes) - len(inert_decorations())
    assert is_one_minimal(small, "perseveration", entry.seeds)

    evolved_top = bank_for_later.entries[0]
    target = evolved_top.fitness.fired[0]
    small2 = shrink(evolved_top, target)
    assert is_one_minimal(small2, target, evolved_top.seeds)
    _ok(8, f"evolve beat random search {wins}/10; shrink outputs 1-minimal "
           f"(constructed case and evolved {target} entry)")


def test_09_governor_synthesis():
    entries = []
    for i, g in enumerate((pocket_world_genome(), corridor_world_genome())):
        spec = decode(g)
        entries.append(BankEntry(f"entry-{i:03d}", g, spec, Fitness(valid=True), seeds=(1,)))
        trace = run_episode(spec, seed=1)
        fired = {r.modality for r in detect_all(trace) if r.fired}
        assert ("perseveration" if i == 0 else "corridor_thrash") in fired
    bank = ScenarioBank(entries)
    result = synthesize_governor(bank, pop=12, generations=5, master_seed=0)
    assert result.feasible, "synthesized governor keeps regret within bound on every entry"
    assert result.worst_relative_regret <= EPS_REGRET + 1e-9
    assert result.total_neurosis <= result.default_total_neurosis
    _ok(9, f"synthesis feasible (worst regret {result.worst_relative_regret:.1%}), "
           f"aggregate score {result.total_neurosis:.2f} <= default "
           f"{result.default_total_neurosis:.2f}")


def test_10_replay_everything():
    assert _REPLAYS, "earlier criteria must have registered traces"
    for spec_path, governor, seed, trace_path in _REPLAYS:
        code = cli_main([
            "replay", "--trace", trace_path, "--scenario", spec_path,
            "--seed", str(seed), "--governor", governor,
        ])
        assert code == EXIT_OK, f"replay mismatch for {trace_path}"
    _ok(10, f"{len(_REPLAYS)} traces replayed byte-identically through the CLI")
