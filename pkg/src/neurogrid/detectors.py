"""Sliding-window statistics and the fourteen behavioural-pathology detectors.

Detectors are pure functions of a Trace: they slide a window over the tick
records, compute a named statistics bundle, and fire when the modality's
predicate holds on some window. Reports embed every statistic the predicate
consulted so a reviewer can re-derive the firing from the raw trace; the
soundness test does exactly that.

Per-tick primitives (reversal flags, module mismatch flags, plan-pair edit
fractions, cycle matches, ...) are computed once per trace and cached, so a
window evaluation is a few numpy slice reductions; the GP destructive-testing
loop audits tens of thousands of episodes through this path.

Traces loaded from interchange CSV lack the rich per-tick fields (plan step
sequences, prediction columns, module rationale gaps); statistics that need
them fall back to neutral values there, which degrades the plan-churn prefix
clause and the belief-incoherence gap clause as documented in the README.
In-process audits always use rich traces.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .agent import Trace

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

_DIR_CODE = {"N": 0, "E": 1, "S": 2, "W": 3}
_POLICY_CODE = {"none": -1, "risky_short": 0, "safe_long": 1, "corridor_A": 2, "corridor_B": 3}


class DetectorError(ValueError):
    pass


@dataclass(frozen=True)
class DetectorConfig:
    # window sizes: the flip window and mismatch-persistence window follow the
    # audit-metric table; everything else is a documented config default.
    H: int = 20
    flip_window: int = 20
    persist_window: int = 50
    eta: float = 0.02               # near-tie band (1-3% range)
    delta_frac: float = 0.01        # negligible improvement, as a fraction of c1
    eps_prog: float = 0.05          # progress threshold per tick
    P_max: int = 3                  # max cycle period
    L_run: int = 4                  # persistence run length
    theta_flip: float = 0.5         # first-step change rate
    theta_edit: float = 0.25        # prefix edit fraction (consumption-aligned)
    theta_mis: float = 0.5          # module mismatch rate
    theta_rev: float = 0.5          # revisit ratio
    theta_pe: float = 3.0           # planning:execution ratio
    theta_pe_soft: float = 2.0
    D_min: int = 3                  # corridor penetration depth
    eps_m: float = 0.25             # metric mismatch margin
    K_p: int = 4                    # plan prefix length compared
    Q_revisit: int = 6              # recent-cell set size
    delta_r: float = 0.1            # rationale gap (config default, not a paper value)
    replan_high: int = 10           # replans per window counted as high
    flip_high: float = 3.0          # heading reversals per flip_window
    alt_high: int = 3               # corridor alternations per window
    policy_flips_high: int = 2
    meander_high: float = 0.35      # turns per cell moved
    rho_margin: float = 0.1
    eps_frontier: float = 0.05     # mean newly revealed cells per tick
    frontier_adv_max: float = 2.0
    near_frac_min: float = 0.5
    progress_baseline: float = 0.5
    lv_reveal_cap: int = 25         # largest single reveal an LV(r<=2) view can add
    stride: int = 1                 # window step (fitness audits may coarsen)

    def __post_init__(self):
        if self.H < self.flip_window:
            raise DetectorError("H must be >= flip_window")
        if self.stride < 1:
            raise DetectorError("stride must be >= 1")
        for name in ("eps_prog", "theta_flip", "theta_edit", "theta_mis",
                     "theta_rev", "theta_pe", "eps_m", "delta_r"):
            if getattr(self, name) < 0:
                raise DetectorError(f"{name} must be >= 0")


@dataclass(frozen=True)
class DetectorReport:
    modality: str
    fired: bool
    window: tuple[int, int]
    stats: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "modality": self.modality,
            "fired": self.fired,
            "window": list(self.window),
            "stats": {k: _jsonable(self.stats[k]) for k in sorted(self.stats)},
        }


def _jsonable(v: float):
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return v


def _run_lengths(mask: np.ndarray) -> np.ndarray:
    """rle[i] = length of the True-run ending at i (0 when mask[i] is False)."""
    out = np.zeros(len(mask), dtype=np.int64)
    run = 0
    for i, v in enumerate(mask):
        run = run + 1 if v else 0
        out[i] = run
    return out


def levenshtein(a, b) -> int:
    """Classic DP edit distance over two sequences."""
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i] + [0] * len(b)
        for j, cb in enumerate(b, 1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb))
        prev = cur
    return prev[-1]


def prefix_edit_fraction(old_steps, new_steps, k_p: int) -> float:
    """Levenshtein distance between the first k_p moves of two plans, divided
    by k_p. Shorter plans are compared at their natural (truncated) length;
    the divisor stays k_p."""
    if k_p < 1:
        raise DetectorError("K_p must be >= 1")
    return levenshtein(tuple(old_steps)[:k_p], tuple(new_steps)[:k_p]) / k_p


class _Arrays:
    """Per-tick primitives for one trace, computed once."""

    def __init__(self, trace: Trace, cfg: DetectorConfig):
        rs = trace.records
        n = len(rs)
        self.n = n
        self.cfg_key = (cfg.K_p, cfg.Q_revisit, cfg.P_max, cfg.eps_m, cfg.delta_frac)
        self.x = np.array([r.x for r in rs], dtype=np.int64)
        self.y = np.array([r.y for r in rs], dtype=np.int64)
        self.h = np.array([r.h for r in rs])
        self.action = np.array([_DIR_CODE.get(r.action, -1) for r in rs], dtype=np.int64)
        self.was_replan = np.array([r.was_replan for r in rs], dtype=bool)
        self.c1 = np.array([r.c1 for r in rs])
        self.near_true = np.array([r.near_tie is True for r in rs], dtype=bool)
        self.near_known = np.array([r.near_tie is not None for r in rs], dtype=bool)
        lf = np.array([_DIR_CODE.get(r.local_first, -1) for r in rs], dtype=np.int64)
        gf = np.array([_DIR_CODE.get(r.global_first, -1) for r in rs], dtype=np.int64)
        self.global_first = gf
        self.policy = np.array([_POLICY_CODE.get(r.policy_class, -1) for r in rs], dtype=np.int64)
        self.w_risk = np.array([r.w_risk for r in rs])
        self.revealed = np.array([r.revealed_count for r in rs], dtype=np.int64)
        self.d_goal = np.array([r.d_goal for r in rs])
        self.energy = np.array([r.energy_step for r in rs])
        gap = np.array([r.rationale_gap for r in rs])
        pred_e = np.array([r.pred_energy for r in rs])
        pred_c = np.array([r.pred_step_cost for r in rs])

        self.is_move = self.action >= 0
        moved = np.zeros(n, dtype=bool)
        for i in range(n):
            if self.is_move[i]:
                moved[i] = i == 0 or (self.x[i] != self.x[i - 1]) or (self.y[i] != self.y[i - 1])
        self.moved = moved

        # per-tick progress toward the current target; pairs spanning a
        # target switch are neutral (meals legitimately reset the distance)
        targets = [r.target for r in rs]
        self.prog = np.zeros(n)
        self.prog_valid = np.zeros(n, dtype=bool)
        for i in range(1, n):
            if targets[i] is not None or targets[i - 1] is not None:
                same = targets[i] == targets[i - 1]
            else:
                # interchange traces carry no target; treat implausible
                # distance jumps as retargets
                same = self.d_goal[i] - self.d_goal[i - 1] <= 1.0
            if same:
                self.prog[i] = self.d_goal[i - 1] - self.d_goal[i]
                self.prog_valid[i] = True

        # heading reversals / turns relative to the previous move attempt
        self.reversal = np.zeros(n, dtype=bool)
        self.turn = np.zeros(n, dtype=bool)
        prev = -1
        for i in range(n):
            if not self.is_move[i]:
                continue
            if prev >= 0:
                self.reversal[i] = self.action[i] == (prev + 2) % 4
                self.turn[i] = self.action[i] != prev
            prev = self.action[i]
        self.rev_with_reveal = self.reversal & (
            (self.revealed > 0) | np.roll(self.revealed > 0, 1)
        )
        if n:
            self.rev_with_reveal[0] = self.reversal[0] & (self.revealed[0] > 0)

        # module disagreement: runs are tick-contiguous, so commitment gaps
        # genuinely break persistence
        self.both_mod = (lf >= 0) & (gf >= 0)
        self.mismatch = self.both_mod & (lf != gf)
        self.mismatch_rle = _run_lengths(self.mismatch)
        self.gap_on_mismatch = np.where(self.mismatch, gap, 0.0)

        # executed first-step choices: what the controller actually opened a
        # planning cycle with (raw planner noise that arbitration absorbed
        # does not count as a choice)
        self.replan_idx = np.where(self.was_replan)[0]
        self.choice_idx = np.where(self.was_replan & self.is_move)[0]
        firsts = self.action[self.choice_idx]
        m = len(firsts)
        self.step1_change = np.zeros(m, dtype=bool)
        for i in range(1, m):
            self.step1_change[i] = firsts[i] != firsts[i - 1]
        self.step1_change_rle = _run_lengths(self.step1_change)
        self.abab_rle = np.zeros(m, dtype=np.int64)
        run = 1
        for i in range(m):
            if i >= 2 and firsts[i] == firsts[i - 2] and firsts[i] != firsts[i - 1]:
                run += 1
            elif i >= 1 and firsts[i] != firsts[i - 1]:
                run = 2
            else:
                run = 1
            self.abab_rle[i] = run

        # consecutive plan-adoption pairs: how much of the intended prefix got
        # rewritten beyond what execution consumed, and what the rewrite
        # bought after paying for progress made
        adopted = [r.adopted_steps for r in rs]
        adopted_cost = np.array([r.adopted_cost for r in rs])
        self.adopt_idx = np.array(
            [i for i in range(n) if adopted[i] is not None], dtype=np.int64
        )
        paid_step = np.where(moved & np.isfinite(pred_c), pred_c, 0.0)
        paid_csum = np.concatenate(([0.0], np.cumsum(paid_step)))
        moved_csum = np.concatenate(([0], np.cumsum(moved)))
        k_pairs = max(0, len(self.adopt_idx) - 1)
        self.pair_tick = self.adopt_idx[1:] if k_pairs else np.zeros(0, dtype=np.int64)
        edits = np.full(k_pairs, np.nan)
        dc_small = np.zeros(k_pairs, dtype=bool)
        dc_valid = np.zeros(k_pairs, dtype=bool)
        improve = np.zeros(k_pairs)
        for k in range(k_pairs):
            i_prev, i_new = self.adopt_idx[k], self.adopt_idx[k + 1]
            ps, cs = adopted[i_prev], adopted[i_new]
            if ps is not None and cs is not None:
                consumed = int(moved_csum[i_new] - moved_csum[i_prev])
                expected = tuple(ps)[consumed:]
                edits[k] = prefix_edit_fraction(expected, cs, cfg.K_p)
            c_prev, c_new = adopted_cost[i_prev], adopted_cost[i_new]
            paid = float(paid_csum[i_new] - paid_csum[i_prev])
            adj = c_new - (c_prev - paid)
            if math.isfinite(adj):
                dc_valid[k] = True
                dc_small[k] = abs(adj) < cfg.delta_frac * max(c_prev, 1e-9)
                improve[k] = max(0.0, -adj)
        self.pair_edit = edits
        self.pair_dc_small = dc_small
        self.pair_dc_valid = dc_valid
        self.pair_improve = improve

        # realized vs predicted energy
        self.pred_energy = np.where(self.is_move, np.where(pred_e > 0, pred_e, 1.0), 0.0)
        self.real_energy = np.where(self.is_move, self.energy, 0.0)
        exceed = self.is_move & (self.real_energy >= self.pred_energy * (1.0 + cfg.eps_m))
        self.exceed_rle = _run_lengths(exceed)
        self.inconsistent = self.is_move & (np.abs(self.real_energy - self.pred_energy) > 0.1)

        # positional cycles: rle of pos[i] == pos[i-P]
        self.cycle_rle = {}
        for p in range(2, cfg.P_max + 1):
            match = np.zeros(n, dtype=bool)
            if n > p:
                match[p:] = (self.x[p:] == self.x[:-p]) & (self.y[p:] == self.y[:-p])
            self.cycle_rle[p] = _run_lengths(match)

        # revisits of the recent distinct-cell set (full episode history)
        self.revisit = np.zeros(n, dtype=bool)
        recent: list = []
        for i in range(n):
            pos = (self.x[i], self.y[i])
            if moved[i]:
                self.revisit[i] = pos in recent
            if not recent or recent[-1] != pos:
                if pos in recent:
                    recent.remove(pos)
                recent.append(pos)
                if len(recent) > cfg.Q_revisit:
                    recent.pop(0)

        # policy-class flips and corridor penetration depth
        self.policy_flip = np.zeros(n, dtype=bool)
        self.corridor_alt = np.zeros(n, dtype=bool)
        self.flip_dw = np.zeros(n, dtype=bool)
        self.flip_reveal = np.zeros(n, dtype=bool)
        self.depth = np.zeros(n)
        lastp = -2
        run_start = 0
        for i in range(n):
            p = self.policy[i]
            if p >= 0 and lastp >= 0 and p != lastp:
                self.policy_flip[i] = True
                self.corridor_alt[i] = {p, lastp} == {2, 3}
                if i > 0:
                    self.flip_dw[i] = abs(self.w_risk[i] - self.w_risk[i - 1]) > 1e-9
                self.flip_reveal[i] = self.revealed[i] > 0
            if p != lastp:
                run_start = i
                lastp = p
            if p in (2, 3):
                self.depth[i] = max(
                    abs(int(self.x[i]) - int(self.x[run_start])),
                    abs(int(self.y[i]) - int(self.y[run_start])),
                )

        self.max_reveal = float(np.max(self.revealed)) if n else 0.0
        self._csum = {}

    def csum(self, name: str, values: np.ndarray) -> np.ndarray:
        out = self._csum.get(name)
        if out is None:
            out = np.concatenate(([0], np.cumsum(values, dtype=np.float64)))
            self._csum[name] = out
        return out


def _arrays(trace: Trace, cfg: DetectorConfig) -> _Arrays:
    a = getattr(trace, "_arrays_cache", None)
    key = (cfg.K_p, cfg.Q_revisit, cfg.P_max, cfg.eps_m, cfg.delta_frac)
    if a is None or a.n != len(trace.records) or a.cfg_key != key:
        a = _Arrays(trace, cfg)
        trace._arrays_cache = a
    return a


@dataclass
class StatBundle:
    values: dict[str, float] = field(default_factory=dict)

    def __getattr__(self, name: str) -> float:
        try:
            return self.values[name]
        except KeyError:
            raise AttributeError(name) from None


def _window_max_run(rle: np.ndarray, a: int, b: int) -> int:
    if b <= a:
        return 0
    seg = rle[a:b]
    clip = np.minimum(seg, np.arange(1, b - a + 1))
    return int(np.max(clip)) if len(clip) else 0


def window_stats(trace: Trace, window: tuple[int, int], cfg: Optional[DetectorConfig] = None) -> StatBundle:
    """Statistics bundle over the half-open record-index window [a, b)."""
    cfg = cfg or DetectorConfig()
    arr = _arrays(trace, cfg)
    a, b = window
    if not (0 <= a < b <= arr.n):
        raise DetectorError(f"window {window} outside trace of length {arr.n}")
    n = b - a
    s: dict[str, float] = {}

    def wsum(name, values) -> float:
        c = arr.csum(name, values)
        return float(c[b] - c[a])

    moves = wsum("moved", arr.moved)
    attempts = wsum("is_move", arr.is_move)
    replans = wsum("was_replan", arr.was_replan)
    s["moves"] = moves
    s["replan_count"] = replans
    s["freeze_ticks"] = n - attempts
    s["idle_frac"] = (n - attempts) / n

    reversals = wsum("reversal", arr.reversal)
    s["flip_rate"] = reversals * (cfg.flip_window / n)
    turns = wsum("turn", arr.turn)
    s["meander_index"] = turns / moves if moves else 0.0
    co = wsum("rev_reveal", arr.rev_with_reveal)
    s["reversal_reveal_cooccurrence"] = co / reversals if reversals else 0.0

    # pairs (i-1, i) for i in [a+1, b), skipping target switches
    pv = arr.csum("prog_valid", arr.prog_valid.astype(np.float64))
    pg = arr.csum("prog", arr.prog)
    valid = float(pv[b] - pv[a + 1])
    s["progress_rate"] = float(pg[b] - pg[a + 1]) / valid if valid > 0 else 0.0
    s["net_displacement_rate"] = (
        max(abs(int(arr.x[b - 1]) - int(arr.x[a])), abs(int(arr.y[b - 1]) - int(arr.y[a])))
        / (n - 1) if n >= 2 else 0.0
    )

    # executed first-step choice statistics
    lo = int(np.searchsorted(arr.choice_idx, a))
    hi = int(np.searchsorted(arr.choice_idx, b))
    changes = arr.step1_change[lo + 1:hi]
    s["step1_change_rate"] = float(np.mean(changes)) if len(changes) else 0.0
    s["step1_flip_run"] = float(_window_max_run(arr.step1_change_rle[lo + 1:hi], 0, max(0, hi - lo - 1)))
    ab = arr.abab_rle[lo:hi]
    if len(ab):
        clip = np.minimum(ab, np.arange(1, len(ab) + 1))
        s["abab_run"] = float(np.max(clip))
    else:
        s["abab_run"] = 0.0

    near_known = wsum("near_known", arr.near_known)
    s["near_frac"] = wsum("near_true", arr.near_true) / near_known if near_known else 0.0

    mism = wsum("mismatch", arr.mismatch)
    s["first_step_disagreement"] = mism / n
    s["mismatch_run"] = float(_window_max_run(arr.mismatch_rle, a, b))
    s["rationale_gap_mean"] = wsum("gap_mm", arr.gap_on_mismatch) / mism if mism else 0.0

    cycle = 0
    for p in sorted(arr.cycle_rle):
        run = _window_max_run(arr.cycle_rle[p], a, b)
        if run >= 3 * p and _cycle_distinct(arr, a, b, p):
            cycle = p
            break
    s["cycle_period"] = float(cycle)
    s["revisit_ratio"] = wsum("revisit", arr.revisit) / moves if moves else 0.0

    s["planning_execution_ratio"] = (
        replans / moves if moves else (math.inf if replans else 0.0)
    )

    pred_sum = wsum("pred_energy", arr.pred_energy)
    real_sum = wsum("real_energy", arr.real_energy)
    s["rho_energy"] = real_sum / pred_sum if pred_sum > 0 else 1.0
    s["rho_time"] = attempts / moves if moves else 1.0
    s["mismatch_persist"] = float(_window_max_run(arr.exceed_rle, a, b))
    s["consistency_fail"] = 1.0 if wsum("inconsistent", arr.inconsistent) > 0 else 0.0

    plo = int(np.searchsorted(arr.pair_tick, a))
    phi = int(np.searchsorted(arr.pair_tick, b))
    edits = arr.pair_edit[plo:phi]
    edits = edits[~np.isnan(edits)]
    s["prefix_edit_mean"] = float(np.mean(edits)) if len(edits) else 0.0
    valid = arr.pair_dc_valid[plo:phi]
    nv = int(np.count_nonzero(valid))
    s["small_dc_frac"] = float(np.count_nonzero(arr.pair_dc_small[plo:phi])) / nv if nv else 0.0
    imp = arr.pair_improve[plo:phi][valid]
    s["median_improvement_per_replan"] = float(np.median(imp)) if len(imp) else 0.0
    c1w = arr.c1[a:b]
    c1w = c1w[np.isfinite(c1w)]
    s["delta_abs"] = cfg.delta_frac * float(np.median(c1w)) if len(c1w) else 0.0

    flips = wsum("policy_flip", arr.policy_flip)
    s["policy_flip_count"] = flips
    s["corridor_alternations"] = wsum("corridor_alt", arr.corridor_alt)
    s["weight_delta_correlation"] = wsum("flip_dw", arr.flip_dw) / flips if flips else 0.0
    s["reveal_correlation"] = wsum("flip_reveal", arr.flip_reveal) / flips if flips else 0.0
    s["penetration_depth"] = float(np.max(arr.depth[a:b]))

    s["frontier_visit_rate"] = wsum("revealed", arr.revealed.astype(np.float64)) / n
    s["reveals_total"] = wsum("revealed", arr.revealed.astype(np.float64))
    s["h_slope"] = float(arr.h[b - 1] - arr.h[a]) / max(1, n - 1)
    s["max_reveal"] = arr.max_reveal
    return StatBundle(s)


def _cycle_distinct(arr: _Arrays, a: int, b: int, p: int) -> bool:
    rle = arr.cycle_rle[p]
    for i in range(b - 1, a - 1, -1):
        run = min(rle[i], i - a + 1)
        if run >= 3 * p:
            seg = {(arr.x[j], arr.y[j]) for j in range(i - p + 1, i + 1)}
            if len(seg) >= 2:
                return True
    return False


# --- modality predicates ---------------------------------------------------------

def _fire(modality: str, s: StatBundle, cfg: DetectorConfig,
          arrival_delay: Optional[float]) -> bool:
    v = s.values
    if modality == "flipflop":
        clauses = [
            v["step1_change_rate"] > cfg.theta_flip and v["near_frac"] >= cfg.near_frac_min,
            v["abab_run"] >= 4,
            v["prefix_edit_mean"] > cfg.theta_edit and v["small_dc_frac"] >= 0.5,
            v["progress_rate"] < cfg.eps_prog and v["replan_count"] >= cfg.replan_high,
        ]
        return sum(clauses) >= 2
    if modality == "plan_churn":
        return (
            v["replan_count"] >= cfg.replan_high
            and v["prefix_edit_mean"] > cfg.theta_edit
            and v["small_dc_frac"] >= 0.5
        )
    if modality == "perseveration":
        return (
            2 <= v["cycle_period"] <= cfg.P_max
            and v["progress_rate"] < cfg.eps_prog
            and v["revisit_ratio"] > cfg.theta_rev
        )
    if modality == "paralysis":
        return (
            v["replan_count"] >= cfg.replan_high
            and v["moves"] == 0
            and v["progress_rate"] < cfg.eps_prog
            and v["reveals_total"] == 0
        )
    if modality == "hypervigilance":
        return (
            v["planning_execution_ratio"] > cfg.theta_pe
            and v["near_frac"] >= cfg.near_frac_min
            and v["progress_rate"] < cfg.eps_prog
        )
    if modality == "futile_search":
        return (
            v["progress_rate"] < cfg.eps_prog
            and v["meander_index"] > cfg.meander_high
            and v["rho_energy"] >= 1.0 + cfg.rho_margin
            and v["moves"] >= v["freeze_ticks"]
        )
    if modality == "belief_incoherence":
        return (
            v["first_step_disagreement"] > cfg.theta_mis
            and v["mismatch_run"] >= cfg.L_run
            and v["rationale_gap_mean"] >= cfg.delta_r
        )
    if modality == "tiebreak_thrash":
        # an A<->B alternating run of L_run flips between the same two steps
        return (
            v["abab_run"] >= cfg.L_run + 1
            and v["near_frac"] >= cfg.near_frac_min
            and v["progress_rate"] >= cfg.eps_prog
        )
    if modality == "corridor_thrash":
        return (
            v["corridor_alternations"] >= cfg.alt_high
            and v["penetration_depth"] < cfg.D_min
            and v["progress_rate"] < cfg.eps_prog
            and v["near_frac"] >= 0.3
        )
    if modality == "optimality_compulsion":
        base = (
            v["replan_count"] >= cfg.replan_high
            and v["median_improvement_per_replan"] < max(v["delta_abs"], 1e-12)
            and v["small_dc_frac"] >= 0.5
        )
        if not base:
            return False
        if arrival_delay is not None:
            return arrival_delay > 0
        return v["planning_execution_ratio"] > cfg.theta_pe_soft
    if modality == "metric_mismatch":
        return (
            v["mismatch_persist"] >= cfg.L_run
            and v["rho_energy"] >= 1.0 + cfg.eps_m
            and v["consistency_fail"] > 0
        )
    if modality == "policy_oscillation":
        return (
            v["policy_flip_count"] >= cfg.policy_flips_high
            and v["weight_delta_correlation"] > v["reveal_correlation"]
            and v["progress_rate"] < cfg.progress_baseline
        )
    if modality == "myopic_pingpong":
        return (
            v["flip_rate"] >= cfg.flip_high
            and v["reversal_reveal_cooccurrence"] > 0.5
            and v["frontier_visit_rate"] < cfg.frontier_adv_max
            and v["net_displacement_rate"] < cfg.progress_baseline
        )
    if modality == "exploration_paralysis":
        return (
            v["frontier_visit_rate"] < cfg.eps_frontier
            and v["h_slope"] > 0
            and v["replan_count"] >= cfg.replan_high
            and v["progress_rate"] < cfg.eps_prog
            and v["max_reveal"] <= cfg.lv_reveal_cap
        )
    raise DetectorError(f"unknown modality {modality!r}")


def _arrival_tick(trace: Trace, cfg: DetectorConfig) -> Optional[int]:
    arr = _arrays(trace, cfg)
    for i in np.where(arr.d_goal == 0.0)[0]:
        if arr.moved[i]:
            return int(i)
    return None


def _windows(n: int, cfg: DetectorConfig):
    last = n - cfg.H
    for a in range(0, last + 1, cfg.stride):
        yield a
    if cfg.stride > 1 and last % cfg.stride != 0:
        yield last


def detect(
    modality: str,
    trace: Trace,
    cfg: Optional[DetectorConfig] = None,
    baseline: Optional[Trace] = None,
) -> DetectorReport:
    """Slide the window over the trace; fire on the first window where the
    modality predicate holds. `baseline` (a satisficing paired run of the same
    scenario/seed) feeds the arrival-delay clause of optimality_compulsion."""
    reports = detect_many((modality,), trace, cfg, baseline)
    return reports[0]


def detect_many(
    modalities,
    trace: Trace,
    cfg: Optional[DetectorConfig] = None,
    baseline: Optional[Trace] = None,
) -> list[DetectorReport]:
    cfg = cfg or DetectorConfig()
    for m in modalities:
        if m not in MODALITIES:
            raise DetectorError(f"unknown modality {m!r}")
    n = len(trace.records)
    if n < cfg.H:
        raise DetectorError(f"trace length {n} shorter than window {cfg.H}")

    arrival_delay = None
    if "optimality_compulsion" in modalities and baseline is not None:
        mine = _arrival_tick(trace, cfg)
        theirs = _arrival_tick(baseline, cfg)
        if theirs is not None:
            arrival_delay = float((mine if mine is not None else n) - theirs)

    tick0 = trace.records[0].tick
    pending = {m: None for m in modalities}
    remaining = set(modalities)
    first_stats: Optional[StatBundle] = None
    for a in _windows(n, cfg):
        s = window_stats(trace, (a, a + cfg.H), cfg)
        if first_stats is None:
            first_stats = s
        for m in list(remaining):
            if _fire(m, s, cfg, arrival_delay):
                stats = dict(s.values)
                if m == "optimality_compulsion" and arrival_delay is not None:
                    stats["arrival_delay"] = arrival_delay
                pending[m] = DetectorReport(m, True, (tick0 + a, tick0 + a + cfg.H - 1), stats)
                remaining.discard(m)
        if not remaining:
            break
    out = []
    for m in modalities:
        if pending[m] is not None:
            out.append(pending[m])
            continue
        stats = dict(first_stats.values) if first_stats else {}
        if m == "optimality_compulsion" and arrival_delay is not None:
            stats["arrival_delay"] = arrival_delay
        out.append(DetectorReport(m, False, (tick0, tick0 + cfg.H - 1), stats))
    return out


def detect_all(
    trace: Trace,
    cfg: Optional[DetectorConfig] = None,
    baseline: Optional[Trace] = None,
) -> list[DetectorReport]:
    return detect_many(MODALITIES, trace, cfg, baseline)


def reports_to_json(reports: list[DetectorReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=1, sort_keys=True) + "\n"
