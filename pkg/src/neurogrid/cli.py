"""Experiment runner: scenario emission, episode runs, detection, evolution,
shrinking, governor synthesis, counterfactual probes, and replay verification.

Every subcommand prints its effective configuration (defaults resolved) as a
single JSON line before acting, so any run can be reproduced from its output.
Exit codes: 0 success, 1 usage, 2 invalid input file, 3 replay mismatch,
4 detector fired under --gate.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .agent import read_trace_csv, run_episode, trace_to_csv, write_trace_csv
from .detectors import MODALITIES, DetectorConfig, detect_all, detect_many, reports_to_json
from .evolver import (
    EvoConfig,
    ScenarioBank,
    counterfactual_trace,
    evolve,
    is_one_minimal,
    shrink,
    synthesize_governor,
)
from .governor import PRESETS, GovernorConfig
from .lawmetrics import law_scores, scores_to_json
from .scenarios import all_scenario_names, scenario_by_name
from .world import WorldError, load_spec, save_spec

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BAD_INPUT = 2
EXIT_REPLAY_MISMATCH = 3
EXIT_GATE_FIRED = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_BAD_INPUT):
        super().__init__(message)
        self.code = code


def _echo_config(command: str, args: dict) -> None:
    print(json.dumps({"command": command, "config": args}, sort_keys=True))


def _resolve_governor(label: str):
    if label in (None, "off"):
        return None
    if label in PRESETS:
        return label
    path = Path(label)
    if path.exists():
        try:
            return GovernorConfig.from_dict(json.loads(path.read_text()))
        except (ValueError, KeyError, TypeError) as exc:
            raise CliError(f"bad governor file {label}: {exc}")
    raise CliError(f"unknown governor preset or file: {label}")


def _load_scenario(path: str):
    try:
        return load_spec(path)
    except (OSError, json.JSONDecodeError, WorldError) as exc:
        raise CliError(f"bad scenario file {path}: {exc}")


def _cmd_scenario(args) -> int:
    _echo_config("scenario", {"modality": args.modality, "out": args.out})
    try:
        spec = scenario_by_name(args.modality)
    except ValueError as exc:
        raise CliError(str(exc))
    save_spec(spec, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_run(args) -> int:
    gov = _resolve_governor(args.governor)
    _echo_config("run", {
        "scenario": args.scenario, "seed": args.seed, "governor": args.governor,
        "trace": args.trace, "scores": args.scores,
    })
    spec = _load_scenario(args.scenario)
    trace = run_episode(spec, governor=gov, seed=args.seed)
    if args.trace:
        write_trace_csv(trace, args.trace)
    if args.scores:
        cfg = DetectorConfig()
        reports = detect_all(trace, cfg) if len(trace.records) >= cfg.H else []
        scores = law_scores(trace, spec, reports=reports)
        with open(args.scores, "w", encoding="utf-8") as fh:
            fh.write(scores_to_json(scores))
    print(f"terminal={trace.terminal} ticks={len(trace.records)}")
    return EXIT_OK


def _cmd_detect(args) -> int:
    _echo_config("detect", {
        "trace": args.trace, "modality": args.modality, "report": args.report,
        "gate": args.gate, "scenario": args.scenario, "seed": args.seed,
        "governor": args.governor,
    })
    if args.scenario is not None:
        # re-simulate to recover the rich trace (plan steps, predictions)
        spec = _load_scenario(args.scenario)
        trace = run_episode(spec, governor=_resolve_governor(args.governor), seed=args.seed)
    else:
        try:
            trace = read_trace_csv(args.trace)
        except (OSError, ValueError) as exc:
            raise CliError(f"bad trace file {args.trace}: {exc}")
    names = MODALITIES if args.modality == "all" else (args.modality,)
    try:
        reports = detect_many(names, trace)
    except ValueError as exc:
        raise CliError(str(exc))
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(reports_to_json(reports))
    fired = [r.modality for r in reports if r.fired]
    print(f"fired={','.join(fired) if fired else 'none'}")
    if args.gate and fired:
        return EXIT_GATE_FIRED
    return EXIT_OK


def _cmd_evolve(args) -> int:
    try:
        raw = json.loads(Path(args.config).read_text()) if args.config else {}
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"bad evolve config: {exc}")
    try:
        cfg = EvoConfig(**raw)
    except TypeError as exc:
        raise CliError(f"bad evolve config: {exc}")
    _echo_config("evolve", {"config": cfg.to_dict(), "bank": args.bank})
    result = evolve(cfg)
    result.bank.save(args.bank)
    print("best-of-generation:", " ".join(f"{v:.6g}" for v in result.best_per_generation))
    print(f"bank entries: {len(result.bank.entries)} -> {args.bank}")
    return EXIT_OK


def _load_bank(path: str) -> ScenarioBank:
    try:
        return ScenarioBank.load(path)
    except (OSError, json.JSONDecodeError, KeyError, WorldError) as exc:
        raise CliError(f"bad bank directory {path}: {exc}")


def _cmd_shrink(args) -> int:
    _echo_config("shrink", {"bank": args.bank, "entry": args.entry, "target": args.target})
    bank = _load_bank(args.bank)
    entry = next((e for e in bank.entries if e.entry_id == args.entry), None)
    if entry is None:
        raise CliError(f"no entry {args.entry} in bank")
    try:
        small = shrink(entry, args.target)
    except ValueError as exc:
        raise CliError(str(exc))
    minimal = is_one_minimal(small, args.target, entry.seeds)
    out = Path(args.bank) / args.entry / f"shrunk-{args.target}.json"
    out.write_text(json.dumps({"genes": small.genes, "one_minimal": minimal},
                              indent=1, sort_keys=True) + "\n")
    print(f"shrunk {len(entry.genome.genes)} -> {len(small.genes)} genes "
          f"(1-minimal={minimal}) -> {out}")
    return EXIT_OK


def _cmd_synthesize(args) -> int:
    _echo_config("synthesize", {"bank": args.bank, "out": args.out,
                                "pop": args.pop, "generations": args.generations,
                                "seed": args.seed})
    bank = _load_bank(args.bank)
    try:
        result = synthesize_governor(bank, pop=args.pop, generations=args.generations,
                                     master_seed=args.seed)
    except ValueError as exc:
        raise CliError(str(exc))
    payload = result.config.to_dict()
    payload["_synthesis"] = {
        "feasible": result.feasible,
        "worst_relative_regret": result.worst_relative_regret,
        "total_neurosis": result.total_neurosis,
        "default_total_neurosis": result.default_total_neurosis,
    }
    Path(args.out).write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
    print(f"feasible={result.feasible} neurosis={result.total_neurosis:.6g} "
          f"(default preset {result.default_total_neurosis:.6g}) -> {args.out}")
    return EXIT_OK


def _cmd_counterfactual(args) -> int:
    toggles = {}
    if args.toggles:
        for part in args.toggles.split(","):
            if "=" not in part:
                raise CliError(f"bad toggle {part!r}; use key=value")
            k, v = part.split("=", 1)
            toggles[k.strip()] = v.strip()
    _echo_config("counterfactual", {"bank": args.bank, "entry": args.entry,
                                    "toggles": toggles, "governor": args.governor})
    bank = _load_bank(args.bank)
    entry = next((e for e in bank.entries if e.entry_id == args.entry), None)
    if entry is None:
        raise CliError(f"no entry {args.entry} in bank")
    try:
        base, variant, diff = counterfactual_trace(
            entry, toggles, governor=_resolve_governor(args.governor))
    except ValueError as exc:
        raise CliError(str(exc))
    d = Path(args.bank) / args.entry
    write_trace_csv(base, d / "traces" / "counterfactual-base.csv")
    write_trace_csv(variant, d / "traces" / "counterfactual-variant.csv")
    (d / "diff.json").write_text(json.dumps(diff.to_dict(), indent=1, sort_keys=True) + "\n")
    print(f"first divergence tick: {diff.first_divergence_tick}")
    return EXIT_OK


def _cmd_replay(args) -> int:
    gov = _resolve_governor(args.governor)
    _echo_config("replay", {"trace": args.trace, "scenario": args.scenario,
                            "seed": args.seed, "governor": args.governor})
    spec = _load_scenario(args.scenario)
    try:
        recorded = Path(args.trace).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"bad trace file {args.trace}: {exc}")
    fresh = trace_to_csv(run_episode(spec, governor=gov, seed=args.seed))
    if fresh != recorded:
        print("replay mismatch")
        return EXIT_REPLAY_MISMATCH
    print("replay ok (byte-identical)")
    return EXIT_OK


def build_parser() -> _Parser:
    p = _Parser(prog="neurogrid", description=__doc__)
    sub = p.add_subparsers(dest="cmd", required=True)

    sc = sub.add_parser("scenario", help="emit a canonical scenario file")
    sc.add_argument("modality", choices=all_scenario_names())
    sc.add_argument("--out", required=True)
    sc.set_defaults(fn=_cmd_scenario)

    rn = sub.add_parser("run", help="run one episode")
    rn.add_argument("--scenario", required=True)
    rn.add_argument("--seed", type=int, default=0)
    rn.add_argument("--governor", default="off")
    rn.add_argument("--trace")
    rn.add_argument("--scores")
    rn.set_defaults(fn=_cmd_run)

    dt = sub.add_parser("detect", help="audit a trace")
    dt.add_argument("--trace")
    dt.add_argument("--modality", default="all",
                    choices=("all",) + MODALITIES)
    dt.add_argument("--report")
    dt.add_argument("--gate", action="store_true",
                    help="exit 4 when any requested detector fires")
    dt.add_argument("--scenario", help="re-simulate for a rich trace")
    dt.add_argument("--seed", type=int, default=0)
    dt.add_argument("--governor", default="off")
    dt.set_defaults(fn=_cmd_detect)

    ev = sub.add_parser("evolve", help="GP destructive testing")
    ev.add_argument("--config", help="JSON file of evolution knobs")
    ev.add_argument("--bank", required=True)
    ev.set_defaults(fn=_cmd_evolve)

    sh = sub.add_parser("shrink", help="reduce a bank entry to a minimal cause")
    sh.add_argument("--bank", required=True)
    sh.add_argument("--entry", required=True)
    sh.add_argument("--target", required=True, choices=MODALITIES)
    sh.set_defaults(fn=_cmd_shrink)

    sy = sub.add_parser("synthesize", help="evolve a governor against a bank")
    sy.add_argument("--bank", required=True)
    sy.add_argument("--out", required=True)
    sy.add_argument("--pop", type=int, default=16)
    sy.add_argument("--generations", type=int, default=8)
    sy.add_argument("--seed", type=int, default=0)
    sy.set_defaults(fn=_cmd_synthesize)

    cf = sub.add_parser("counterfactual", help="paired toggle runs for an entry")
    cf.add_argument("--bank", required=True)
    cf.add_argument("--entry", required=True)
    cf.add_argument("--toggles", default="",
                    help="comma list: governor=off|preset, memory=off, "
                         "visibility=gv|lv, calibration=off")
    cf.add_argument("--governor", default="off")
    cf.set_defaults(fn=_cmd_counterfactual)

    rp = sub.add_parser("replay", help="re-simulate and byte-compare a trace")
    rp.add_argument("--trace", required=True)
    rp.add_argument("--scenario", required=True)
    rp.add_argument("--seed", type=int, required=True)
    rp.add_argument("--governor", default="off")
    rp.set_defaults(fn=_cmd_replay)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
