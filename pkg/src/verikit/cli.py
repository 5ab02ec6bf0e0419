"""Command-line interface.

Subcommands: analyze, check, fuzz, curate, sched-sim, serve, batch.
Exit codes: 0 success; 1 non-equivalent verdict under ``check --gate``;
2 usage error (argparse's own convention).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from verikit import __version__

__all__ = ["main"]


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _common(parser: argparse.ArgumentParser, m_n: bool = True):
    parser.add_argument("--seed", type=int, default=None, help="stimulus seed")
    parser.add_argument("--json", action="store_true", help="emit JSON")
    parser.add_argument("--config", default=None,
                        help="JSON file with default m/n/seed/workers; "
                        "explicit flags win")
    if m_n:
        parser.add_argument("--m", type=int, default=None, help="sequences per stage")
        parser.add_argument("--n", type=int, default=None,
                            help="vectors or toggles per sequence")


def _load_config_file(args) -> dict:
    path = getattr(args, "config", None)
    if not path:
        return {}
    return json.loads(_read(path))


def _check_config(args) -> "CheckConfig":
    from verikit.equiv import CheckConfig

    file_cfg = _load_config_file(args)
    cfg = CheckConfig()
    for key in ("m", "n", "seed"):
        if key in file_cfg:
            setattr(cfg, key, int(file_cfg[key]))
    if getattr(args, "m", None) is not None:
        cfg.m = args.m
    if getattr(args, "n", None) is not None:
        cfg.n = args.n
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if file_cfg.get("early_exit") or getattr(args, "early_exit", False):
        cfg.early_exit = True
    if getattr(args, "top", None):
        cfg.top_hint = args.top
    return cfg


def cmd_analyze(args) -> int:
    from verikit.analysis import AnalysisError, analyze
    from verikit.front.parser import ParseError, parse_source

    try:
        ast = parse_source(_read(args.file), origin=args.file)
        a = analyze(ast, top=args.top)
    except (ParseError, AnalysisError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    if args.json:
        print(json.dumps({
            "module": a.interface.name,
            "class": a.circuit_class.kind,
            "ports": [
                {"name": p.name, "direction": p.direction, "msb": p.msb,
                 "lsb": p.lsb, "width": p.width}
                for p in a.interface.ports
            ],
            "clocks": [{"signal": c.signal, "edge": c.edge} for c in a.clocks],
            "resets": [
                {"signal": r.signal, "synchrony": r.synchrony, "polarity": r.polarity}
                for r in a.resets
            ],
            "warnings": a.warnings,
        }, indent=2))
        return 0
    print(f"module {a.interface.name}: {a.circuit_class.kind}")
    for p in a.interface.ports:
        rng = f"[{p.msb}:{p.lsb}] " if p.width > 1 else ""
        print(f"  {p.direction:<6} {rng}{p.name} ({p.width} bit)")
    for c in a.clocks:
        print(f"  clock {c.signal} ({c.edge} edge)")
    for r in a.resets:
        print(f"  reset {r.signal} ({r.synchrony}, {r.polarity})")
    for w in a.warnings:
        print(f"  warning: {w}")
    return 0


def cmd_check(args) -> int:
    from verikit.equiv import check_sources

    report = check_sources(_read(args.golden), _read(args.candidate),
                           _check_config(args))
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(f"verdict: {report.verdict}")
        print(f"epsilon: {report.epsilon:.6g}%")
        print(f"assessments: {report.assessments}  mismatches: {report.mismatches}  "
              f"undefined_skips: {report.undefined_skips}")
        if report.detail:
            print(f"detail: {report.detail}")
        if report.first_mismatch:
            print(f"first mismatch: {json.dumps(report.first_mismatch)}")
    if args.gate and report.verdict != "equivalent":
        return 1
    return 0


def cmd_fuzz(args) -> int:
    from verikit.equiv import CheckConfig
    from verikit.mutate import run_campaign

    cfg = _check_config(args)
    report = run_campaign(_read(args.golden), cfg, seed=args.seed or 0,
                          count=args.count, design_name=Path(args.golden).stem)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(f"design: {report.design}")
        print(f"generated: {report.generated}  killable: {report.killable}  "
              f"killed: {report.killed}  survived: {report.survived_killable}")
        print(f"oracle-equivalent: {report.oracle_equivalent}  "
              f"false kills: {report.false_kills}  unknown: {report.unknown}")
        print(f"detection rate: {report.detection_rate:.3f}")
    return 0


def cmd_curate(args) -> int:
    from verikit.curation import (
        ChatClient,
        CurationConfig,
        LlmEndpoint,
        curate_records,
        read_jsonl,
        write_jsonl,
    )
    from verikit.equiv import CheckConfig

    check = CheckConfig()
    if args.seed is not None:
        check.seed = args.seed
    config = CurationConfig(k_attempts=args.k, rouge_threshold=args.rouge_threshold,
                            difficulty_mode=args.difficulty_mode, check=check)
    client = None
    if args.endpoint:
        client = ChatClient(LlmEndpoint(base_url=args.endpoint, model=args.model))
    benchmark = None
    if args.benchmark:
        benchmark = [rec.y_star for rec in read_jsonl(args.benchmark)]
    records = list(read_jsonl(args.input))
    kept, dropped = curate_records(records, config, client=client,
                                   benchmark_corpus=benchmark)
    write_jsonl(args.output, kept)
    dropped_path = args.dropped or (str(args.output) + ".dropped.jsonl")
    write_jsonl(dropped_path, dropped)
    summary = {
        "input": len(records),
        "kept": len(kept),
        "dropped": len(dropped),
        "dropped_by": _dropped_histogram(dropped),
        "out": str(args.output),
        "dropped_out": dropped_path,
    }
    print(json.dumps(summary, indent=2) if args.json else
          f"kept {len(kept)}/{len(records)}; drops by filter: {summary['dropped_by']}")
    return 0


def _dropped_histogram(dropped) -> dict:
    hist: dict[str, int] = {}
    for rec in dropped:
        name = rec.drop_reason["filter"] if rec.drop_reason else "unknown"
        hist[name] = hist.get(name, 0) + 1
    return dict(sorted(hist.items()))


def cmd_sched_sim(args) -> int:
    from verikit.rl import OutcomeStream, ValidityProfile, simulate_training

    if args.validity_profile:
        spec = json.loads(_read(args.validity_profile))
        profile = ValidityProfile(points=tuple((float(f), float(v))
                                               for f, v in spec["points"]))
        length = int(spec.get("length", 200_000))
        stream_seed = int(spec.get("seed", args.seed or 0))
    else:
        profile = ValidityProfile.decaying()
        length = 200_000
        stream_seed = args.seed or 0
    stream = OutcomeStream(length=length, profile=profile, seed=stream_seed)
    stats = simulate_training(stream, b_train=args.b_train, steps=args.steps,
                              mode=args.mode, b_gen_fixed=args.b_gen)
    if args.json:
        print(json.dumps(stats.to_dict(), indent=2))
    else:
        print(f"mode {stats.mode}: {stats.steps_completed} steps, "
              f"generated {stats.total_generated}, wasted {stats.total_wasted}"
              + (" (stream exhausted)" if stats.exhausted else ""))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from verikit.service import ServiceConfig, create_app

    config = ServiceConfig(host=args.host, port=args.port,
                           workers=args.workers or 0,
                           allow_overrides=not args.no_overrides)
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return 0


def cmd_batch(args) -> int:
    from verikit.batch import BatchJob, run_batch

    pairs = []
    for line in Path(args.pairs).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        d = json.loads(line)
        pairs.append((d["id"], d["golden_source"], d["candidate_source"]))
    job = BatchJob(pairs=pairs, config=_check_config(args))
    workers = args.workers
    if workers is None:
        file_cfg = _load_config_file(args)
        workers = file_cfg.get("workers")
    reports, stats = run_batch(job, workers=workers)
    out = {"reports": reports, "stats": stats.to_dict()}
    if args.json:
        print(json.dumps(out, indent=2))
    else:
        for r in reports:
            print(f"{r['id']}: {r['verdict']} (epsilon {r['epsilon']:.6g}%)")
        print(f"{stats.pairs} pairs in {stats.wall_time:.2f}s "
              f"({stats.instances_per_second:.2f}/s)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="verikit",
                                     description="Verilog equivalence toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="interface / clock / reset report")
    p.add_argument("file")
    p.add_argument("--top", default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("check", help="equivalence-check two designs")
    p.add_argument("--golden", required=True)
    p.add_argument("--candidate", required=True)
    p.add_argument("--top", default=None)
    p.add_argument("--early-exit", dest="early_exit", action="store_true")
    p.add_argument("--gate", action="store_true",
                   help="exit 1 when the verdict is not equivalent")
    _common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("fuzz", help="mutation campaign against a golden design")
    p.add_argument("--golden", required=True)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--top", default=None)
    _common(p)
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("curate", help="run the round-trip curation filters")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--dropped", default=None, help="where dropped records go")
    p.add_argument("--endpoint", default=None, help="chat-completion base URL")
    p.add_argument("--model", default="default")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--rouge-threshold", type=float, default=0.5)
    p.add_argument("--difficulty-mode", choices=("any_pass", "all_pass"),
                   default="any_pass")
    p.add_argument("--benchmark", default=None,
                   help="JSONL of benchmark records to decontaminate against")
    _common(p, m_n=False)
    p.set_defaults(func=cmd_curate)

    p = sub.add_parser("sched-sim", help="adaptive vs fixed sampling simulation")
    p.add_argument("--b-train", type=int, default=64)
    p.add_argument("--steps", type=int, default=300)
    p.add_argument("--mode", choices=("adaptive", "fixed"), default="adaptive")
    p.add_argument("--b-gen", type=int, default=None,
                   help="fixed-mode generation batch (default 2*b_train)")
    p.add_argument("--validity-profile", default=None,
                   help="JSON file with points/length/seed")
    _common(p, m_n=False)
    p.set_defaults(func=cmd_sched_sim)

    p = sub.add_parser("serve", help="run the HTTP reward service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8714)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--no-overrides", action="store_true",
                   help="ignore per-request plan overrides")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("batch", help="check many pairs from a JSONL file")
    p.add_argument("--pairs", required=True,
                   help="JSONL with id/golden_source/candidate_source")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--early-exit", dest="early_exit", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_batch)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
