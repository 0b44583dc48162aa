"""``detcp`` command line: solve a model, run a synthetic tree, or a benchmark manifest."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from .bench import (
    SEQ,
    DeterminismError,
    RunReport,
    bench_matrix,
    run,
    solution_line,
    solutions_key,
    write_stats_csv,
)
from .fzn import ParseError, parse_file
from .model import Mode
from .parallel import EngineConfig
from .synthetic import SyntheticSpec, gen_synthetic

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_NONDETERMINISM = 0, 2, 3, 4
IMBALANCE_ENV = "DETCP_IMBALANCE_MS"

log = logging.getLogger("detcp")


class UsageError(Exception):
    pass


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return n


def engine_config(threshold: Optional[int] = None, imbalance_ms: Optional[float] = None) -> EngineConfig:
    """Engine settings from explicit values, then the environment, then defaults."""
    cfg = EngineConfig()
    if threshold is not None:
        cfg = replace(cfg, threshold=threshold)
    env = os.environ.get(IMBALANCE_ENV)
    if env:
        try:
            cfg = replace(cfg, imbalance_ms=float(env))
        except ValueError:
            raise UsageError(f"{IMBALANCE_ENV} must be a number, got {env!r}") from None
    if imbalance_ms is not None:
        cfg = replace(cfg, imbalance_ms=imbalance_ms)
    if cfg.imbalance_ms <= 0:
        raise UsageError("imbalance window must be positive")
    return cfg


def _run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.FIRST.value)
    p.add_argument("--strategy", choices=[SEQ, "spd", "spda"], default="spd")
    p.add_argument("--workers", type=_positive, default=4)
    p.add_argument("--threshold", type=_positive, default=None, metavar="S0",
                   help="initial partitioning threshold")
    p.add_argument("--stats-csv", type=Path, metavar="PATH", help="per-worker statistics CSV")
    p.add_argument("--report-json", type=Path, metavar="PATH", help="run report as JSON")
    p.add_argument("--baseline", action="store_true",
                   help="also run sequentially; record the speedup and check SPD against it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="detcp", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve a .dfzn model")
    solve.add_argument("model", type=Path)
    _run_args(solve)

    synth = sub.add_parser("synth", help="search a synthetic binary tree")
    synth.add_argument("--shape", choices=["best", "worst", "balanced"], required=True)
    synth.add_argument("--depth", type=_positive, required=True)
    synth.add_argument("--solutions", type=_positive, default=1, help="solution leaves (balanced only)")
    _run_args(synth)

    bench = sub.add_parser("bench", help="run a benchmark manifest")
    bench.add_argument("--manifest", type=Path, required=True)
    return parser


def _emit(model_id: str, problem, args, cfg: EngineConfig) -> int:
    out = run(problem, args.mode, args.strategy, args.workers, cfg)
    seq_wall = None
    if args.baseline:
        base = run(problem, out.mode, SEQ)
        seq_wall = base.wall_ns
        if args.strategy in (SEQ, "spd") and solutions_key(base.solutions) != solutions_key(out.solutions):
            print(f"determinism violation on {model_id}", file=sys.stderr)
            print("sequential: " + " | ".join(solution_line(s, out.mode) for s in base.solutions), file=sys.stderr)
            print("parallel:   " + " | ".join(solution_line(s, out.mode) for s in out.solutions), file=sys.stderr)
            return EXIT_NONDETERMINISM
    if out.solutions:
        for rec in out.solutions:
            print(solution_line(rec, out.mode))
    else:
        print(solution_line(None, out.mode))
    if args.stats_csv:
        write_stats_csv(args.stats_csv, out.stats)
    if args.report_json:
        RunReport.from_outcome(model_id, out, seq_wall).write(args.report_json)
    return EXIT_OK


def cmd_solve(args) -> int:
    try:
        model = parse_file(args.model)
    except ParseError as e:
        print(e, file=sys.stderr)
        return EXIT_PARSE
    except (OSError, UnicodeDecodeError) as e:
        print(f"{args.model}: cannot read model: {e}", file=sys.stderr)
        return EXIT_PARSE
    return _emit(args.model.stem, model, args, engine_config(args.threshold))


def cmd_synth(args) -> int:
    try:
        spec = SyntheticSpec(args.depth, args.shape, args.solutions)
    except ValueError as e:
        raise UsageError(str(e)) from None
    return _emit(spec.name, gen_synthetic(spec), args, engine_config(args.threshold))


def _manifest_list(data: dict, key: str, default):
    value = data.get(key, default)
    return value if isinstance(value, list) else [value]


def cmd_bench(args) -> int:
    try:
        data = json.loads(args.manifest.read_text(encoding="utf-8"))
    except OSError as e:
        print(f"{args.manifest}: cannot read manifest: {e}", file=sys.stderr)
        return EXIT_PARSE
    except json.JSONDecodeError as e:
        print(f"{args.manifest}:{e.lineno}:{e.colno}: invalid manifest: {e.msg}", file=sys.stderr)
        return EXIT_PARSE
    if not isinstance(data, dict):
        raise UsageError("manifest must be a JSON object")
    root = args.manifest.parent

    def resolve(p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else root / p

    cfg = engine_config(data.get("threshold_S0"), data.get("imbalance_window_ms"))
    single = "model_path" in data
    paths = [data["model_path"]] if single else _manifest_list(data, "models", [])
    models = {}
    for p in paths:
        try:
            models[Path(p).stem] = parse_file(resolve(p))
        except ParseError as e:
            print(e, file=sys.stderr)
            return EXIT_PARSE
        except (OSError, UnicodeDecodeError) as e:
            print(f"{p}: cannot read model: {e}", file=sys.stderr)
            return EXIT_PARSE

    if single:
        ns = argparse.Namespace(mode=data.get("mode", "first"), strategy=data.get("strategy", "spd"),
                                workers=int(data.get("workers", 4)), baseline=bool(data.get("baseline", False)),
                                stats_csv=resolve(data["stats_csv_path"]) if data.get("stats_csv_path") else None,
                                report_json=resolve(data["report_json_path"]) if data.get("report_json_path") else None)
        (name, model), = models.items()
        return _emit(name, model, ns, cfg)

    try:
        report = bench_matrix(models, [int(w) for w in _manifest_list(data, "workers", [1, 4])],
                              _manifest_list(data, "strategies", ["spd"]), int(data.get("reps", 1)),
                              _manifest_list(data, "modes", ["first"]), cfg)
    except DeterminismError as e:
        print(e, file=sys.stderr)
        return EXIT_NONDETERMINISM
    csv_path = resolve(data.get("csv_path", "bench.csv"))
    report.write_csv(csv_path)
    print(f"{report.runs} runs, {len(report.rows)} rows -> {csv_path}")
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "synth": cmd_synth, "bench": cmd_bench}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError) as e:
        print(f"detcp: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
