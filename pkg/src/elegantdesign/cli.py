"""Command line entry point: ``evolve``, ``analyze``, ``serve`` and ``fixture``."""

from __future__ import annotations

import argparse
import glob
import json
import logging
import sys
from pathlib import Path

from .designers import DesignerSpecError, parse_designer
from .evolution import EpisodeConfig, EpisodeLog, run_episode
from .problem import SCALES, ProblemError, generate_fixture, load_problem, save_problem, scale_fixture
from .stats import correlate_logs

log = logging.getLogger("elegantdesign")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="elegantdesign", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evolve", help="run headless episodes with a simulated designer")
    ev.add_argument("--problem", required=True, help="problem JSON file")
    ev.add_argument("--k", type=int, default=5, help="number of classes")
    ev.add_argument("--pop", type=int, default=100, help="population size")
    ev.add_argument("--max-gen", type=int, default=1000)
    ev.add_argument("--interval", type=int, default=10, help="generations between presentations")
    ev.add_argument("--seed", type=int, default=1)
    ev.add_argument("--designer", default="none", help="constant:S, random:SEED, purist:MEASURE or none")
    ev.add_argument("--mutation-rate", type=float, default=None)
    ev.add_argument("--crossover-rate", type=float, default=0.9)
    ev.add_argument("--elitism", type=int, default=1)
    ev.add_argument("--batch", type=int, default=0, help="run seeds 1..N; --out is then a directory")
    ev.add_argument("--out", required=True, help="log file (or directory with --batch)")

    an = sub.add_parser("analyze", help="elegance-vs-reward Spearman matrix over episode logs")
    an.add_argument("--logs", required=True, nargs="+", help="log files or glob patterns")
    an.add_argument("--out", required=True, help="TSV output; JSON goes next to it with a .json suffix")

    sv = sub.add_parser("serve", help="HTTP service for interactive sessions")
    sv.add_argument("--port", type=int, default=8000)
    sv.add_argument("--problems", required=True, help="directory of problem JSON files")
    sv.add_argument("--logs-dir", default=None, help="where halted sessions write their logs")

    fx = sub.add_parser("fixture", help="write a synthetic problem file")
    fx.add_argument("--scale", choices=sorted(SCALES), help="reference scale")
    fx.add_argument("--attributes", type=int)
    fx.add_argument("--methods", type=int)
    fx.add_argument("--uses", type=int)
    fx.add_argument("--seed", type=int, default=1)
    fx.add_argument("--out", required=True)
    return parser


def _cmd_evolve(args, parser) -> int:
    designer_spec = None if args.designer.lower() == "none" else args.designer
    if designer_spec is not None:
        try:
            parse_designer(designer_spec)
        except DesignerSpecError as exc:
            parser.error(str(exc))
    try:
        problem = load_problem(args.problem)
    except (OSError, ProblemError) as exc:
        print(f"error: cannot load problem: {exc}", file=sys.stderr)
        return 1

    def config(seed: int) -> EpisodeConfig:
        return EpisodeConfig(
            k=args.k,
            population_size=args.pop,
            max_generations=args.max_gen,
            mutation_rate=args.mutation_rate,
            crossover_rate=args.crossover_rate,
            elitism=args.elitism,
            interaction_interval=args.interval,
            seed=seed,
        )

    if args.batch:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        jobs = [(seed, out_dir / f"{problem.name}-seed{seed:03d}.jsonl") for seed in range(1, args.batch + 1)]
    else:
        jobs = [(args.seed, Path(args.out))]
    try:
        for seed, path in jobs:
            designer = parse_designer(designer_spec) if designer_spec else None
            episode_log = run_episode(problem, config(seed), designer=designer)
            episode_log.write(path)
            log.info("seed %d: %d generations -> %s", seed, episode_log.halt_record["gen"], path)
    except ValueError as exc:
        parser.error(str(exc))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def _cmd_analyze(args) -> int:
    paths = sorted({p for pattern in args.logs for p in (glob.glob(pattern) or [pattern])})
    try:
        logs = [EpisodeLog.read(p) for p in paths]
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    matrix = correlate_logs(logs)
    out = Path(args.out)
    json_out = out.with_suffix(".json") if out.suffix != ".json" else out
    tsv_out = out if out.suffix != ".json" else out.with_suffix(".tsv")
    tsv = matrix.to_tsv()
    tsv_out.write_text(tsv, encoding="utf-8")
    payload = matrix.to_dict()
    payload["logs"] = paths
    json_out.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    sys.stdout.write(tsv)
    return 0


def _cmd_fixture(args, parser) -> int:
    if args.scale:
        problem = scale_fixture(args.scale, args.seed)
    elif None not in (args.attributes, args.methods, args.uses):
        try:
            problem = generate_fixture(args.attributes, args.methods, args.uses, args.seed)
        except ValueError as exc:
            parser.error(str(exc))
    else:
        parser.error("give --scale or all of --attributes/--methods/--uses")
    save_problem(problem, args.out)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "evolve":
        return _cmd_evolve(args, parser)
    if args.command == "analyze":
        return _cmd_analyze(args)
    if args.command == "fixture":
        return _cmd_fixture(args, parser)
    if args.command == "serve":  # pragma: no cover
        from .service import serve

        serve(args.port, args.problems, args.logs_dir)
        return 0
    parser.error(f"unknown command {args.command}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
