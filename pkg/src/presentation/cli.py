"""
Command-line experiment runner.
Presentation layer - parses flags, assembles validated configurations and prints tables.

Exit codes: 0 success, 2 configuration error, 3 inference failure.
"""
import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError
from tabulate import tabulate

from ..domain.entities.experiment import BenchmarkProblem, BenchmarkRow, ExperimentConfig, RunReport
from ..domain.errors import ConfigurationError, OracleUnavailableError, SchemaError
from ..infrastructure.config import EngineSettings
from ..infrastructure.container import InfrastructureContainer, get_container, set_container
from ..infrastructure.image_io import write_pgm
from ..infrastructure.simulators.registry import list_problems, make_problem
from .schemas import build_experiment_config, deep_merge

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FAILURE = 3

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON experiment configuration file")
    parser.add_argument("--seeds", type=int, help="Optimization seeds S per observation")
    parser.add_argument("--pcg", type=float, help="Share of seeds kept per observation, in (0, 1]")
    parser.add_argument("--epsilon", help="Fixed region epsilon, or 'auto' for twice the worst accepted d*")
    parser.add_argument("--candidates", type=int, help="Proposal draws P")
    parser.add_argument("--final", type=int, help="Posterior draws M after resampling")
    parser.add_argument("--reps", type=int, help="Repetitions")
    parser.add_argument("--master-seed", type=int, help="Master seed of the random streams")
    parser.add_argument("--oracle-seed", type=int, help="Seed of observations and reference samples")
    parser.add_argument("--out", type=Path, help="Output directory")
    parser.add_argument("--oracle-cache", type=Path, help="Directory for cached reference samples")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="r2omc",
        description="Robust optimization Monte Carlo experiments on differentiable simulators.",
    )
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    commands = parser.add_subparsers(dest="command", required=True)

    infer = commands.add_parser("infer", help="Run repetitions of one configuration and score them")
    infer.add_argument("--problem", choices=list_problems(), help="Problem id")
    infer.add_argument("--dim", type=int, help="Parameter dimension for scalable problems")
    _add_config_flags(infer)

    sweep = commands.add_parser("sweep", help="Budget sweep with early stopping")
    sweep.add_argument("--problem", nargs="+", choices=list_problems(), required=True)
    sweep.add_argument("--dim", nargs="+", type=int, default=None)
    sweep.add_argument("--budgets", nargs="+", type=int, required=True)
    _add_config_flags(sweep)

    for name, text in (("frontier", "Success frontier SVG"), ("heatmap", "Mean C2ST heatmap SVG"),
                       ("scatter", "C2ST against runtime SVG")):
        plot = commands.add_parser(name, help=text)
        plot.add_argument("--csv", type=Path, required=True, help="Results CSV")
        plot.add_argument("--svg", type=Path, required=True, help="Output SVG")
        if name == "heatmap":
            plot.add_argument("--problem", default=None)

    oracle = commands.add_parser("oracle", help="Draw and cache reference posterior samples")
    oracle.add_argument("--problem", choices=list_problems(), required=True)
    oracle.add_argument("--dim", type=int)
    oracle.add_argument("--count", type=int, default=1000)
    oracle.add_argument("--oracle-seed", type=int, default=0)
    oracle.add_argument("--oracle-cache", type=Path)
    oracle.add_argument("--out", type=Path, help="Also write the samples to this .npy file")

    image = commands.add_parser("image", help="Image denoising demo with PGM output")
    image.add_argument("--camera", choices=["pixel", "checker"], default="pixel")
    image.add_argument("--side", type=int, default=28)
    image.add_argument("--mnist", type=Path, help="IDX image file; a synthetic glyph is used otherwise")
    image.add_argument("--mnist-index", type=int, default=0)
    _add_config_flags(image)

    serve = commands.add_parser("serve", help="Start the HTTP API")
    serve.add_argument("--host", default="0.0.0.0")
    serve.add_argument("--port", type=int)
    return parser


def _load_config_file(path: Optional[Path]) -> Dict[str, Any]:
    if path is None:
        return {}
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"Cannot read config file {path}: {e}")
    if not isinstance(payload, dict):
        raise ConfigurationError(f"Config file {path} must hold a JSON object")
    return payload


def flag_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Config dictionary entries for the flags that were given."""
    overrides: Dict[str, Any] = {}
    if args.seeds is not None:
        overrides["seeds"] = args.seeds
    if args.pcg is not None:
        overrides["pcg_to_keep"] = args.pcg
    if args.epsilon is not None:
        if str(args.epsilon).lower() == "auto":
            overrides["epsilon_rule"] = {"mode": "twice_worst_accepted", "fixed_value": None}
        else:
            try:
                overrides["epsilon_rule"] = {"mode": "fixed", "fixed_value": float(args.epsilon)}
            except ValueError:
                raise ConfigurationError(f"--epsilon must be a number or 'auto', got {args.epsilon!r}")
    sampling = {}
    if args.candidates is not None:
        sampling["candidate_count"] = args.candidates
    if args.final is not None:
        sampling["final_count"] = args.final
    if sampling:
        overrides["sampling"] = sampling
    if args.reps is not None:
        overrides["repetitions"] = args.reps
    if args.master_seed is not None:
        overrides["master_seed"] = args.master_seed
    if args.oracle_seed is not None:
        overrides["oracle_seed"] = args.oracle_seed
    if args.out is not None:
        overrides["output_dir"] = str(args.out)
    return overrides


def _configure(args: argparse.Namespace) -> EngineSettings:
    settings = EngineSettings.from_environment()
    if getattr(args, "oracle_cache", None) is not None:
        settings = replace(settings, oracle_cache=str(args.oracle_cache))
    if args.log_level is not None:
        settings = replace(settings, log_level=args.log_level.upper())
    logging.basicConfig(level=getattr(logging, settings.log_level), format=LOG_FORMAT)
    set_container(InfrastructureContainer(settings))
    return settings


def _repetition_table(report: RunReport) -> str:
    rows = [
        (r.repetition, r.run_seed, "ok" if r.succeeded else "failed", r.epsilon, r.ess, r.c2st,
         round(r.runtime_seconds, 3), r.budget.vectorized_calls, r.budget.instance_evaluations)
        for r in report.repetitions
    ]
    return tabulate(rows, headers=["rep", "run seed", "status", "epsilon", "ESS", "C2ST", "seconds",
                                   "vectorized calls", "evaluations"], floatfmt=".4g")


def _rows_from_report(problem: BenchmarkProblem, config: ExperimentConfig, report: RunReport) -> List[BenchmarkRow]:
    return [
        BenchmarkRow(
            problem=problem.problem_id, method="r2omc", dim=problem.dim, budget=config.seeds,
            rep=r.repetition, run_seed=r.run_seed, c2st=r.c2st, runtime_seconds=r.runtime_seconds,
            vectorized_calls=r.budget.vectorized_calls, instance_evaluations=r.budget.instance_evaluations,
        )
        for r in report.repetitions
    ]


def _experiment_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return deep_merge(_load_config_file(args.config), flag_overrides(args))


def command_infer(args: argparse.Namespace) -> int:
    overrides = _experiment_overrides(args)
    problem_id = args.problem or overrides.get("problem_id")
    if not problem_id:
        raise ConfigurationError("--problem is required (or problem_id in the config file)")
    dim = args.dim if args.dim is not None else overrides.get("dim")
    problem = make_problem(problem_id, dim, overrides.get("oracle_seed", 0), **overrides.get("problem_options", {}))
    config = build_experiment_config(problem, overrides)

    container = get_container()
    output_dir = Path(config.output_dir)
    report = container.get_inference_service().run_experiment(problem, config, export_dir=output_dir)
    results = container.get_results_repository()
    results.write_rows(_rows_from_report(problem, config, report), output_dir / "results.csv")
    results.write_report(report, output_dir / "report.json")

    print(_repetition_table(report))
    print(f"\n{report.status.message}; mean C2ST {report.mean_c2st}")
    return EXIT_OK if report.status.success else EXIT_FAILURE


def command_sweep(args: argparse.Namespace) -> int:
    overrides = _experiment_overrides(args)
    repetitions = overrides.get("repetitions", 5)
    oracle_seed = overrides.get("oracle_seed", 0)

    def builder(problem: BenchmarkProblem) -> ExperimentConfig:
        return build_experiment_config(problem, overrides)

    # Fail fast on a bad configuration before any cell runs.
    builder(make_problem(args.problem[0], (args.dim or [None])[0], oracle_seed))

    container = get_container()
    service = container.get_benchmark_service(oracle_seed)
    rows = service.run_benchmark_sweep(args.problem, args.dim or [None], args.budgets, repetitions,
                                       config_builder=builder)
    output_dir = Path(overrides.get("output_dir", container.settings.output_dir))
    path = container.get_results_repository().write_rows(rows, output_dir / "results.csv")

    table = [(r.problem, r.dim, r.budget, r.rep, r.c2st, r.runtime_seconds) for r in rows]
    print(tabulate(table, headers=["problem", "D", "S", "rep", "C2ST", "seconds"], floatfmt=".4g"))
    print(f"\nWrote {len(rows)} rows to {path}")
    return EXIT_OK


def command_plot(args: argparse.Namespace) -> int:
    service = get_container().get_benchmark_service()
    if args.command == "frontier":
        path = service.emit_frontier_plot(args.csv, args.svg)
    elif args.command == "heatmap":
        path = service.emit_heatmap(args.csv, args.svg, args.problem)
    else:
        path = service.emit_scatter_c2st_runtime(args.csv, args.svg)
    print(f"Wrote {path}")
    return EXIT_OK


def command_oracle(args: argparse.Namespace) -> int:
    problem = make_problem(args.problem, args.dim, args.oracle_seed)
    samples = get_container().get_inference_service().reference_samples(problem, args.count, args.oracle_seed)
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        np.save(args.out, samples, allow_pickle=False)
    rows = [(j, float(m), float(s)) for j, (m, s) in enumerate(zip(samples.mean(axis=0), samples.std(axis=0)))]
    print(tabulate(rows[:20], headers=["coordinate", "mean", "std"], floatfmt=".4f"))
    print(f"\n{samples.shape[0]} reference samples for {problem.problem_id} (D={problem.dim})")
    return EXIT_OK


def command_image(args: argparse.Namespace) -> int:
    overrides = _experiment_overrides(args)
    problem_id = "img_pixel" if args.camera == "pixel" else "img_checker"
    options = {"side": args.side, "mnist_path": args.mnist, "mnist_index": args.mnist_index}
    problem = make_problem(problem_id, None, overrides.get("oracle_seed", 0), **options)
    config = build_experiment_config(problem, overrides)

    samples, report = get_container().get_inference_service().run_inference(problem, config)
    if samples is None:
        print(report.status.message)
        return EXIT_FAILURE

    side = args.side
    output_dir = Path(config.output_dir)
    posterior_mean = samples.mean(axis=0)
    posterior_std = samples.std(axis=0)
    write_pgm(output_dir / "observation.pgm", problem.observations[0].reshape(side, side))
    write_pgm(output_dir / "posterior_mean.pgm", posterior_mean.reshape(side, side))
    write_pgm(output_dir / "posterior_std.pgm",
              (posterior_std / max(float(posterior_std.max()), 1e-12)).reshape(side, side))
    if problem.true_theta is not None:
        write_pgm(output_dir / "clean.pgm", problem.true_theta.reshape(side, side))

    oracle_mean, _ = problem.ground_truth.moments()
    mae = float(np.mean(np.abs(posterior_mean - oracle_mean)))
    print(tabulate([(problem_id, config.seeds, report.repetitions[0].epsilon, mae)],
                   headers=["problem", "S", "epsilon", "MAE vs reference mean"], floatfmt=".4g"))
    print(f"\nWrote PGM images to {output_dir}")
    return EXIT_OK


def command_serve(args: argparse.Namespace) -> int:
    from .app import run_app

    run_app(host=args.host, port=args.port)
    return EXIT_OK


COMMANDS = {
    "infer": command_infer,
    "sweep": command_sweep,
    "frontier": command_plot,
    "heatmap": command_plot,
    "scatter": command_plot,
    "oracle": command_oracle,
    "image": command_image,
    "serve": command_serve,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _configure(args)
        return COMMANDS[args.command](args)
    except (ConfigurationError, ValidationError, SchemaError) as e:
        logger.error(f"Configuration error: {e}")
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OracleUnavailableError as e:
        logger.error(f"Reference posterior unavailable: {e}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
