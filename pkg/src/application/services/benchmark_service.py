"""
Application service for budget sweeps over benchmark problems.
Following clean architecture principles - orchestrates inference runs, depends on domain interfaces.
"""
import logging
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.domain.entities.experiment import BenchmarkProblem, BenchmarkRow, ExperimentConfig
from src.domain.errors import ConfigurationError
from src.domain.interfaces.plots import IPlotRenderer
from src.domain.interfaces.repositories import IResultsRepository
from src.domain.interfaces.services import IBenchmarkService, IInferenceService

logger = logging.getLogger(__name__)

METHOD_NAME = "r2omc"
SUCCESS_THRESHOLD = 0.75
HIGH_BUDGET_THRESHOLD = 0.65

ProblemFactory = Callable[..., BenchmarkProblem]


def _mean_scores(rows: Sequence[BenchmarkRow]) -> Dict[Tuple[str, int, int], float]:
    scores: Dict[Tuple[str, int, int], List[float]] = defaultdict(list)
    for row in rows:
        if row.c2st is not None:
            scores[(row.problem, row.dim, row.budget)].append(row.c2st)
    return {key: float(np.mean(values)) for key, values in scores.items()}


def extract_frontier(rows: Sequence[BenchmarkRow], threshold: float = SUCCESS_THRESHOLD) -> Dict[str, List[Tuple[int, int]]]:
    """Per problem, the (D, minimum budget) pairs whose mean C2ST is at most ``threshold``."""
    best: Dict[Tuple[str, int], int] = {}
    for (problem, dim, budget), score in _mean_scores(rows).items():
        if score <= threshold and budget < best.get((problem, dim), np.iinfo(np.int64).max):
            best[(problem, dim)] = budget
    frontier: Dict[str, List[Tuple[int, int]]] = defaultdict(list)
    for (problem, dim), budget in sorted(best.items()):
        frontier[problem].append((dim, budget))
    return dict(frontier)


def select_budget(rows: Sequence[BenchmarkRow], threshold: float = HIGH_BUDGET_THRESHOLD) -> Dict[Tuple[str, int], int]:
    """
    High-budget regime per (problem, D): the smallest budget with mean C2ST
    below ``threshold``, else the budget with the lowest mean C2ST.
    """
    by_cell: Dict[Tuple[str, int], List[Tuple[int, float]]] = defaultdict(list)
    for (problem, dim, budget), score in _mean_scores(rows).items():
        by_cell[(problem, dim)].append((budget, score))
    chosen = {}
    for key, entries in sorted(by_cell.items()):
        entries.sort()
        passing = [budget for budget, score in entries if score < threshold]
        chosen[key] = passing[0] if passing else min(entries, key=lambda e: (e[1], e[0]))[0]
    return chosen


class BenchmarkService(IBenchmarkService):
    """Runs budget sweeps with early stopping and renders their figures."""

    def __init__(
        self,
        inference_service: IInferenceService,
        problem_factory: ProblemFactory,
        results_repository: IResultsRepository,
        plot_renderer: IPlotRenderer,
        workers: int = 1,
        oracle_seed: int = 0,
    ):
        self._inference = inference_service
        self._problem_factory = problem_factory
        self._results_repo = results_repository
        self._plots = plot_renderer
        self._workers = max(1, workers)
        self._oracle_seed = oracle_seed

    @property
    def oracle_seed(self) -> int:
        return self._oracle_seed

    def _cell_config(self, problem: BenchmarkProblem, base_config: Optional[ExperimentConfig],
                     config_builder: Optional[Callable[[BenchmarkProblem], ExperimentConfig]]) -> ExperimentConfig:
        if config_builder is not None:
            return config_builder(problem)
        if base_config is not None:
            return base_config.with_overrides(problem_id=problem.problem_id, dim=problem.dim)
        return ExperimentConfig.for_problem(problem)

    def _sweep_problem(self, problem: BenchmarkProblem, budgets: Sequence[int], repetitions: int,
                       base_config, config_builder) -> List[BenchmarkRow]:
        rows: List[BenchmarkRow] = []
        config = self._cell_config(problem, base_config, config_builder)
        for budget in sorted(budgets):
            cell = config.with_overrides(seeds=budget, repetitions=repetitions)
            report = self._inference.run_experiment(problem, cell)
            for repetition in report.repetitions:
                rows.append(BenchmarkRow(
                    problem=problem.problem_id,
                    method=METHOD_NAME,
                    dim=problem.dim,
                    budget=budget,
                    rep=repetition.repetition,
                    run_seed=repetition.run_seed,
                    c2st=repetition.c2st,
                    runtime_seconds=repetition.runtime_seconds,
                    vectorized_calls=repetition.budget.vectorized_calls,
                    instance_evaluations=repetition.budget.instance_evaluations,
                ))
            mean = report.mean_c2st
            logger.info(f"{problem.problem_id} D={problem.dim} S={budget}: mean C2ST {mean}")
            if mean is not None and mean <= SUCCESS_THRESHOLD:
                logger.info(f"{problem.problem_id} D={problem.dim} succeeded at S={budget}; skipping larger budgets")
                break
        return rows

    def run_benchmark_sweep(
        self,
        problem_ids: Sequence[str],
        dims: Sequence[Optional[int]],
        budgets: Sequence[int],
        repetitions: int,
        base_config: Optional[ExperimentConfig] = None,
        config_builder: Optional[Callable[[BenchmarkProblem], ExperimentConfig]] = None,
    ) -> List[BenchmarkRow]:
        if not problem_ids or not dims or not budgets:
            raise ConfigurationError("Sweeps need at least one problem, one dimension and one budget")
        if repetitions < 1:
            raise ConfigurationError("repetitions must be at least 1")

        problems: List[BenchmarkProblem] = []
        seen = set()
        for problem_id in problem_ids:
            for dim in dims:
                problem = self._problem_factory(problem_id, dim, oracle_seed=self._oracle_seed)
                if (problem.problem_id, problem.dim) in seen:
                    continue
                seen.add((problem.problem_id, problem.dim))
                problems.append(problem)

        def sweep(problem: BenchmarkProblem) -> List[BenchmarkRow]:
            return self._sweep_problem(problem, budgets, repetitions, base_config, config_builder)

        if self._workers > 1 and len(problems) > 1:
            with ThreadPoolExecutor(max_workers=self._workers) as pool:
                batches = list(pool.map(sweep, problems))
        else:
            batches = [sweep(p) for p in problems]
        rows = sorted((row for batch in batches for row in batch), key=BenchmarkRow.sort_key)
        logger.info(f"Sweep finished with {len(rows)} rows over {len(problems)} (problem, D) pairs")
        return rows

    def emit_frontier_plot(self, csv_path: Path, svg_path: Path) -> Path:
        rows = self._results_repo.read_rows(Path(csv_path))
        if not rows:
            return self._plots.render_notice("No results to plot", svg_path)
        return self._plots.render_frontier(extract_frontier(rows), SUCCESS_THRESHOLD, svg_path)

    def emit_heatmap(self, csv_path: Path, svg_path: Path, problem: Optional[str] = None) -> Path:
        rows = self._results_repo.read_rows(Path(csv_path))
        if problem is not None:
            rows = [r for r in rows if r.problem == problem]
        if not rows:
            return self._plots.render_notice("No results to plot", svg_path)
        problems = sorted({r.problem for r in rows})
        if len(problems) > 1:
            logger.info(f"Results hold {len(problems)} problems; the heatmap shows {problems[0]}")
        rows = [r for r in rows if r.problem == problems[0]]
        dims = sorted({r.dim for r in rows})
        budgets = sorted({r.budget for r in rows})
        scores = _mean_scores(rows)
        grid = np.full((len(dims), len(budgets)), np.nan)
        for i, dim in enumerate(dims):
            for j, budget in enumerate(budgets):
                grid[i, j] = scores.get((problems[0], dim, budget), np.nan)
        return self._plots.render_heatmap(f"{problems[0]}: mean C2ST", dims, budgets, grid, svg_path)

    def emit_scatter_c2st_runtime(self, csv_path: Path, svg_path: Path) -> Path:
        rows = self._results_repo.read_rows(Path(csv_path))
        points: Dict[str, List[Tuple[float, float]]] = defaultdict(list)
        for row in rows:
            if row.c2st is not None and row.runtime_seconds is not None:
                points[row.problem].append((row.runtime_seconds, row.c2st))
        if not points:
            return self._plots.render_notice("No results with runtime and C2ST to plot", svg_path)
        return self._plots.render_scatter(dict(points), svg_path)
