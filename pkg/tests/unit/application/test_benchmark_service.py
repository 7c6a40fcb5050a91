"""
Unit tests for BenchmarkService and the frontier helpers.
"""
from pathlib import Path
from unittest.mock import Mock

import numpy as np
import pytest

from src.application.services.benchmark_service import (
    BenchmarkService,
    extract_frontier,
    select_budget,
)
from src.domain.entities.experiment import (
    BenchmarkProblem,
    BenchmarkRow,
    ExperimentConfig,
    RepetitionReport,
    RunReport,
)
from src.domain.errors import ConfigurationError
from src.domain.interfaces.plots import IPlotRenderer
from src.domain.interfaces.repositories import IResultsRepository
from src.domain.interfaces.services import IInferenceService
from src.domain.value_objects.common import AppResult


def _row(problem, dim, budget, c2st, rep=0, runtime=1.0):
    return BenchmarkRow(problem=problem, method="r2omc", dim=dim, budget=budget, rep=rep, run_seed=rep,
                        c2st=c2st, runtime_seconds=runtime, vectorized_calls=1, instance_evaluations=budget)


def _report(config, scores):
    return RunReport(config=config, repetitions=[
        RepetitionReport(repetition=r, run_seed=100 + r, status=AppResult.success_result(), c2st=score)
        for r, score in enumerate(scores)
    ])


class TestFrontierHelpers:
    """Test cases for extract_frontier and select_budget."""

    def test_frontier_takes_smallest_passing_budget(self):
        # Arrange
        rows = [
            _row("mog_base", 2, 10, 0.9), _row("mog_base", 2, 100, 0.7), _row("mog_base", 2, 1000, 0.6),
            _row("mog_base", 5, 10, 0.95), _row("mog_base", 5, 100, 0.8, rep=0), _row("mog_base", 5, 100, 0.7, rep=1),
            _row("mog_two", 2, 10, 0.99),
        ]

        # Act
        frontier = extract_frontier(rows)

        # Assert
        assert frontier == {"mog_base": [(2, 100), (5, 100)]}

    def test_frontier_ignores_missing_scores(self):
        assert extract_frontier([_row("mog_base", 2, 10, None)]) == {}

    def test_select_budget(self):
        """Test the first budget below 0.65, else the best mean."""
        # Arrange
        rows = [
            _row("mog_base", 2, 10, 0.7), _row("mog_base", 2, 100, 0.6), _row("mog_base", 2, 1000, 0.55),
            _row("slcp", 5, 10, 0.9), _row("slcp", 5, 100, 0.8), _row("slcp", 5, 1000, 0.85),
        ]

        # Act
        chosen = select_budget(rows)

        # Assert
        assert chosen == {("mog_base", 2): 100, ("slcp", 5): 100}


class TestBenchmarkService:
    """Test cases for BenchmarkService."""

    @pytest.fixture
    def mock_inference_service(self):
        return Mock(spec=IInferenceService)

    @pytest.fixture
    def mock_results_repository(self):
        return Mock(spec=IResultsRepository)

    @pytest.fixture
    def mock_plot_renderer(self):
        renderer = Mock(spec=IPlotRenderer)
        renderer.render_notice.side_effect = lambda message, path: path
        renderer.render_frontier.side_effect = lambda series, threshold, path: path
        renderer.render_heatmap.side_effect = lambda title, dims, budgets, grid, path: path
        renderer.render_scatter.side_effect = lambda points, path: path
        return renderer

    @pytest.fixture
    def problem_factory(self):
        """Factory returning mock problems with the requested dimension."""
        def factory(problem_id, dim, oracle_seed=0):
            problem = Mock(spec=BenchmarkProblem)
            problem.problem_id = problem_id
            problem.dim = 2 if dim is None else dim
            problem.recommended = {}
            return problem
        return Mock(side_effect=factory)

    @pytest.fixture
    def service(self, mock_inference_service, problem_factory, mock_results_repository, mock_plot_renderer):
        return BenchmarkService(mock_inference_service, problem_factory, mock_results_repository,
                                mock_plot_renderer, oracle_seed=4)

    def test_sweep_stops_after_success(self, service, mock_inference_service):
        """Test budgets beyond the first successful one are skipped."""
        # Arrange
        scores = iter([[0.9, 0.9], [0.7, 0.72]])
        mock_inference_service.run_experiment.side_effect = lambda problem, config: _report(config, next(scores))

        # Act
        rows = service.run_benchmark_sweep(["mog_base"], [2], [1000, 10, 100], repetitions=2)

        # Assert
        assert mock_inference_service.run_experiment.call_count == 2
        assert [(r.budget, r.rep) for r in rows] == [(10, 0), (10, 1), (100, 0), (100, 1)]
        assert rows[2].c2st == 0.7
        assert rows[0].run_seed == 100
        assert all(r.method == "r2omc" for r in rows)

    def test_cell_config_uses_budget_and_repetitions(self, service, mock_inference_service):
        # Arrange
        mock_inference_service.run_experiment.side_effect = lambda problem, config: _report(config, [0.6])

        # Act
        service.run_benchmark_sweep(["mog_base"], [3], [50], repetitions=1)

        # Assert
        config = mock_inference_service.run_experiment.call_args[0][1]
        assert isinstance(config, ExperimentConfig)
        assert config.seeds == 50
        assert config.repetitions == 1
        assert config.dim == 3

    def test_problems_built_with_oracle_seed(self, service, problem_factory, mock_inference_service):
        # Arrange
        mock_inference_service.run_experiment.side_effect = lambda problem, config: _report(config, [0.6])

        # Act
        rows = service.run_benchmark_sweep(["mog_base", "mog_two"], [1, 2], [10], repetitions=1)

        # Assert
        problem_factory.assert_any_call("mog_two", 2, oracle_seed=4)
        assert [(r.problem, r.dim) for r in rows] == [("mog_base", 1), ("mog_base", 2), ("mog_two", 1),
                                                      ("mog_two", 2)]

    def test_config_builder_takes_precedence(self, service, mock_inference_service):
        # Arrange
        mock_inference_service.run_experiment.side_effect = lambda problem, config: _report(config, [0.6])
        builder = Mock(side_effect=lambda problem: ExperimentConfig(problem_id=problem.problem_id, pcg_to_keep=0.5))

        # Act
        service.run_benchmark_sweep(["mog_base"], [2], [10], repetitions=1, config_builder=builder)

        # Assert
        builder.assert_called_once()
        assert mock_inference_service.run_experiment.call_args[0][1].pcg_to_keep == 0.5

    def test_parallel_sweep_is_sorted(self, mock_inference_service, problem_factory, mock_results_repository,
                                      mock_plot_renderer):
        # Arrange
        service = BenchmarkService(mock_inference_service, problem_factory, mock_results_repository,
                                   mock_plot_renderer, workers=3)
        mock_inference_service.run_experiment.side_effect = lambda problem, config: _report(config, [0.9])

        # Act
        rows = service.run_benchmark_sweep(["mog_base"], [3, 1, 2], [20, 10], repetitions=1)

        # Assert
        assert [(r.dim, r.budget) for r in rows] == [(1, 10), (1, 20), (2, 10), (2, 20), (3, 10), (3, 20)]

    @pytest.mark.parametrize("problems, dims, budgets, repetitions", [
        ([], [2], [10], 1),
        (["mog_base"], [], [10], 1),
        (["mog_base"], [2], [], 1),
        (["mog_base"], [2], [10], 0),
    ])
    def test_invalid_sweep(self, service, problems, dims, budgets, repetitions):
        with pytest.raises(ConfigurationError):
            service.run_benchmark_sweep(problems, dims, budgets, repetitions)

    def test_frontier_plot(self, service, mock_results_repository, mock_plot_renderer):
        # Arrange
        mock_results_repository.read_rows.return_value = [_row("mog_base", 2, 10, 0.6)]

        # Act
        path = service.emit_frontier_plot(Path("results.csv"), Path("frontier.svg"))

        # Assert
        assert path == Path("frontier.svg")
        mock_plot_renderer.render_frontier.assert_called_once_with({"mog_base": [(2, 10)]}, 0.75,
                                                                    Path("frontier.svg"))

    def test_empty_results_render_notice(self, service, mock_results_repository, mock_plot_renderer):
        # Arrange
        mock_results_repository.read_rows.return_value = []

        # Act
        service.emit_frontier_plot(Path("results.csv"), Path("frontier.svg"))
        service.emit_heatmap(Path("results.csv"), Path("heatmap.svg"))
        service.emit_scatter_c2st_runtime(Path("results.csv"), Path("scatter.svg"))

        # Assert
        assert mock_plot_renderer.render_notice.call_count == 3
        mock_plot_renderer.render_frontier.assert_not_called()

    def test_heatmap_grid(self, service, mock_results_repository, mock_plot_renderer):
        """Test cells hold mean scores and missing cells stay NaN."""
        # Arrange
        mock_results_repository.read_rows.return_value = [
            _row("mog_base", 1, 10, 0.8, rep=0), _row("mog_base", 1, 10, 0.6, rep=1),
            _row("mog_base", 2, 100, 0.7), _row("slcp", 5, 10, 0.9),
        ]

        # Act
        service.emit_heatmap(Path("results.csv"), Path("heatmap.svg"), problem="mog_base")

        # Assert
        title, dims, budgets, grid, _ = mock_plot_renderer.render_heatmap.call_args[0]
        assert title == "mog_base: mean C2ST"
        assert dims == [1, 2]
        assert budgets == [10, 100]
        assert grid[0, 0] == pytest.approx(0.7)
        assert np.isnan(grid[0, 1])
        assert grid[1, 1] == pytest.approx(0.7)

    def test_scatter_points(self, service, mock_results_repository, mock_plot_renderer):
        # Arrange
        mock_results_repository.read_rows.return_value = [
            _row("mog_base", 2, 10, 0.6, runtime=2.0), _row("mog_base", 2, 20, 0.55, runtime=None),
        ]

        # Act
        service.emit_scatter_c2st_runtime(Path("results.csv"), Path("scatter.svg"))

        # Assert
        mock_plot_renderer.render_scatter.assert_called_once_with({"mog_base": [(2.0, 0.6)]}, Path("scatter.svg"))
