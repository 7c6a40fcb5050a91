"""
Service interfaces for the domain layer.
Following clean architecture principles - abstract contracts for application services.
"""
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.domain.entities.experiment import BenchmarkProblem, BenchmarkRow, ExperimentConfig, RunReport


class IInferenceService(ABC):
    """Abstract service interface for running inference experiments."""

    @abstractmethod
    def run_inference(
        self,
        problem: BenchmarkProblem,
        config: ExperimentConfig,
        run_seed: Optional[int] = None,
        export_dir: Optional[Path] = None,
    ) -> Tuple[Optional[np.ndarray], RunReport]:
        """Run the full pipeline once and return posterior samples with a report."""
        pass

    @abstractmethod
    def run_experiment(
        self, problem: BenchmarkProblem, config: ExperimentConfig, export_dir: Optional[Path] = None
    ) -> RunReport:
        """Run all repetitions of a configuration and score each against the oracle."""
        pass


class IBenchmarkService(ABC):
    """Abstract service interface for budget sweeps and their figures."""

    @abstractmethod
    def run_benchmark_sweep(
        self,
        problem_ids: Sequence[str],
        dims: Sequence[Optional[int]],
        budgets: Sequence[int],
        repetitions: int,
        base_config: Optional[ExperimentConfig] = None,
        config_builder: Optional[Callable[[BenchmarkProblem], ExperimentConfig]] = None,
    ) -> List[BenchmarkRow]:
        """Sweep problems, dimensions and seed budgets with early stopping."""
        pass

    @abstractmethod
    def emit_frontier_plot(self, csv_path: Path, svg_path: Path) -> Path:
        """Success frontier of a results file."""
        pass

    @abstractmethod
    def emit_heatmap(self, csv_path: Path, svg_path: Path) -> Path:
        """Mean C2ST heatmap over (D, budget) of a results file."""
        pass

    @abstractmethod
    def emit_scatter_c2st_runtime(self, csv_path: Path, svg_path: Path) -> Path:
        """C2ST against runtime of a results file."""
        pass
