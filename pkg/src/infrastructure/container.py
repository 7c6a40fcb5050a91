"""
Dependency injection container for infrastructure components.
Infrastructure layer - manages object creation and dependencies.
"""
from typing import Optional

from .config import EngineSettings
from .plotting import SvgPlotRenderer
from .repositories.file_repositories import CsvResultsRepository, FileOracleSampleRepository
from .simulators.registry import make_problem
from ..application.services.benchmark_service import BenchmarkService
from ..application.services.inference_service import InferenceService


class InfrastructureContainer:
    """Container for infrastructure dependencies."""

    def __init__(self, settings: Optional[EngineSettings] = None):
        self._settings = settings
        self._oracle_repository: Optional[FileOracleSampleRepository] = None
        self._results_repository: Optional[CsvResultsRepository] = None
        self._plot_renderer: Optional[SvgPlotRenderer] = None
        self._inference_service: Optional[InferenceService] = None
        self._benchmark_service: Optional[BenchmarkService] = None

    @property
    def settings(self) -> EngineSettings:
        """Engine settings (read from the environment on first use)."""
        if self._settings is None:
            self._settings = EngineSettings.from_environment()
        return self._settings

    def get_oracle_repository(self) -> FileOracleSampleRepository:
        """Get the oracle sample cache (singleton)."""
        if self._oracle_repository is None:
            self._oracle_repository = FileOracleSampleRepository(self.settings.oracle_cache)
        return self._oracle_repository

    def get_results_repository(self) -> CsvResultsRepository:
        """Get the results repository (singleton)."""
        if self._results_repository is None:
            self._results_repository = CsvResultsRepository(record_runtime=self.settings.record_runtime)
        return self._results_repository

    def get_plot_renderer(self) -> SvgPlotRenderer:
        if self._plot_renderer is None:
            self._plot_renderer = SvgPlotRenderer()
        return self._plot_renderer

    def get_inference_service(self) -> InferenceService:
        """Get the inference service (singleton)."""
        if self._inference_service is None:
            self._inference_service = InferenceService(
                oracle_repository=self.get_oracle_repository(),
                results_repository=self.get_results_repository(),
                workers=self.settings.workers,
            )
        return self._inference_service

    def get_benchmark_service(self, oracle_seed: int = 0) -> BenchmarkService:
        """Get the sweep service; a new one when a different oracle seed is asked for."""
        if self._benchmark_service is None or self._benchmark_service.oracle_seed != oracle_seed:
            self._benchmark_service = BenchmarkService(
                inference_service=self.get_inference_service(),
                problem_factory=make_problem,
                results_repository=self.get_results_repository(),
                plot_renderer=self.get_plot_renderer(),
                workers=self.settings.workers,
                oracle_seed=oracle_seed,
            )
        return self._benchmark_service

    def cleanup(self) -> None:
        """Drop cached singletons."""
        self._oracle_repository = None
        self._results_repository = None
        self._plot_renderer = None
        self._inference_service = None
        self._benchmark_service = None


# Global container instance
_container: Optional[InfrastructureContainer] = None


def get_container() -> InfrastructureContainer:
    """Get the global infrastructure container."""
    global _container
    if _container is None:
        _container = InfrastructureContainer()
    return _container


def set_container(container: Optional[InfrastructureContainer]) -> None:
    """Replace the global container (tests and the CLI use this to inject settings)."""
    global _container
    _container = container


def cleanup_container() -> None:
    """Clean up the global container."""
    global _container
    if _container:
        _container.cleanup()
        _container = None
