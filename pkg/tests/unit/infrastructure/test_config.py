"""
Unit tests for environment settings and the dependency container.
"""
import pytest

from src.application.services.benchmark_service import BenchmarkService
from src.application.services.inference_service import InferenceService
from src.domain.errors import ConfigurationError
from src.infrastructure.config import EngineSettings
from src.infrastructure.container import (
    InfrastructureContainer,
    cleanup_container,
    get_container,
    set_container,
)

_VARIABLES = ["R2OMC_OUTPUT_DIR", "R2OMC_ORACLE_CACHE", "R2OMC_WORKERS", "R2OMC_LOG_LEVEL",
              "R2OMC_RECORD_RUNTIME", "R2OMC_API_PORT"]


@pytest.fixture
def clean_environment(monkeypatch):
    for name in _VARIABLES:
        monkeypatch.delenv(name, raising=False)
    return monkeypatch


class TestEngineSettings:
    """Test cases for EngineSettings."""

    def test_defaults(self, clean_environment):
        # Act
        settings = EngineSettings()

        # Assert
        assert settings.output_dir == "results"
        assert settings.workers == 1
        assert settings.log_level == "INFO"
        assert settings.record_runtime is True
        assert settings.api_port == 8001

    def test_environment_overrides(self, clean_environment):
        # Arrange
        clean_environment.setenv("R2OMC_WORKERS", "4")
        clean_environment.setenv("R2OMC_LOG_LEVEL", "debug")
        clean_environment.setenv("R2OMC_RECORD_RUNTIME", "false")

        # Act
        settings = EngineSettings.from_environment(dotenv=False)

        # Assert
        assert settings.workers == 4
        assert settings.log_level == "DEBUG"
        assert settings.record_runtime is False

    @pytest.mark.parametrize("name, value", [
        ("R2OMC_WORKERS", "many"),
        ("R2OMC_WORKERS", "0"),
        ("R2OMC_RECORD_RUNTIME", "sometimes"),
        ("R2OMC_LOG_LEVEL", "LOUD"),
    ])
    def test_invalid_values(self, clean_environment, name, value):
        clean_environment.setenv(name, value)

        with pytest.raises(ConfigurationError):
            EngineSettings()


class TestInfrastructureContainer:
    """Test cases for the dependency container."""

    @pytest.fixture
    def container(self, tmp_path):
        settings = EngineSettings(output_dir=str(tmp_path), oracle_cache=str(tmp_path / "cache"), workers=1,
                                  log_level="INFO", record_runtime=False, api_port=8001)
        return InfrastructureContainer(settings)

    def test_services_are_singletons(self, container):
        # Act
        first = container.get_inference_service()
        second = container.get_inference_service()

        # Assert
        assert first is second
        assert isinstance(first, InferenceService)

    def test_benchmark_service_follows_oracle_seed(self, container):
        # Act
        default = container.get_benchmark_service()
        same = container.get_benchmark_service()
        other = container.get_benchmark_service(oracle_seed=3)

        # Assert
        assert isinstance(default, BenchmarkService)
        assert default is same
        assert other is not default
        assert other.oracle_seed == 3

    def test_cleanup(self, container):
        # Arrange
        service = container.get_inference_service()

        # Act
        container.cleanup()

        # Assert
        assert container.get_inference_service() is not service

    def test_global_container(self, container):
        # Act
        set_container(container)

        # Assert
        assert get_container() is container
        cleanup_container()
        assert get_container() is not container
        cleanup_container()
