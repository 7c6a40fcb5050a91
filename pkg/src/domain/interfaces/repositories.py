"""
Repository interfaces for the domain layer.
Following clean architecture principles - abstract contracts for data persistence.
"""
from abc import ABC, abstractmethod
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from src.domain.entities.experiment import BenchmarkRow, RunReport
from src.domain.entities.inference import Hyperbox, OptimizationRecord, WeightedSamples


class IOracleSampleRepository(ABC):
    """Cache of ground-truth posterior samples keyed by (problem, D, oracle seed)."""

    @abstractmethod
    def get(self, problem_id: str, dim: int, oracle_seed: int, count: int) -> Optional[np.ndarray]:
        """Return at least ``count`` cached samples (truncated to ``count``) or None."""
        pass

    @abstractmethod
    def save(self, problem_id: str, dim: int, oracle_seed: int, samples: np.ndarray) -> None:
        """Store samples for later runs."""
        pass


class IResultsRepository(ABC):
    """Persistence for results rows, run reports and per-run exports."""

    @abstractmethod
    def write_rows(self, rows: Sequence[BenchmarkRow], path: Path) -> Path:
        """Write results rows as the versioned CSV."""
        pass

    @abstractmethod
    def read_rows(self, path: Path) -> List[BenchmarkRow]:
        """Read a results CSV back into rows."""
        pass

    @abstractmethod
    def write_report(self, report: RunReport, path: Path) -> Path:
        """Write the JSON run report."""
        pass

    @abstractmethod
    def write_run_exports(
        self,
        directory: Path,
        samples: np.ndarray,
        weighted: Optional[WeightedSamples],
        records: Sequence[OptimizationRecord],
        boxes: Sequence[Hyperbox],
    ) -> List[Path]:
        """Write final samples, weighted samples, record table and boxes."""
        pass
