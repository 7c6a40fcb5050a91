"""
Ground-truth posterior sampler contract.
Following clean architecture principles - abstract contract for reference posteriors.
"""
from abc import ABC, abstractmethod
from typing import Tuple

import numpy as np

from src.domain.errors import OracleUnavailableError
from src.domain.value_objects.common import OracleKind


class GroundTruthSampler(ABC):
    """Reference posterior for one benchmark problem."""

    @property
    @abstractmethod
    def kind(self) -> OracleKind:
        """Which kind of reference this is."""
        pass

    @property
    def parameters(self) -> dict:
        """Descriptive parameters recorded in reports."""
        return {}

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``count`` reference posterior samples, shape (count, D)."""
        raise OracleUnavailableError(f"{type(self).__name__} cannot draw samples")

    def moments(self) -> Tuple[np.ndarray, np.ndarray]:
        """Posterior mean and standard deviation per coordinate."""
        raise OracleUnavailableError(f"{type(self).__name__} has no closed-form moments")


class NoGroundTruth(GroundTruthSampler):
    """Placeholder for problems without a reference posterior."""

    @property
    def kind(self) -> OracleKind:
        return OracleKind.NONE
