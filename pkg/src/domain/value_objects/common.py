"""
Domain value objects and enums for the inference engine.
Following clean architecture principles - configuration values validate themselves.
"""
from enum import Enum
from dataclasses import dataclass, field
from typing import Optional, List, Tuple

import numpy as np

from src.domain.errors import ConfigurationError


# Smallest ε ever returned by epsilon selection.
EPSILON_FLOOR = 1e-8


class InitStrategy(Enum):
    PRIOR_SAMPLE = 'prior_sample'
    PRIOR_MEAN = 'prior_mean'


class EpsilonMode(Enum):
    TWICE_WORST_ACCEPTED = 'twice_worst_accepted'
    FIXED = 'fixed'


class OracleKind(Enum):
    CLOSED_FORM = 'closed_form'
    MCMC_REFERENCE = 'mcmc_reference'
    ABC_REFERENCE = 'abc_reference'
    NONE = 'none'


class IndicatorMode(Enum):
    SIMULATOR = 'simulator'
    HYPERBOX = 'hyperbox'


class AxesMode(Enum):
    EIGEN = 'eigen'
    IDENTITY = 'identity'


@dataclass(frozen=True)
class OptimizerConfig:
    """Adam settings for the per-seed deterministic minimizations."""
    learning_rate: float = 0.01
    steps: int = 50
    beta1: float = 0.9
    beta2: float = 0.999
    adam_epsilon: float = 1e-8
    init: InitStrategy = InitStrategy.PRIOR_SAMPLE
    project_to_prior: bool = False

    def __post_init__(self):
        if not 0.0 < self.learning_rate <= 1.0:
            raise ConfigurationError("learning_rate must lie in (0, 1]")
        if self.steps < 1:
            raise ConfigurationError("steps must be at least 1")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ConfigurationError("Adam betas must lie in [0, 1)")
        if self.adam_epsilon <= 0:
            raise ConfigurationError("adam_epsilon must be positive")


@dataclass(frozen=True)
class EpsilonRule:
    """How the acceptance threshold ε is chosen from the accepted records."""
    mode: EpsilonMode = EpsilonMode.TWICE_WORST_ACCEPTED
    fixed_value: Optional[float] = None

    def __post_init__(self):
        if self.mode == EpsilonMode.FIXED and (self.fixed_value is None or self.fixed_value <= 0):
            raise ConfigurationError("fixed epsilon mode requires fixed_value > 0")

    @classmethod
    def fixed(cls, value: float) -> "EpsilonRule":
        return cls(mode=EpsilonMode.FIXED, fixed_value=value)

    def describe(self) -> str:
        if self.mode == EpsilonMode.FIXED:
            return f"fixed({self.fixed_value})"
        return self.mode.value


@dataclass(frozen=True)
class LineSearchParams:
    """Step, cap and refinement settings for the hyperbox line search."""
    step: float = 0.1
    max_steps: int = 100
    refinements: int = 1
    clip_to_prior: bool = False
    axes: AxesMode = AxesMode.EIGEN
    jacobi_max_dim: int = 64

    def __post_init__(self):
        if self.step <= 0:
            raise ConfigurationError("line-search step must be positive")
        if self.max_steps < 1:
            raise ConfigurationError("max_steps must be at least 1")
        if self.refinements < 1:
            raise ConfigurationError("refinements must be at least 1")
        if self.jacobi_max_dim < 1:
            raise ConfigurationError("jacobi_max_dim must be at least 1")

    @property
    def extent_floor(self) -> float:
        """Smallest resolvable extent of the refined search."""
        return self.step * 2.0 ** (-self.refinements)


@dataclass(frozen=True)
class SamplingConfig:
    """Candidate and final sample counts for the importance sampling stage."""
    candidate_count: int = 2000
    final_count: int = 1000
    indicator: IndicatorMode = IndicatorMode.SIMULATOR
    seed: Optional[int] = None

    def __post_init__(self):
        if self.final_count < 1:
            raise ConfigurationError("final_count must be at least 1")
        if self.candidate_count < self.final_count:
            raise ConfigurationError("candidate_count must be at least final_count")


@dataclass(frozen=True)
class MaskSettings:
    """Monte Carlo sizes and threshold for the sensitivity mask."""
    n_theta: int = 50
    n_noise: int = 50
    threshold: float = float(np.finfo(float).eps)

    def __post_init__(self):
        if self.n_theta < 1 or self.n_noise < 1:
            raise ConfigurationError("n_theta and n_noise must be at least 1")
        if self.threshold < 0:
            raise ConfigurationError("mask threshold must be non-negative")


@dataclass(frozen=True)
class C2stConfig:
    """Classifier two-sample test settings."""
    hidden_layers: int = 2
    width_per_dim: int = 10
    max_width: int = 128
    folds: int = 5
    epochs: int = 100
    learning_rate: float = 1e-3
    batch_size: int = 128
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.folds < 2:
            raise ConfigurationError("folds must be at least 2")
        if self.hidden_layers < 1 or self.width_per_dim < 1 or self.max_width < 1:
            raise ConfigurationError("classifier widths must be at least 1")
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigurationError("epochs and batch_size must be at least 1")
        if self.learning_rate <= 0:
            raise ConfigurationError("learning_rate must be positive")

    def hidden_width(self, input_dim: int) -> int:
        return max(1, min(self.width_per_dim * input_dim, self.max_width))


@dataclass
class AppResult:
    """Value object representing the result of an application operation."""
    success: bool
    message: str
    errors: Optional[List[str]] = None

    def __post_init__(self):
        if self.errors is None:
            self.errors = []

    @classmethod
    def success_result(cls, message: str = "Operation completed successfully") -> "AppResult":
        """Create a successful result."""
        return cls(success=True, message=message, errors=[])

    @classmethod
    def failure_result(cls, message: str, errors: Optional[List[str]] = None) -> "AppResult":
        """Create a failure result."""
        return cls(success=False, message=message, errors=errors or [])

    def to_dict(self) -> dict:
        return {"success": self.success, "message": self.message, "errors": list(self.errors)}


@dataclass(frozen=True)
class C2stScore:
    """Mean held-out accuracy over the cross-validation folds."""
    value: float
    per_fold: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError("C2ST score must lie in [0, 1]")
        if self.per_fold and abs(float(np.mean(self.per_fold)) - self.value) > 1e-12:
            raise ValueError("C2ST score must equal the mean of the fold scores")

    @classmethod
    def from_folds(cls, per_fold: List[float]) -> "C2stScore":
        folds = tuple(float(score) for score in per_fold)
        return cls(value=float(np.mean(folds)), per_fold=folds)
