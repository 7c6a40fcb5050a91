"""
Experiment entities: benchmark problems, experiment configuration, budget
accounting and run reports.
Domain layer - entities.
"""
import threading
from dataclasses import dataclass, field, fields, replace, is_dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.domain.errors import ConfigurationError, OracleUnavailableError
from src.domain.interfaces.oracles import GroundTruthSampler
from src.domain.interfaces.simulators import DifferentiableSimulator
from src.domain.value_objects.common import (
    AppResult,
    C2stConfig,
    EpsilonRule,
    LineSearchParams,
    MaskSettings,
    OracleKind,
    OptimizerConfig,
    SamplingConfig,
)
from src.domain.value_objects.prior import UniformBoxPrior


def to_plain(value: Any) -> Any:
    """Convert dataclasses, enums and arrays into JSON-friendly values."""
    if is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_plain(getattr(value, f.name)) for f in fields(value)}
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    return value


@dataclass(frozen=True, eq=False)
class BenchmarkProblem:
    """A simulator, its prior, the observed data and a reference posterior."""
    problem_id: str
    simulator: DifferentiableSimulator
    observations: Tuple[np.ndarray, ...]
    ground_truth: GroundTruthSampler
    true_theta: Optional[np.ndarray] = None
    recommended: Dict[str, Any] = field(default_factory=dict)
    options: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        observations = tuple(np.asarray(y, dtype=float).reshape(-1) for y in self.observations)
        if not observations:
            raise ValueError("A benchmark problem needs at least one observation")
        for y in observations:
            if y.shape[0] != self.simulator.output_dim:
                raise ValueError(
                    f"Observation of length {y.shape[0]} does not match output dimension "
                    f"{self.simulator.output_dim}"
                )
        object.__setattr__(self, "observations", observations)

    @property
    def prior(self) -> UniformBoxPrior:
        return self.simulator.prior

    @property
    def dim(self) -> int:
        return self.simulator.param_dim

    @property
    def observation_count(self) -> int:
        return len(self.observations)

    def ground_truth_samples(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Reference posterior samples; every one lies inside the prior box."""
        if self.ground_truth.kind == OracleKind.NONE:
            raise OracleUnavailableError(f"Problem {self.problem_id} has no ground-truth posterior")
        samples = np.asarray(self.ground_truth.sample(count, rng), dtype=float)
        outside = int((~self.prior.contains(samples)).sum())
        if outside:
            raise OracleUnavailableError(
                f"Reference sampler for {self.problem_id} produced {outside} samples outside the prior"
            )
        return samples


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one inference experiment needs, with validated sub-configs."""
    problem_id: str
    dim: Optional[int] = None
    seeds: int = 1000
    pcg_to_keep: float = 0.8
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    line_search: LineSearchParams = field(default_factory=LineSearchParams)
    epsilon_rule: EpsilonRule = field(default_factory=EpsilonRule)
    weighting_epsilon_rule: Optional[EpsilonRule] = None
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    mask: MaskSettings = field(default_factory=MaskSettings)
    use_mask: bool = True
    share_noise: bool = False
    repetitions: int = 5
    master_seed: int = 0
    output_dir: str = "results"
    c2st: C2stConfig = field(default_factory=C2stConfig)
    oracle_seed: int = 0
    problem_options: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.problem_id:
            raise ConfigurationError("problem_id is required")
        if self.dim is not None and self.dim < 1:
            raise ConfigurationError("dim must be at least 1")
        if self.seeds < 1:
            raise ConfigurationError("seeds must be at least 1")
        if not 0.0 < self.pcg_to_keep <= 1.0:
            raise ConfigurationError("pcg_to_keep must lie in (0, 1]")
        if self.repetitions < 1:
            raise ConfigurationError("repetitions must be at least 1")
        if self.master_seed < 0 or self.oracle_seed < 0:
            raise ConfigurationError("seeds for random streams must be non-negative")

    @classmethod
    def for_problem(cls, problem: BenchmarkProblem, **overrides) -> "ExperimentConfig":
        """The problem's recommended settings, then ``overrides``."""
        settings = dict(problem.recommended)
        settings.update(overrides)
        settings["problem_id"] = problem.problem_id
        settings.setdefault("dim", problem.dim)
        return cls(**settings)

    @property
    def weighting_rule(self) -> EpsilonRule:
        return self.weighting_epsilon_rule or self.epsilon_rule

    def with_overrides(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return to_plain(self)


class BudgetLedger:
    """Counts independent vectorized simulator calls and (θ, u) instance evaluations."""

    def __init__(self):
        self.vectorized_calls = 0
        self.instance_evaluations = 0
        self.fused_calls = 0
        self._lock = threading.Lock()

    def record(self, instances: int) -> None:
        """One vectorized call over ``instances`` (θ, u) pairs."""
        with self._lock:
            self.vectorized_calls += 1
            self.instance_evaluations += int(instances)

    def record_fused(self, count: int = 1) -> None:
        """Informational count treating a fused optimization loop as one execution."""
        with self._lock:
            self.fused_calls += count

    def merge(self, other: "BudgetLedger") -> None:
        with self._lock:
            self.vectorized_calls += other.vectorized_calls
            self.instance_evaluations += other.instance_evaluations
            self.fused_calls += other.fused_calls

    def to_dict(self) -> dict:
        return {
            "vectorized_calls": self.vectorized_calls,
            "instance_evaluations": self.instance_evaluations,
            "fused_calls": self.fused_calls,
        }


@dataclass
class RepetitionReport:
    """Outcome of one inference repetition."""
    repetition: int
    run_seed: int
    status: AppResult
    mask: Optional[dict] = None
    acceptance: Dict[str, Any] = field(default_factory=dict)
    epsilon: Optional[float] = None
    weighting_epsilon: Optional[float] = None
    ess: Optional[float] = None
    c2st: Optional[float] = None
    runtime_seconds: float = 0.0
    budget: BudgetLedger = field(default_factory=BudgetLedger)
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def succeeded(self) -> bool:
        return self.status.success

    def to_dict(self) -> dict:
        return {
            "repetition": self.repetition,
            "run_seed": self.run_seed,
            "status": self.status.to_dict(),
            "mask": self.mask,
            "acceptance": to_plain(self.acceptance),
            "epsilon": self.epsilon,
            "weighting_epsilon": self.weighting_epsilon,
            "ess": self.ess,
            "c2st": self.c2st,
            "runtime_seconds": self.runtime_seconds,
            "budget": self.budget.to_dict(),
            "diagnostics": to_plain(self.diagnostics),
        }


@dataclass
class RunReport:
    """Config echo plus one entry per repetition."""
    config: ExperimentConfig
    repetitions: List[RepetitionReport] = field(default_factory=list)

    @property
    def status(self) -> AppResult:
        failures = [r for r in self.repetitions if not r.succeeded]
        if not self.repetitions:
            return AppResult.failure_result("No repetitions were run")
        if failures:
            return AppResult.failure_result(
                f"{len(failures)} of {len(self.repetitions)} repetitions failed",
                errors=[r.status.message for r in failures],
            )
        return AppResult.success_result(f"{len(self.repetitions)} repetitions completed")

    @property
    def c2st_scores(self) -> List[float]:
        return [r.c2st for r in self.repetitions if r.c2st is not None]

    @property
    def mean_c2st(self) -> Optional[float]:
        scores = self.c2st_scores
        return float(np.mean(scores)) if scores else None

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "status": self.status.to_dict(),
            "mean_c2st": self.mean_c2st,
            "repetitions": [r.to_dict() for r in self.repetitions],
        }


@dataclass(frozen=True)
class BenchmarkRow:
    """One row of the versioned results CSV."""
    problem: str
    method: str
    dim: int
    budget: int
    rep: int
    run_seed: int
    c2st: Optional[float]
    runtime_seconds: Optional[float]
    vectorized_calls: int
    instance_evaluations: int

    COLUMNS = (
        "problem", "method", "dim", "budget", "rep", "run_seed", "c2st",
        "runtime_seconds", "vectorized_calls", "instance_evaluations",
    )

    def sort_key(self) -> tuple:
        return self.problem, self.dim, self.budget, self.rep
