"""
Pydantic schemas for configuration files and request/response models.
Presentation layer - handles data validation and serialization.
"""
import copy
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ...domain.entities.experiment import BenchmarkProblem, ExperimentConfig, to_plain
from ...domain.value_objects.common import (
    AxesMode,
    C2stConfig,
    EpsilonMode,
    EpsilonRule,
    IndicatorMode,
    InitStrategy,
    LineSearchParams,
    MaskSettings,
    OptimizerConfig,
    SamplingConfig,
)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class OptimizerSchema(_Strict):
    learning_rate: float = Field(0.01, gt=0, description="Adam step size")
    steps: int = Field(50, ge=1, description="Adam iterations per seed")
    beta1: float = Field(0.9, ge=0, lt=1)
    beta2: float = Field(0.999, ge=0, lt=1)
    adam_epsilon: float = Field(1e-8, gt=0)
    init: InitStrategy = InitStrategy.PRIOR_SAMPLE
    project_to_prior: bool = False

    def to_domain(self) -> OptimizerConfig:
        return OptimizerConfig(**self.model_dump())


class EpsilonRuleSchema(_Strict):
    mode: EpsilonMode = EpsilonMode.TWICE_WORST_ACCEPTED
    fixed_value: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def fixed_needs_value(self):
        if self.mode == EpsilonMode.FIXED and self.fixed_value is None:
            raise ValueError("fixed_value is required when mode is 'fixed'")
        return self

    def to_domain(self) -> EpsilonRule:
        return EpsilonRule(**self.model_dump())


class LineSearchSchema(_Strict):
    step: float = Field(0.1, gt=0, description="Line-search step η")
    max_steps: int = Field(100, ge=1, description="Steps L before giving up")
    refinements: int = Field(1, ge=1, description="Passes R, each halving η")
    clip_to_prior: bool = False
    axes: AxesMode = AxesMode.EIGEN
    jacobi_max_dim: int = Field(64, ge=1)

    def to_domain(self) -> LineSearchParams:
        return LineSearchParams(**self.model_dump())


class SamplingSchema(_Strict):
    candidate_count: int = Field(2000, ge=1, description="Proposal draws P")
    final_count: int = Field(1000, ge=1, description="Resampled posterior draws M")
    indicator: IndicatorMode = IndicatorMode.SIMULATOR
    seed: Optional[int] = Field(None, ge=0)

    @model_validator(mode="after")
    def enough_candidates(self):
        if self.candidate_count < self.final_count:
            raise ValueError("candidate_count must be at least final_count")
        return self

    def to_domain(self) -> SamplingConfig:
        return SamplingConfig(**self.model_dump())


class MaskSchema(_Strict):
    n_theta: int = Field(50, ge=1)
    n_noise: int = Field(50, ge=1)
    threshold: float = Field(MaskSettings().threshold, ge=0)

    def to_domain(self) -> MaskSettings:
        return MaskSettings(**self.model_dump())


class C2stSchema(_Strict):
    hidden_layers: int = Field(2, ge=1)
    width_per_dim: int = Field(10, ge=1)
    max_width: int = Field(128, ge=1)
    folds: int = Field(5, ge=2)
    epochs: int = Field(100, ge=1)
    learning_rate: float = Field(1e-3, gt=0)
    batch_size: int = Field(128, ge=1)
    seed: int = Field(0, ge=0)
    workers: int = Field(1, ge=1)

    def to_domain(self) -> C2stConfig:
        return C2stConfig(**self.model_dump())


class ExperimentConfigSchema(_Strict):
    """JSON experiment configuration; CLI flags override file values."""
    problem_id: str = Field(..., min_length=1, description="Registered problem id")
    dim: Optional[int] = Field(None, ge=1, description="Parameter dimension for scalable problems")
    seeds: int = Field(1000, ge=1, description="Optimization seeds S per observation")
    pcg_to_keep: float = Field(0.8, gt=0, le=1)
    optimizer: OptimizerSchema = Field(default_factory=OptimizerSchema)
    line_search: LineSearchSchema = Field(default_factory=LineSearchSchema)
    epsilon_rule: EpsilonRuleSchema = Field(default_factory=EpsilonRuleSchema)
    weighting_epsilon_rule: Optional[EpsilonRuleSchema] = None
    sampling: SamplingSchema = Field(default_factory=SamplingSchema)
    mask: MaskSchema = Field(default_factory=MaskSchema)
    use_mask: bool = True
    share_noise: bool = False
    repetitions: int = Field(5, ge=1)
    master_seed: int = Field(0, ge=0)
    output_dir: str = "results"
    c2st: C2stSchema = Field(default_factory=C2stSchema)
    oracle_seed: int = Field(0, ge=0)
    problem_options: Dict[str, Any] = Field(default_factory=dict)

    def to_domain(self) -> ExperimentConfig:
        return ExperimentConfig(
            problem_id=self.problem_id,
            dim=self.dim,
            seeds=self.seeds,
            pcg_to_keep=self.pcg_to_keep,
            optimizer=self.optimizer.to_domain(),
            line_search=self.line_search.to_domain(),
            epsilon_rule=self.epsilon_rule.to_domain(),
            weighting_epsilon_rule=(
                self.weighting_epsilon_rule.to_domain() if self.weighting_epsilon_rule else None
            ),
            sampling=self.sampling.to_domain(),
            mask=self.mask.to_domain(),
            use_mask=self.use_mask,
            share_noise=self.share_noise,
            repetitions=self.repetitions,
            master_seed=self.master_seed,
            output_dir=self.output_dir,
            c2st=self.c2st.to_domain(),
            oracle_seed=self.oracle_seed,
            problem_options=dict(self.problem_options),
        )


def deep_merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Nested dictionary merge; values in ``overrides`` win."""
    merged = copy.deepcopy(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def build_experiment_config(problem: BenchmarkProblem, overrides: Dict[str, Any]) -> ExperimentConfig:
    """The problem's recommended settings, overlaid with a (partial) config dictionary, validated."""
    base = to_plain(problem.recommended)
    base["problem_id"] = problem.problem_id
    base["dim"] = problem.dim
    merged = deep_merge(base, overrides)
    merged["problem_id"] = problem.problem_id
    merged["dim"] = problem.dim
    return ExperimentConfigSchema.model_validate(merged).to_domain()


class InferenceRequest(_Strict):
    """Body of POST /api/inference: a problem id plus any config fields to override."""
    problem_id: str = Field(..., min_length=1)
    dim: Optional[int] = Field(None, ge=1)
    config: Dict[str, Any] = Field(default_factory=dict, description="Partial ExperimentConfigSchema")
    problem_options: Dict[str, Any] = Field(default_factory=dict)
    oracle_seed: int = Field(0, ge=0)
    run_seed: Optional[int] = Field(None, ge=0)


class AppResultResponse(BaseModel):
    success: bool
    message: str
    errors: Optional[List[str]] = None


class RunReportResponse(BaseModel):
    result: AppResultResponse
    report: Dict[str, Any]
    sample_count: int = 0
    posterior_mean: Optional[List[float]] = None


class ProblemInfo(BaseModel):
    problem_id: str
    dim: int
    output_dim: int
    observation_count: int
    oracle: str
    scalable: bool


class ListProblemsResponse(BaseModel):
    problems: List[ProblemInfo]
