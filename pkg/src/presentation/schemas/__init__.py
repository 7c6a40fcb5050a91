"""
Pydantic schemas for configuration files and request/response models.
Presentation layer - handles data validation and serialization.
"""
from .schemas import (
    AppResultResponse,
    C2stSchema,
    EpsilonRuleSchema,
    ExperimentConfigSchema,
    InferenceRequest,
    LineSearchSchema,
    ListProblemsResponse,
    MaskSchema,
    OptimizerSchema,
    ProblemInfo,
    RunReportResponse,
    SamplingSchema,
    build_experiment_config,
    deep_merge,
)

__all__ = [
    "AppResultResponse",
    "C2stSchema",
    "EpsilonRuleSchema",
    "ExperimentConfigSchema",
    "InferenceRequest",
    "LineSearchSchema",
    "ListProblemsResponse",
    "MaskSchema",
    "OptimizerSchema",
    "ProblemInfo",
    "RunReportResponse",
    "SamplingSchema",
    "build_experiment_config",
    "deep_merge",
]
