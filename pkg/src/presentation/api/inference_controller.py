"""
FastAPI controller for inference runs and the problem catalogue.
Presentation layer - handles HTTP requests and responses.
"""
import logging

from fastapi import APIRouter, Depends, HTTPException
from fastapi.concurrency import run_in_threadpool
from pydantic import ValidationError

from ...application.services.inference_service import InferenceService
from ...domain.errors import ConfigurationError
from ...infrastructure.container import get_container
from ...infrastructure.simulators.registry import SCALABLE_PROBLEMS, list_problems, make_problem
from ..schemas import (
    AppResultResponse,
    InferenceRequest,
    ListProblemsResponse,
    ProblemInfo,
    RunReportResponse,
    build_experiment_config,
)

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/api", tags=["Inference"])


def get_inference_service() -> InferenceService:
    """Dependency injection for the inference service."""
    return get_container().get_inference_service()


@router.get("/problems", response_model=ListProblemsResponse)
async def get_problems():
    """List registered benchmark problems with their default dimensions."""
    problems = []
    for problem_id in list_problems():
        problem = await run_in_threadpool(make_problem, problem_id)
        problems.append(ProblemInfo(
            problem_id=problem_id,
            dim=problem.dim,
            output_dim=problem.simulator.output_dim,
            observation_count=problem.observation_count,
            oracle=problem.ground_truth.kind.value,
            scalable=problem_id in SCALABLE_PROBLEMS,
        ))
    return ListProblemsResponse(problems=problems)


@router.post("/inference", response_model=RunReportResponse)
async def run_inference(
    request: InferenceRequest,
    service: InferenceService = Depends(get_inference_service),
):
    """Run the inference pipeline once and return its report."""
    try:
        problem = await run_in_threadpool(
            make_problem, request.problem_id, request.dim, request.oracle_seed, **request.problem_options
        )
        config = build_experiment_config(problem, request.config)
    except ValidationError as e:
        raise HTTPException(status_code=422, detail=e.errors(include_url=False))
    except (ConfigurationError, TypeError) as e:
        raise HTTPException(status_code=400, detail=str(e))

    logger.info(f"Running inference on {problem.problem_id} (D={problem.dim}, S={config.seeds})")
    samples, report = await run_in_threadpool(service.run_inference, problem, config, request.run_seed)
    status = report.status
    return RunReportResponse(
        result=AppResultResponse(success=status.success, message=status.message, errors=status.errors),
        report=report.to_dict(),
        sample_count=0 if samples is None else int(samples.shape[0]),
        posterior_mean=None if samples is None else samples.mean(axis=0).tolist(),
    )
