"""
Application service for end-to-end inference runs.
Following clean architecture principles - orchestrates the pipeline services, depends on domain interfaces.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from src.application.services.c2st_service import c2st
from src.application.services.optimization_service import filter_seeds, run_optimizations, select_epsilon
from src.application.services.posterior_service import (
    acceptance_diagnostics,
    build_proposal,
    compute_weights,
    effective_sample_size,
    hyperbox_region_counts,
    region_counts,
    resample,
    sample_proposal,
)
from src.application.services.region_service import build_hyperboxes
from src.application.services.sensitivity_service import compute_mask
from src.domain.entities.experiment import (
    BenchmarkProblem,
    BudgetLedger,
    ExperimentConfig,
    RepetitionReport,
    RunReport,
)
from src.domain.entities.inference import Hyperbox, Mask, OptimizationRecord, WeightedSamples
from src.domain.errors import OracleUnavailableError, R2omcError
from src.domain.interfaces.repositories import IOracleSampleRepository, IResultsRepository
from src.domain.interfaces.services import IInferenceService
from src.domain.value_objects.common import AppResult, IndicatorMode
from src.domain.value_objects.streams import RandomStreams, StreamPurpose, derive_seed, stream

logger = logging.getLogger(__name__)

LOW_ESS_FRACTION = 0.01


@dataclass
class InferenceArtifacts:
    """Intermediate products of one run, kept for exports and tests."""
    mask: Optional[Mask] = None
    records: List[OptimizationRecord] = field(default_factory=list)
    boxes: List[Hyperbox] = field(default_factory=list)
    weighted: Optional[WeightedSamples] = None
    samples: Optional[np.ndarray] = None


class InferenceService(IInferenceService):
    """Runs the robust optimization Monte Carlo pipeline and scores it against reference posteriors."""

    def __init__(
        self,
        oracle_repository: Optional[IOracleSampleRepository] = None,
        results_repository: Optional[IResultsRepository] = None,
        workers: int = 1,
    ):
        self._oracle_repo = oracle_repository
        self._results_repo = results_repository
        self._workers = max(1, workers)

    def _compute_mask(self, problem: BenchmarkProblem, config: ExperimentConfig, streams: RandomStreams,
                      ledger: BudgetLedger) -> Mask:
        if not config.use_mask:
            return Mask.full(problem.simulator.output_dim)
        settings = config.mask
        return compute_mask(
            problem.simulator, settings.n_theta, settings.n_noise, settings.threshold,
            streams.generator(StreamPurpose.MASK), ledger,
        )

    def _pipeline(self, problem: BenchmarkProblem, config: ExperimentConfig, streams: RandomStreams,
                  ledger: BudgetLedger, report: RepetitionReport) -> InferenceArtifacts:
        sim = problem.simulator
        artifacts = InferenceArtifacts()

        artifacts.mask = self._compute_mask(problem, config, streams, ledger)
        report.mask = artifacts.mask.summary()

        records = run_optimizations(
            sim, problem.observations, config.seeds, artifacts.mask, config.optimizer, streams, ledger,
            share_noise=config.share_noise,
        )
        records = filter_seeds(records, config.pcg_to_keep)
        artifacts.records = records
        accepted = [r for r in records if r.accepted]

        epsilon = select_epsilon(records, config.epsilon_rule)
        weighting_epsilon = select_epsilon(records, config.weighting_rule)
        report.epsilon = epsilon
        report.weighting_epsilon = weighting_epsilon
        logger.info(
            f"Accepted {len(accepted)} of {len(records)} optimizations; "
            f"epsilon {epsilon:.4g} ({config.epsilon_rule.describe()}), weighting epsilon {weighting_epsilon:.4g}"
        )

        boxes = build_hyperboxes(sim, accepted, problem.observations, artifacts.mask, config.line_search,
                                 epsilon, ledger)
        artifacts.boxes = boxes
        mixture = build_proposal(accepted, boxes)

        sampling = config.sampling
        # A fixed sampling seed pins the proposal draws and the resampling, independent of the run seed.
        sampling_streams = streams if sampling.seed is None else RandomStreams(sampling.seed)
        thetas = sample_proposal(mixture, sampling.candidate_count,
                                 sampling_streams.generator(StreamPurpose.PROPOSAL))
        if sampling.indicator == IndicatorMode.HYPERBOX:
            counts = hyperbox_region_counts(mixture, thetas, problem.observation_count)
        else:
            counts = region_counts(sim, thetas, records, problem.observations, weighting_epsilon,
                                   artifacts.mask, ledger)
        weighted = compute_weights(thetas, problem.prior, mixture, counts)
        artifacts.weighted = weighted

        ess = effective_sample_size(weighted)
        positive, per_observation = acceptance_diagnostics(weighted)
        report.ess = ess
        report.acceptance = {
            "accepted_seeds": len(accepted),
            "total_seeds": len(records),
            "positive_weight_fraction": positive,
            "per_observation_positive_fraction": per_observation,
        }
        report.diagnostics.update({
            "eigen_fallbacks": sum(1 for b in boxes if b.fallback),
            "failed_optimizations": sum(1 for r in records if r.failed),
            "mean_log_box_volume": float(np.mean([b.log_volume for b in boxes])),
        })
        logger.info(f"Weights computed: {positive:.1%} of {len(weighted)} candidates positive, ESS {ess:.1f}")
        if ess < LOW_ESS_FRACTION * len(weighted):
            logger.warning(f"Low effective sample size {ess:.1f} for {len(weighted)} candidates")

        artifacts.samples = resample(weighted, sampling.final_count,
                                     sampling_streams.generator(StreamPurpose.RESAMPLE))
        logger.info(f"Resampled {sampling.final_count} posterior samples")
        return artifacts

    def run_repetition(self, problem: BenchmarkProblem, config: ExperimentConfig, repetition: int = 0,
                       run_seed: Optional[int] = None,
                       export_dir: Optional[Path] = None) -> Tuple[InferenceArtifacts, RepetitionReport]:
        """One pipeline run; module errors become a failed report instead of escaping."""
        if run_seed is None:
            run_seed = config.master_seed
        ledger = BudgetLedger()
        report = RepetitionReport(repetition=repetition, run_seed=run_seed,
                                  status=AppResult.success_result("Inference completed"), budget=ledger)
        streams = RandomStreams(run_seed)
        artifacts = InferenceArtifacts()
        started = time.perf_counter()
        try:
            artifacts = self._pipeline(problem, config, streams, ledger, report)
        except (R2omcError, ValueError, FloatingPointError) as e:
            logger.error(f"Inference run {repetition} on {problem.problem_id} failed: {e}", exc_info=True)
            report.status = AppResult.failure_result(f"Inference failed: {e}", errors=[type(e).__name__])
        report.runtime_seconds = time.perf_counter() - started

        if export_dir is not None and self._results_repo is not None and artifacts.samples is not None:
            self._results_repo.write_run_exports(
                Path(export_dir), artifacts.samples, artifacts.weighted, artifacts.records, artifacts.boxes
            )
        return artifacts, report

    def run_inference(self, problem: BenchmarkProblem, config: ExperimentConfig,
                      run_seed: Optional[int] = None,
                      export_dir: Optional[Path] = None) -> Tuple[Optional[np.ndarray], RunReport]:
        artifacts, repetition = self.run_repetition(problem, config, 0, run_seed, export_dir)
        return artifacts.samples, RunReport(config=config, repetitions=[repetition])

    def reference_samples(self, problem: BenchmarkProblem, count: int, oracle_seed: int) -> np.ndarray:
        """Reference posterior samples, from the cache when present."""
        if self._oracle_repo is not None:
            cached = self._oracle_repo.get(problem.problem_id, problem.dim, oracle_seed, count)
            if cached is not None:
                return cached
        logger.info(f"Drawing {count} reference samples for {problem.problem_id} (D={problem.dim})")
        samples = problem.ground_truth_samples(count, stream(oracle_seed, StreamPurpose.ORACLE, 0))
        if self._oracle_repo is not None:
            self._oracle_repo.save(problem.problem_id, problem.dim, oracle_seed, samples)
        return samples

    def _score(self, problem: BenchmarkProblem, config: ExperimentConfig, samples: np.ndarray,
               reference: Optional[np.ndarray], report: RepetitionReport) -> None:
        if reference is not None:
            try:
                report.c2st = c2st(samples, reference[:samples.shape[0]], config.c2st).value
            except ValueError as e:
                logger.warning(f"C2ST not available for repetition {report.repetition}: {e}")
                report.diagnostics["c2st_unavailable"] = str(e)
        try:
            mean, _ = problem.ground_truth.moments()
        except OracleUnavailableError:
            return
        report.diagnostics["posterior_mean_mae"] = float(np.mean(np.abs(samples.mean(axis=0) - mean)))

    def run_experiment(self, problem: BenchmarkProblem, config: ExperimentConfig,
                       export_dir: Optional[Path] = None) -> RunReport:
        reference = None
        try:
            reference = self.reference_samples(problem, config.sampling.final_count, config.oracle_seed)
        except OracleUnavailableError as e:
            logger.warning(f"No reference samples for {problem.problem_id}: {e}")

        def run(repetition: int) -> RepetitionReport:
            run_seed = derive_seed(config.master_seed, StreamPurpose.REPETITION, repetition)
            target = None if export_dir is None else Path(export_dir) / f"rep_{repetition}"
            artifacts, report = self.run_repetition(problem, config, repetition, run_seed, target)
            if artifacts.samples is not None:
                self._score(problem, config, artifacts.samples, reference, report)
            return report

        indices = range(config.repetitions)
        if self._workers > 1 and config.repetitions > 1:
            with ThreadPoolExecutor(max_workers=self._workers) as pool:
                reports = list(pool.map(run, indices))
        else:
            reports = [run(r) for r in indices]

        run_report = RunReport(config=config, repetitions=reports)
        logger.info(
            f"Experiment {problem.problem_id} (D={problem.dim}, S={config.seeds}): "
            f"{run_report.status.message}, mean C2ST {run_report.mean_c2st}"
        )
        return run_report
