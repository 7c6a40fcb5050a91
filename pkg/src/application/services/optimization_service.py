"""
Deterministic per-seed minimizations, seed filtering and ε selection.
Application layer - optimization stage of the pipeline.
"""
import logging
import math
from dataclasses import replace
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.application.services.simulation_service import DistanceFunction
from src.domain.entities.experiment import BudgetLedger
from src.domain.entities.inference import Mask, OptimizationRecord
from src.domain.entities.noise import NoiseDraw
from src.domain.errors import EmptyAcceptedSetError
from src.domain.interfaces.simulators import DifferentiableSimulator
from src.domain.value_objects.common import (
    EPSILON_FLOOR,
    EpsilonMode,
    EpsilonRule,
    InitStrategy,
    OptimizerConfig,
)
from src.domain.value_objects.streams import RandomStreams, StreamPurpose

logger = logging.getLogger(__name__)


class Adam:
    """Adam with bias-corrected moments over a dict of parameter arrays."""

    def __init__(self, lr: float = 0.001, beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.m: Dict[str, np.ndarray] = {}
        self.v: Dict[str, np.ndarray] = {}
        self.t = 0

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]) -> None:
        """Update ``params`` in place."""
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        step_size = self.lr / bc1

        for k in params:
            g = grads[k]
            if k not in self.m:
                self.m[k] = np.zeros_like(params[k])
                self.v[k] = np.zeros_like(params[k])

            self.m[k] *= self.beta1
            self.m[k] += (1.0 - self.beta1) * g
            self.v[k] *= self.beta2
            self.v[k] += (1.0 - self.beta2) * (g * g)

            denom = np.sqrt(self.v[k] * (1.0 / bc2)) + self.epsilon
            params[k] -= step_size * self.m[k] / denom


def _optimize_batch(
    sim: DifferentiableSimulator,
    distance: DistanceFunction,
    theta0: np.ndarray,
    cfg: OptimizerConfig,
) -> tuple:
    """
    Adam on every row of ``theta0`` at once.

    Returns (best θ, best d, failed flags). The best iterate is tracked over
    θ0, every intermediate iterate and the final one.
    """
    theta = np.array(theta0, dtype=float, copy=True)
    best_theta = theta.copy()
    best_d = np.full(theta.shape[0], np.inf)
    failed = np.zeros(theta.shape[0], dtype=bool)
    optimizer = Adam(lr=cfg.learning_rate, beta1=cfg.beta1, beta2=cfg.beta2, epsilon=cfg.adam_epsilon)
    params = {"theta": theta}

    for _ in range(cfg.steps):
        d, grad = distance.value_and_gradient(params["theta"])
        improved = np.isfinite(d) & (d < best_d)
        best_theta[improved] = params["theta"][improved]
        best_d[improved] = d[improved]

        bad = ~np.all(np.isfinite(grad), axis=1)
        if bad.any():
            newly = bad & ~failed
            if newly.any():
                logger.warning(f"Non-finite gradient in {int(newly.sum())} optimizations; freezing them")
            failed |= bad
        grad = np.where(failed[:, None], 0.0, grad)

        optimizer.step(params, {"theta": grad})
        if cfg.project_to_prior:
            params["theta"] = sim.prior.clip(params["theta"])

    d = distance(params["theta"])
    improved = np.isfinite(d) & (d < best_d)
    best_theta[improved] = params["theta"][improved]
    best_d[improved] = d[improved]
    failed |= ~np.isfinite(best_d)
    best_d = np.where(np.isfinite(best_d), best_d, np.inf)
    return best_theta, best_d, failed


def optimize_seed(
    sim: DifferentiableSimulator,
    noise: NoiseDraw,
    y_obs,
    mask: Mask,
    theta0,
    cfg: OptimizerConfig,
    obs_index: int = 0,
    seed_index: int = 0,
    ledger: Optional[BudgetLedger] = None,
) -> OptimizationRecord:
    """Minimize the masked distance for one noise draw, starting from θ0."""
    theta0 = np.asarray(theta0, dtype=float)
    if not np.all(np.isfinite(theta0)):
        raise ValueError("theta0 must be finite")
    distance = DistanceFunction(sim, noise, y_obs, mask, ledger)
    best_theta, best_d, failed = _optimize_batch(sim, distance, theta0[None, :], cfg)
    return OptimizationRecord(
        obs_index=obs_index,
        seed_index=seed_index,
        theta_star=best_theta[0],
        d_star=float(best_d[0]),
        noise=noise,
        theta0=theta0,
        failed=bool(failed[0]),
    )


def initial_points(sim: DifferentiableSimulator, cfg: OptimizerConfig, streams: RandomStreams,
                   obs_index: int, count: int) -> np.ndarray:
    if cfg.init == InitStrategy.PRIOR_MEAN:
        return np.tile(sim.prior.mean, (count, 1))
    return np.stack([
        sim.prior.sample(streams.generator(StreamPurpose.INIT, obs_index, i), 1)[0] for i in range(count)
    ])


def draw_noise_table(sim: DifferentiableSimulator, streams: RandomStreams, obs_index: int,
                     count: int, share_noise: bool = False) -> NoiseDraw:
    """S noise draws for observation n, one counter-keyed stream per (n, i)."""
    key = 0 if share_noise else obs_index
    return NoiseDraw.concatenate([
        sim.sample_noise(streams.generator(StreamPurpose.NOISE, key, i), 1) for i in range(count)
    ])


def run_optimizations(
    sim: DifferentiableSimulator,
    observations: Sequence,
    seeds: int,
    mask: Mask,
    cfg: OptimizerConfig,
    streams: RandomStreams,
    ledger: Optional[BudgetLedger] = None,
    share_noise: bool = False,
) -> List[OptimizationRecord]:
    """
    N·S optimizations, batched per observation.

    Noise and θ0 for (n, i) come from their own streams, so the table does not
    depend on batching. ``share_noise`` reuses the n = 0 noise streams for
    every observation.
    """
    if seeds < 1:
        raise ValueError("seeds must be at least 1")
    if len(observations) < 1:
        raise ValueError("at least one observation is required")
    mask.require_active()

    records: List[OptimizationRecord] = []
    for n, y_obs in enumerate(observations):
        noise = draw_noise_table(sim, streams, n, seeds, share_noise)
        theta0 = initial_points(sim, cfg, streams, 0 if share_noise else n, seeds)
        distance = DistanceFunction(sim, noise, y_obs, mask, ledger)
        best_theta, best_d, failed = _optimize_batch(sim, distance, theta0, cfg)
        if ledger is not None:
            ledger.record_fused()
        for i in range(seeds):
            records.append(OptimizationRecord(
                obs_index=n,
                seed_index=i,
                theta_star=best_theta[i],
                d_star=float(best_d[i]),
                noise=noise.row(i),
                theta0=theta0[i],
                failed=bool(failed[i]),
            ))
        logger.info(
            f"Observation {n}: {seeds} optimizations done, median d* {float(np.median(best_d)):.3g}, "
            f"{int(failed.sum())} failed"
        )
    return records


def filter_seeds(records: Sequence[OptimizationRecord], pcg_to_keep: float) -> List[OptimizationRecord]:
    """
    Per observation, accept the ceil(pcg·S) records with smallest d*.

    Ties go to the lower seed index; failed records are never accepted.
    """
    if not 0.0 < pcg_to_keep <= 1.0:
        raise ValueError("pcg_to_keep must lie in (0, 1]")
    by_observation: Dict[int, List[OptimizationRecord]] = {}
    for record in records:
        by_observation.setdefault(record.obs_index, []).append(record)

    accepted_keys = set()
    for n, group in by_observation.items():
        keep = math.ceil(pcg_to_keep * len(group) - 1e-9)
        candidates = sorted((r for r in group if not r.failed), key=lambda r: (r.d_star, r.seed_index))
        accepted_keys.update(r.key for r in candidates[:keep])

    return [replace(record, accepted=record.key in accepted_keys) for record in records]


def select_epsilon(records: Sequence[OptimizationRecord], rule: EpsilonRule) -> float:
    """ε from the accepted records: twice the worst accepted d*, or a fixed value; floored at 1e-8."""
    accepted = [r for r in records if r.accepted]
    if not accepted:
        raise EmptyAcceptedSetError("No accepted optimization records to select epsilon from")
    if rule.mode == EpsilonMode.FIXED:
        epsilon = float(rule.fixed_value)
    else:
        epsilon = 2.0 * max(r.d_star for r in accepted)
    return max(epsilon, EPSILON_FLOOR)
