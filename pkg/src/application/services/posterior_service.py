"""
Mixture proposal, importance weights and posterior estimates.
Application layer - sampling stage of the pipeline.
"""
import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.application.services.simulation_service import DistanceFunction
from src.domain.entities.experiment import BudgetLedger
from src.domain.entities.inference import (
    BOX_TOLERANCE,
    Hyperbox,
    Mask,
    MixtureComponent,
    OptimizationRecord,
    ProposalMixture,
    WeightedSamples,
)
from src.domain.errors import EmptyAcceptedSetError, ProposalConsistencyError, ZeroWeightsError
from src.domain.interfaces.simulators import DifferentiableSimulator
from src.domain.value_objects.prior import UniformBoxPrior

logger = logging.getLogger(__name__)

_CHUNK_ENTRIES = 4_000_000


class _StackedComponents:
    """Array view of a mixture, with components grouped by shared axis frames."""

    def __init__(self, mix: ProposalMixture):
        boxes = mix.boxes
        self.centers = np.stack([b.center for b in boxes])
        self.lower = np.stack([b.lower for b in boxes])
        self.upper = np.stack([b.upper for b in boxes])
        self.log_volumes = np.array([b.log_volume for b in boxes])

        frames: List[np.ndarray] = []
        frame_index: Dict[int, int] = {}
        by_content: Dict[bytes, int] = {}
        self.group = np.empty(len(boxes), dtype=np.int64)
        for k, box in enumerate(boxes):
            g = frame_index.get(id(box.axes))
            if g is None:
                key = box.axes.tobytes()
                g = by_content.get(key)
                if g is None:
                    g = len(frames)
                    frames.append(box.axes)
                    by_content[key] = g
                frame_index[id(box.axes)] = g
            self.group[k] = g
        self.frames = frames
        self.members = [np.flatnonzero(self.group == g) for g in range(len(frames))]
        self.identity = [bool(np.array_equal(f, np.eye(f.shape[0]))) for f in frames]
        self.local_centers = np.empty_like(self.centers)
        for g, members in enumerate(self.members):
            self.local_centers[members] = self.centers[members] @ frames[g]

    def inside(self, thetas: np.ndarray) -> np.ndarray:
        """(P, K) membership matrix."""
        size, components = thetas.shape[0], self.centers.shape[0]
        result = np.zeros((size, components), dtype=bool)
        for g, members in enumerate(self.members):
            projected = thetas if self.identity[g] else thetas @ self.frames[g]
            per_row = max(1, members.size * thetas.shape[1])
            chunk = max(1, _CHUNK_ENTRIES // per_row)
            for start in range(0, size, chunk):
                stop = min(start + chunk, size)
                local = projected[start:stop, None, :] - self.local_centers[members][None, :, :]
                slack = BOX_TOLERANCE * (1.0 + np.abs(local))
                result[start:stop, members] = np.all(
                    (local >= -self.lower[members] - slack) & (local <= self.upper[members] + slack), axis=2
                )
        return result


def build_proposal(records: Sequence[OptimizationRecord], boxes: Sequence[Hyperbox]) -> ProposalMixture:
    """Equal-weight mixture over the boxes of accepted records."""
    if len(records) != len(boxes):
        raise ValueError("records and boxes must pair up one to one")
    components = tuple(
        MixtureComponent(box=box, obs_index=record.obs_index, seed_index=record.seed_index)
        for record, box in zip(records, boxes)
        if record.accepted
    )
    if not components:
        raise EmptyAcceptedSetError("No accepted boxes to build a proposal from")
    return ProposalMixture(components=components)


def _stacked(mix: ProposalMixture) -> _StackedComponents:
    cached = getattr(mix, "_stacked_cache", None)
    if cached is None:
        cached = _StackedComponents(mix)
        object.__setattr__(mix, "_stacked_cache", cached)
    return cached


def proposal_log_density(mix: ProposalMixture, thetas) -> np.ndarray:
    """log q(θ) for a (P, D) batch; -inf outside every box."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    stacked = _stacked(mix)
    inside = stacked.inside(thetas)
    with np.errstate(divide="ignore"):
        log_terms = np.where(inside, -stacked.log_volumes[None, :], -np.inf)
    peak = np.max(log_terms, axis=1)
    finite = np.isfinite(peak)
    result = np.full(thetas.shape[0], -np.inf)
    if finite.any():
        shifted = np.exp(log_terms[finite] - peak[finite, None])
        result[finite] = peak[finite] + np.log(shifted.sum(axis=1)) - np.log(mix.size)
    return result


def proposal_density(mix: ProposalMixture, theta):
    """q(θ): average of the component densities. Scalar in, scalar out."""
    values = np.exp(proposal_log_density(mix, theta))
    return float(values[0]) if np.ndim(theta) == 1 else values


def sample_proposal(mix: ProposalMixture, count: int, rng: np.random.Generator,
                    return_components: bool = False):
    """Draw ``count`` points: a uniform component choice, then a uniform point in its box."""
    if count < 1:
        raise ValueError("count must be at least 1")
    stacked = _stacked(mix)
    chosen = rng.integers(0, mix.size, size=count)
    unit = rng.random(size=(count, mix.dim))
    local = -stacked.lower[chosen] + unit * (stacked.lower[chosen] + stacked.upper[chosen])
    thetas = np.empty((count, mix.dim))
    for g, frame in enumerate(stacked.frames):
        rows = np.flatnonzero(stacked.group[chosen] == g)
        if rows.size == 0:
            continue
        offsets = local[rows] if stacked.identity[g] else local[rows] @ frame.T
        thetas[rows] = stacked.centers[chosen[rows]] + offsets
    return (thetas, chosen) if return_components else thetas


def region_counts(
    sim: DifferentiableSimulator,
    thetas,
    records: Sequence[OptimizationRecord],
    observations: Sequence,
    epsilon: float,
    mask: Mask,
    ledger: Optional[BudgetLedger] = None,
) -> np.ndarray:
    """
    count[p, n] = number of accepted seeds i with d_i^n(θ_p) <= ε, by direct simulation.

    One vectorized call per accepted (n, i) covers every candidate.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    counts = np.zeros((thetas.shape[0], len(observations)), dtype=np.int64)
    for record in records:
        if not record.accepted:
            continue
        distance = DistanceFunction(
            sim, record.noise.repeat(thetas.shape[0]), observations[record.obs_index], mask, ledger
        )
        counts[:, record.obs_index] += distance(thetas) <= epsilon
    return counts


def hyperbox_region_counts(mix: ProposalMixture, thetas, observation_count: int) -> np.ndarray:
    """count[p, n] = number of observation-n boxes containing θ_p."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    inside = _stacked(mix).inside(thetas)
    counts = np.zeros((thetas.shape[0], observation_count), dtype=np.int64)
    for k, component in enumerate(mix.components):
        counts[:, component.obs_index] += inside[:, k]
    return counts


def compute_weights(thetas, prior: UniformBoxPrior, mix: ProposalMixture, counts,
                    log_proposal: Optional[np.ndarray] = None) -> WeightedSamples:
    """w_p = p(θ_p)/q(θ_p) · Π_n count[p, n], held in log space."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    if log_proposal is None:
        log_proposal = proposal_log_density(mix, thetas)
    if not np.all(np.isfinite(log_proposal)):
        raise ProposalConsistencyError(
            f"{int((~np.isfinite(log_proposal)).sum())} proposal draws have zero proposal density"
        )
    return WeightedSamples(
        thetas=thetas,
        log_proposal=log_proposal,
        log_prior=prior.log_density(thetas),
        counts=np.atleast_2d(counts),
    )


def resample(samples: WeightedSamples, count: int, rng: np.random.Generator) -> np.ndarray:
    """Multinomial resampling with replacement, probability proportional to weight."""
    probabilities = samples.normalized_weights()
    if probabilities is None:
        raise ZeroWeightsError()
    chosen = rng.choice(len(samples), size=count, replace=True, p=probabilities)
    return samples.thetas[chosen]


def posterior_expectation(samples: WeightedSamples, h: Callable[[np.ndarray], float]) -> float:
    """Self-normalized estimate Σ w h(θ) / Σ w."""
    probabilities = samples.normalized_weights()
    if probabilities is None:
        raise ZeroWeightsError()
    positive = np.flatnonzero(probabilities > 0)
    values = np.array([float(h(samples.thetas[p])) for p in positive])
    return float(np.dot(probabilities[positive], values))


def effective_sample_size(weights) -> float:
    """(Σw)² / Σw²; zero when every weight is zero."""
    if isinstance(weights, WeightedSamples):
        normalized = weights.normalized_weights()
        return 0.0 if normalized is None else float(1.0 / np.sum(normalized ** 2))
    weights = np.asarray(weights, dtype=float)
    total = weights.sum()
    if total <= 0:
        return 0.0
    return float(total ** 2 / np.sum(weights ** 2))


def acceptance_diagnostics(samples: WeightedSamples) -> Tuple[float, List[float]]:
    """Share of candidates with positive weight and per-observation share with a positive count."""
    positive = float(samples.positive.mean())
    per_observation = [float(v) for v in (samples.counts > 0).mean(axis=0)]
    return positive, per_observation
