"""
Core simulation operations: forward simulation, Jacobians and masked distances.
Application layer - shared by every stage of the inference pipeline.
"""
import logging
from typing import Optional

import numpy as np

from src.domain.entities.experiment import BudgetLedger
from src.domain.entities.inference import Mask
from src.domain.entities.noise import NoiseDraw
from src.domain.errors import CapabilityError, SchemaError
from src.domain.interfaces.simulators import DifferentiableSimulator

logger = logging.getLogger(__name__)

FINITE_DIFFERENCE_STEP = 1e-5


def simulate(sim: DifferentiableSimulator, theta, noise: NoiseDraw) -> np.ndarray:
    """y = g(θ, u) for a single parameter vector and noise draw."""
    return sim.simulate(theta, noise)


def finite_diff_jacobian(sim: DifferentiableSimulator, theta, noise: NoiseDraw,
                         h: float = FINITE_DIFFERENCE_STEP) -> np.ndarray:
    """Central-difference Jacobian, shape (D_y, D)."""
    if h <= 0:
        raise ValueError("Finite-difference step must be positive")
    theta = np.asarray(theta, dtype=float)
    dim = theta.shape[0]
    offsets = h * np.eye(dim)
    points = np.concatenate([theta + offsets, theta - offsets])
    outputs = sim.simulate_batch(points, noise.repeat(2 * dim))
    return ((outputs[:dim] - outputs[dim:]) / (2.0 * h)).T


def jacobian(sim: DifferentiableSimulator, theta, noise: NoiseDraw,
             allow_finite_differences: bool = False) -> np.ndarray:
    """Analytic Jacobian ∂g/∂θ, shape (D_y, D)."""
    if sim.has_analytic_jacobian:
        return sim.jacobian(theta, noise)
    if allow_finite_differences:
        return finite_diff_jacobian(sim, theta, noise)
    raise CapabilityError(f"{type(sim).__name__} offers no analytic Jacobian and finite differences are disabled")


def masked_distance(sim: DifferentiableSimulator, theta, noise: NoiseDraw, y_obs, mask: Mask) -> float:
    """Σ over active k of (g_k(θ, u) - y_obs_k)²."""
    mask.require_active()
    y_obs = np.asarray(y_obs, dtype=float)
    if y_obs.shape != (sim.output_dim,) or mask.output_dim != sim.output_dim:
        raise SchemaError("Observation and mask must have the simulator's output dimension")
    residual = (simulate(sim, theta, noise) - y_obs)[mask.active]
    return float(np.dot(residual, residual))


class DistanceFunction:
    """
    Row-wise masked distances for a batch of (noise draw, observation) pairs.

    Row b of a parameter batch is evaluated under noise row b and observation
    row b. Every evaluation is recorded as one vectorized call in the ledger.
    """

    def __init__(self, sim: DifferentiableSimulator, noise: NoiseDraw, observations,
                 mask: Mask, ledger: Optional[BudgetLedger] = None):
        mask.require_active()
        self.sim = sim
        self.noise = noise.as_batch()
        observations = np.asarray(observations, dtype=float)
        if observations.ndim == 1:
            observations = np.broadcast_to(observations, (self.noise.batch_size, observations.shape[0]))
        if observations.shape != (self.noise.batch_size, sim.output_dim):
            raise SchemaError("Observations must provide one row of length D_y per noise row")
        self.observations = observations
        self.mask = mask
        self.ledger = ledger

    @property
    def size(self) -> int:
        return self.noise.batch_size

    def _rows(self, rows):
        if rows is None:
            return self.noise, self.observations
        return self.noise.take(rows), self.observations[rows]

    def residuals(self, theta, rows=None) -> np.ndarray:
        noise, observations = self._rows(rows)
        outputs = self.sim.simulate_batch(theta, noise)
        if self.ledger is not None:
            self.ledger.record(outputs.shape[0])
        return np.where(self.mask.active, outputs - observations, 0.0)

    def __call__(self, theta, rows=None) -> np.ndarray:
        residual = self.residuals(theta, rows)
        return np.einsum("bk,bk->b", residual, residual)

    def value_and_gradient(self, theta, rows=None) -> tuple:
        """Distances and ∇d = 2 Jᵀ(m ⊙ (g - y)), computed in one vectorized call."""
        noise, _ = self._rows(rows)
        residual = self.residuals(theta, rows)
        gradient = 2.0 * self.sim.vjp_batch(theta, noise, residual)
        return np.einsum("bk,bk->b", residual, residual), gradient
