"""
Gaussian location simulators: the single-mode base model, the symmetric
two-mode mixture, and their variants with appended distractor outputs.
Infrastructure layer - concrete simulators.
"""
import numpy as np

from src.domain.entities.noise import NoiseDraw, NoiseSchema
from src.domain.value_objects.prior import UniformBoxPrior
from src.infrastructure.simulators.base import BenchmarkSimulator

MOG_MU = 1.0
MOG_SIGMA = 0.2
PRIOR_BOUND = 3.0
DISTRACTOR_COUNT = 18
DISTRACTOR_BOUND = 3.0


class GaussianLocationSimulator(BenchmarkSimulator):
    """
    y = θ + s·μ + σ·z, followed by ``distractors`` θ-independent coordinates.

    With ``two_modes`` the sign s ∈ {+1, -1} is a frozen selector in the noise
    draw; otherwise s = +1. Distractor values are stored in the noise uniforms.
    """

    def __init__(self, dim: int, two_modes: bool = False, distractors: int = 0,
                 mu: float = MOG_MU, sigma: float = MOG_SIGMA):
        super().__init__(
            param_dim=dim,
            output_dim=dim + distractors,
            prior=UniformBoxPrior.cube(dim, -PRIOR_BOUND, PRIOR_BOUND),
            noise_schema=NoiseSchema(gaussian=dim, selectors=1 if two_modes else 0, uniforms=distractors),
        )
        self.two_modes = two_modes
        self.distractors = distractors
        self.mu = mu
        self.sigma = sigma

    def sample_noise(self, rng: np.random.Generator, size: int) -> NoiseDraw:
        gaussian = rng.standard_normal((size, self.param_dim))
        if self.two_modes:
            selectors = rng.choice(np.array([-1, 1]), size=(size, 1))
        else:
            selectors = self._empty(size, 0, np.int64)
        uniforms = rng.uniform(-DISTRACTOR_BOUND, DISTRACTOR_BOUND, size=(size, self.distractors))
        return self._draw(gaussian, selectors, uniforms)

    def _signs(self, noise: NoiseDraw) -> np.ndarray:
        if self.two_modes:
            return noise.selectors[:, :1].astype(float)
        return np.ones((noise.batch_size, 1))

    def _simulate(self, theta: np.ndarray, noise: NoiseDraw) -> np.ndarray:
        informative = theta + self._signs(noise) * self.mu + self.sigma * noise.gaussian
        if self.distractors == 0:
            return informative
        return np.concatenate([informative, noise.uniforms], axis=1)

    def _jacobian(self, theta: np.ndarray, noise: NoiseDraw) -> np.ndarray:
        jac = np.zeros((theta.shape[0], self.output_dim, self.param_dim))
        jac[:, np.arange(self.param_dim), np.arange(self.param_dim)] = 1.0
        return jac

    def _vjp(self, theta: np.ndarray, noise: NoiseDraw, cotangent: np.ndarray) -> np.ndarray:
        return cotangent[:, :self.param_dim].copy()

    def _jacobian_row_norms(self, theta: np.ndarray, noise: NoiseDraw) -> np.ndarray:
        norms = np.zeros((theta.shape[0], self.output_dim))
        norms[:, :self.param_dim] = 1.0
        return norms
