"""
Simple-likelihood complex-posterior (SLCP) simulator.
Infrastructure layer - concrete simulator.

Each draw is y = m_θ + L_θ z with m_θ = (θ1, θ2), s1 = θ3², s2 = θ4²,
ρ = tanh θ5 and the Cholesky factor
    L = [[s1, 0], [ρ s2, s2 √(1 - ρ²)]]
of S_θ = [[s1², ρ s1 s2], [ρ s1 s2, s2²]].
"""
import numpy as np

from src.domain.entities.noise import NoiseDraw, NoiseSchema
from src.domain.value_objects.prior import UniformBoxPrior
from src.infrastructure.simulators.base import BenchmarkSimulator

SLCP_PARAM_DIM = 5
SLCP_PRIOR_BOUND = 3.0
SLCP_DRAWS = 4
SLCP_DISTRACTORS_PER_DRAW = 23
DISTRACTOR_BOUND = 3.0


def slcp_moments(theta: np.ndarray) -> tuple:
    """Mean (B, 2), scales s1, s2 and correlation ρ for a (B, 5) batch."""
    mean = theta[:, :2]
    s1 = theta[:, 2] ** 2
    s2 = theta[:, 3] ** 2
    rho = np.tanh(theta[:, 4])
    return mean, s1, s2, rho


class SlcpSimulator(BenchmarkSimulator):
    """
    ``draws`` i.i.d. two-dimensional draws per call, each followed by
    ``distractors_per_draw`` θ-independent coordinates.
    """

    def __init__(self, draws: int = SLCP_DRAWS, distractors_per_draw: int = 0):
        if draws < 1:
            raise ValueError("draws must be at least 1")
        block = 2 + distractors_per_draw
        super().__init__(
            param_dim=SLCP_PARAM_DIM,
            output_dim=draws * block,
            prior=UniformBoxPrior.cube(SLCP_PARAM_DIM, -SLCP_PRIOR_BOUND, SLCP_PRIOR_BOUND),
            noise_schema=NoiseSchema(gaussian=2 * draws, selectors=0, uniforms=draws * distractors_per_draw),
        )
        self.draws = draws
        self.distractors_per_draw = distractors_per_draw
        self.block = block

    def sample_noise(self, rng: np.random.Generator, size: int) -> NoiseDraw:
        gaussian = rng.standard_normal((size, 2 * self.draws))
        uniforms = rng.uniform(
            -DISTRACTOR_BOUND, DISTRACTOR_BOUND, size=(size, self.draws * self.distractors_per_draw)
        )
        return self._draw(gaussian, self._empty(size, 0, np.int64), uniforms)

    def _innovations(self, noise: NoiseDraw) -> tuple:
        z = noise.gaussian.reshape(noise.batch_size, self.draws, 2)
        return z[:, :, 0], z[:, :, 1]

    def _simulate(self, theta: np.ndarray, noise: NoiseDraw) -> np.ndarray:
        mean, s1, s2, rho = slcp_moments(theta)
        z1, z2 = self._innovations(noise)
        root = np.sqrt(1.0 - rho ** 2)[:, None]
        y1 = mean[:, :1] + s1[:, None] * z1
        y2 = mean[:, 1:2] + s2[:, None] * (rho[:, None] * z1 + root * z2)
        out = np.zeros((theta.shape[0], self.draws, self.block))
        out[:, :, 0] = y1
        out[:, :, 1] = y2
        if self.distractors_per_draw:
            out[:, :, 2:] = noise.uniforms.reshape(noise.batch_size, self.draws, self.distractors_per_draw)
        return out.reshape(theta.shape[0], self.output_dim)

    def _jacobian(self, theta: np.ndarray, noise: NoiseDraw) -> np.ndarray:
        _, _, s2, rho = slcp_moments(theta)
        z1, z2 = self._innovations(noise)
        root = np.sqrt(1.0 - rho ** 2)[:, None]
        batch = theta.shape[0]
        jac = np.zeros((batch, self.draws, self.block, SLCP_PARAM_DIM))
        jac[:, :, 0, 0] = 1.0
        jac[:, :, 1, 1] = 1.0
        jac[:, :, 0, 2] = 2.0 * theta[:, 2:3] * z1
        jac[:, :, 1, 3] = 2.0 * theta[:, 3:4] * (rho[:, None] * z1 + root * z2)
        jac[:, :, 1, 4] = s2[:, None] * ((1.0 - rho[:, None] ** 2) * z1 - rho[:, None] * root * z2)
        return jac.reshape(batch, self.output_dim, SLCP_PARAM_DIM)


def slcp_log_likelihood(theta: np.ndarray, observations: np.ndarray) -> np.ndarray:
    """
    Gaussian log-likelihood of (K, 2) observed pairs for a (B, 5) batch.

    Singular covariances give -inf.
    """
    theta = np.atleast_2d(theta)
    observations = np.asarray(observations, dtype=float).reshape(-1, 2)
    mean, s1, s2, rho = slcp_moments(theta)
    one_minus = 1.0 - rho ** 2
    valid = (s1 > 0) & (s2 > 0) & (one_minus > 0)
    safe_s1 = np.where(valid, s1, 1.0)
    safe_s2 = np.where(valid, s2, 1.0)
    safe_one_minus = np.where(valid, one_minus, 1.0)

    r1 = (observations[None, :, 0] - mean[:, :1]) / safe_s1[:, None]
    r2 = (observations[None, :, 1] - mean[:, 1:2]) / safe_s2[:, None]
    quadratic = (r1 ** 2 - 2.0 * rho[:, None] * r1 * r2 + r2 ** 2) / safe_one_minus[:, None]
    log_det = 2.0 * np.log(safe_s1) + 2.0 * np.log(safe_s2) + np.log(safe_one_minus)
    per_pair = -np.log(2.0 * np.pi) - 0.5 * log_det[:, None] - 0.5 * quadratic
    return np.where(valid, per_pair.sum(axis=1), -np.inf)
