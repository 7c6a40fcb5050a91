"""
Two-moons simulator.
Infrastructure layer - concrete simulator.

    y = (r cos α + 0.25 - |θ1 + θ2|/√2,  r sin α + (-θ1 + θ2)/√2)

with α ~ U(-π/2, π/2) stored as a noise uniform and r = 0.1 + 0.01·z
built from a stored standard-normal innovation z.
"""
import numpy as np

from src.domain.entities.noise import NoiseDraw, NoiseSchema
from src.domain.value_objects.prior import UniformBoxPrior
from src.infrastructure.simulators.base import BenchmarkSimulator, subgradient_sign

RADIUS_MEAN = 0.1
RADIUS_STD = 0.01
OFFSET = 0.25
PRIOR_BOUND = 1.0
_SQRT_HALF = 1.0 / np.sqrt(2.0)


class TwoMoonsSimulator(BenchmarkSimulator):

    def __init__(self):
        super().__init__(
            param_dim=2,
            output_dim=2,
            prior=UniformBoxPrior.cube(2, -PRIOR_BOUND, PRIOR_BOUND),
            noise_schema=NoiseSchema(gaussian=1, selectors=0, uniforms=1),
        )

    def sample_noise(self, rng: np.random.Generator, size: int) -> NoiseDraw:
        gaussian = rng.standard_normal((size, 1))
        uniforms = rng.uniform(-np.pi / 2, np.pi / 2, size=(size, 1))
        return self._draw(gaussian, self._empty(size, 0, np.int64), uniforms)

    def _simulate(self, theta: np.ndarray, noise: NoiseDraw) -> np.ndarray:
        alpha = noise.uniforms[:, 0]
        radius = RADIUS_MEAN + RADIUS_STD * noise.gaussian[:, 0]
        total = theta[:, 0] + theta[:, 1]
        first = radius * np.cos(alpha) + OFFSET - np.abs(total) * _SQRT_HALF
        second = radius * np.sin(alpha) + (-theta[:, 0] + theta[:, 1]) * _SQRT_HALF
        return np.stack([first, second], axis=1)

    def _jacobian(self, theta: np.ndarray, noise: NoiseDraw) -> np.ndarray:
        slope = -subgradient_sign(theta[:, 0] + theta[:, 1]) * _SQRT_HALF
        jac = np.empty((theta.shape[0], 2, 2))
        jac[:, 0, 0] = slope
        jac[:, 0, 1] = slope
        jac[:, 1, 0] = -_SQRT_HALF
        jac[:, 1, 1] = _SQRT_HALF
        return jac
