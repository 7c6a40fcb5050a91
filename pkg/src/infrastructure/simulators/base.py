"""
Shared plumbing for the benchmark simulators.
Infrastructure layer - concrete simulator support.
"""
import numpy as np

from src.domain.entities.noise import NoiseDraw, NoiseSchema
from src.domain.interfaces.simulators import DifferentiableSimulator
from src.domain.value_objects.prior import UniformBoxPrior


def subgradient_sign(x: np.ndarray) -> np.ndarray:
    """sign(x) with sign(0) = 0."""
    return np.sign(x)


class BenchmarkSimulator(DifferentiableSimulator):
    """Stores dimensions, prior and noise schema for concrete simulators."""

    def __init__(self, param_dim: int, output_dim: int, prior: UniformBoxPrior, noise_schema: NoiseSchema):
        if param_dim < 1 or output_dim < 1:
            raise ValueError("Simulator dimensions must be at least 1")
        if prior.dim != param_dim:
            raise ValueError("Prior dimension must equal the parameter dimension")
        self._param_dim = param_dim
        self._output_dim = output_dim
        self._prior = prior
        self._noise_schema = noise_schema

    @property
    def param_dim(self) -> int:
        return self._param_dim

    @property
    def output_dim(self) -> int:
        return self._output_dim

    @property
    def prior(self) -> UniformBoxPrior:
        return self._prior

    @property
    def noise_schema(self) -> NoiseSchema:
        return self._noise_schema

    def _draw(self, gaussian: np.ndarray, selectors: np.ndarray, uniforms: np.ndarray) -> NoiseDraw:
        return NoiseDraw(gaussian=gaussian, selectors=selectors, uniforms=uniforms)

    def _empty(self, size: int, width: int, dtype=float) -> np.ndarray:
        return np.zeros((size, width), dtype=dtype)
