"""
Simulator contract.
Following clean architecture principles - abstract contract implemented by infrastructure simulators.

A simulator is a deterministic map g(θ, u) once the noise draw u is frozen.
Implementations work on batches: ``theta`` has shape (B, D) and the noise
batch has B rows. The single-point helpers wrap the batched calls.
"""
from abc import ABC, abstractmethod

import numpy as np

from src.domain.entities.noise import NoiseDraw, NoiseSchema
from src.domain.errors import CapabilityError, SchemaError
from src.domain.value_objects.prior import UniformBoxPrior


class DifferentiableSimulator(ABC):
    """Abstract reparameterized simulator with an analytic Jacobian."""

    has_analytic_jacobian: bool = True

    @property
    @abstractmethod
    def param_dim(self) -> int:
        """Parameter dimension D."""
        pass

    @property
    @abstractmethod
    def output_dim(self) -> int:
        """Output dimension D_y."""
        pass

    @property
    @abstractmethod
    def prior(self) -> UniformBoxPrior:
        """Uniform box prior over θ."""
        pass

    @property
    @abstractmethod
    def noise_schema(self) -> NoiseSchema:
        """Sizes of the noise arrays consumed per draw."""
        pass

    @abstractmethod
    def sample_noise(self, rng: np.random.Generator, size: int) -> NoiseDraw:
        """Draw a batch of ``size`` independent noise records."""
        pass

    @abstractmethod
    def _simulate(self, theta: np.ndarray, noise: NoiseDraw) -> np.ndarray:
        """Batched forward map, (B, D) x noise batch -> (B, D_y)."""
        pass

    def _jacobian(self, theta: np.ndarray, noise: NoiseDraw) -> np.ndarray:
        """Batched Jacobian, (B, D_y, D)."""
        raise CapabilityError(f"{type(self).__name__} has no analytic Jacobian")

    def _vjp(self, theta: np.ndarray, noise: NoiseDraw, cotangent: np.ndarray) -> np.ndarray:
        """Batched Jᵀr, (B, D)."""
        return np.einsum("bkd,bk->bd", self._jacobian(theta, noise), cotangent)

    def _jacobian_row_norms(self, theta: np.ndarray, noise: NoiseDraw) -> np.ndarray:
        """Batched Euclidean norms of the Jacobian rows, (B, D_y)."""
        return np.linalg.norm(self._jacobian(theta, noise), axis=2)

    # Validated public entry points.

    def _check(self, theta, noise: NoiseDraw) -> tuple:
        theta = np.asarray(theta, dtype=float)
        if theta.ndim != 2 or theta.shape[1] != self.param_dim:
            raise SchemaError(
                f"Expected theta of shape (B, {self.param_dim}), got {theta.shape}"
            )
        if not isinstance(noise, NoiseDraw):
            raise SchemaError("noise must be a NoiseDraw")
        noise = noise.as_batch()
        if noise.schema != self.noise_schema:
            raise SchemaError(f"Noise schema {noise.schema} does not match {self.noise_schema}")
        if noise.batch_size != theta.shape[0]:
            raise SchemaError(
                f"Noise batch of {noise.batch_size} does not match {theta.shape[0]} parameter rows"
            )
        return theta, noise

    def simulate_batch(self, theta, noise: NoiseDraw) -> np.ndarray:
        theta, noise = self._check(theta, noise)
        return self._simulate(theta, noise)

    def jacobian_batch(self, theta, noise: NoiseDraw) -> np.ndarray:
        theta, noise = self._check(theta, noise)
        return self._jacobian(theta, noise)

    def vjp_batch(self, theta, noise: NoiseDraw, cotangent) -> np.ndarray:
        theta, noise = self._check(theta, noise)
        cotangent = np.asarray(cotangent, dtype=float)
        if cotangent.shape != (theta.shape[0], self.output_dim):
            raise SchemaError(f"Cotangent must have shape ({theta.shape[0]}, {self.output_dim})")
        return self._vjp(theta, noise, cotangent)

    def jacobian_row_norms_batch(self, theta, noise: NoiseDraw) -> np.ndarray:
        theta, noise = self._check(theta, noise)
        return self._jacobian_row_norms(theta, noise)

    def _single(self, theta, noise: NoiseDraw) -> tuple:
        theta = np.asarray(theta, dtype=float)
        if theta.ndim != 1:
            raise SchemaError("Single-point calls take a 1-D parameter vector")
        if noise.is_batch:
            raise SchemaError("Single-point calls take a single noise draw")
        return theta[None, :], noise.as_batch()

    def simulate(self, theta, noise: NoiseDraw) -> np.ndarray:
        return self.simulate_batch(*self._single(theta, noise))[0]

    def jacobian(self, theta, noise: NoiseDraw) -> np.ndarray:
        return self.jacobian_batch(*self._single(theta, noise))[0]
