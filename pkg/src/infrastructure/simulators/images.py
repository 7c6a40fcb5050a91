"""
Camera models over square grayscale images: a pixel-wise affine camera and a
checkerboard-filter camera, both with additive Gaussian noise.
Infrastructure layer - concrete simulators.
"""
from functools import cached_property

import numpy as np

from src.domain.entities.noise import NoiseDraw, NoiseSchema
from src.domain.value_objects.prior import UniformBoxPrior
from src.infrastructure.simulators.base import BenchmarkSimulator

IMAGE_SIDE = 28
IMAGE_NOISE_STD = 0.1
PIXEL_GAIN = 0.8
PIXEL_OFFSET = 0.1

# 3x3 alternating ±1 kernel, +1 at the corners and the center.
CHECKERBOARD_KERNEL = np.array([[(-1.0) ** (i + j) for j in range(3)] for i in range(3)])


def checkerboard_filter(images: np.ndarray) -> np.ndarray:
    """Stride-1, zero-padded 3x3 checkerboard filter over a (B, side, side) batch."""
    side = images.shape[-1]
    padded = np.pad(images, ((0, 0), (1, 1), (1, 1)))
    out = np.zeros_like(images)
    for i in range(3):
        for j in range(3):
            out += CHECKERBOARD_KERNEL[i, j] * padded[:, i:i + side, j:j + side]
    return out


class _ImageCamera(BenchmarkSimulator):

    def __init__(self, side: int, sigma: float):
        if side < 1:
            raise ValueError("Image side must be at least 1")
        if sigma < 0:
            raise ValueError("Noise standard deviation must be non-negative")
        pixels = side * side
        super().__init__(
            param_dim=pixels,
            output_dim=pixels,
            prior=UniformBoxPrior.cube(pixels, 0.0, 1.0),
            noise_schema=NoiseSchema(gaussian=pixels, selectors=0, uniforms=0),
        )
        self.side = side
        self.sigma = sigma

    def sample_noise(self, rng: np.random.Generator, size: int) -> NoiseDraw:
        gaussian = rng.standard_normal((size, self.param_dim))
        return self._draw(gaussian, self._empty(size, 0, np.int64), self._empty(size, 0))


class PixelwiseCamera(_ImageCamera):
    """y = a·θ + b + σ·z, pixel by pixel."""

    def __init__(self, gain: float = PIXEL_GAIN, offset: float = PIXEL_OFFSET,
                 sigma: float = IMAGE_NOISE_STD, side: int = IMAGE_SIDE):
        if gain == 0:
            raise ValueError("Pixel-wise camera gain must be non-zero")
        super().__init__(side, sigma)
        self.gain = gain
        self.offset = offset

    def _simulate(self, theta: np.ndarray, noise: NoiseDraw) -> np.ndarray:
        return self.gain * theta + self.offset + self.sigma * noise.gaussian

    def _jacobian(self, theta: np.ndarray, noise: NoiseDraw) -> np.ndarray:
        return np.broadcast_to(self.gain * np.eye(self.param_dim), (theta.shape[0], self.param_dim, self.param_dim)).copy()

    def _vjp(self, theta: np.ndarray, noise: NoiseDraw, cotangent: np.ndarray) -> np.ndarray:
        return self.gain * cotangent

    def _jacobian_row_norms(self, theta: np.ndarray, noise: NoiseDraw) -> np.ndarray:
        return np.full((theta.shape[0], self.output_dim), abs(self.gain))


class CheckerboardCamera(_ImageCamera):
    """y = K θ + σ·z with K the checkerboard filter."""

    def _filter(self, flat: np.ndarray) -> np.ndarray:
        images = flat.reshape(flat.shape[0], self.side, self.side)
        return checkerboard_filter(images).reshape(flat.shape[0], self.param_dim)

    @cached_property
    def operator(self) -> np.ndarray:
        """Dense (D, D) matrix of the filter."""
        return self._filter(np.eye(self.param_dim)).T

    def _simulate(self, theta: np.ndarray, noise: NoiseDraw) -> np.ndarray:
        return self._filter(theta) + self.sigma * noise.gaussian

    def _jacobian(self, theta: np.ndarray, noise: NoiseDraw) -> np.ndarray:
        return np.broadcast_to(self.operator, (theta.shape[0], self.param_dim, self.param_dim)).copy()

    def _vjp(self, theta: np.ndarray, noise: NoiseDraw, cotangent: np.ndarray) -> np.ndarray:
        # The kernel is point-symmetric, so the zero-padded filter is its own transpose.
        return self._filter(cotangent)

    def _jacobian_row_norms(self, theta: np.ndarray, noise: NoiseDraw) -> np.ndarray:
        # Every in-bounds tap contributes ±1, so a row norm is sqrt(in-bounds taps).
        inside = np.pad(np.ones((self.side, self.side)), 1)
        taps = np.zeros((self.side, self.side))
        for i in range(3):
            for j in range(3):
                taps += inside[i:i + self.side, j:j + self.side]
        return np.broadcast_to(np.sqrt(taps.reshape(-1)), (theta.shape[0], self.output_dim)).copy()
