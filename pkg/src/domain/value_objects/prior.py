"""
Uniform box prior over the parameter space.
Domain layer - value object.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class UniformBoxPrior:
    """U(lower, upper) over a D-dimensional box."""
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.array(self.lower, dtype=float, copy=True).reshape(-1)
        upper = np.array(self.upper, dtype=float, copy=True).reshape(-1)
        if lower.shape != upper.shape or lower.size == 0:
            raise ValueError("Prior bounds must be non-empty vectors of equal length")
        if not np.all(lower < upper):
            raise ValueError("Prior lower bounds must be strictly below upper bounds")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def cube(cls, dim: int, low: float, high: float) -> "UniformBoxPrior":
        return cls(lower=np.full(dim, low), upper=np.full(dim, high))

    @property
    def dim(self) -> int:
        return int(self.lower.shape[0])

    @property
    def log_volume(self) -> float:
        return float(np.sum(np.log(self.upper - self.lower)))

    @property
    def mean(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def contains(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return np.all((theta >= self.lower) & (theta <= self.upper), axis=-1)

    def log_density(self, theta) -> np.ndarray:
        inside = self.contains(theta)
        return np.where(inside, -self.log_volume, -np.inf)

    def density(self, theta) -> np.ndarray:
        return np.exp(self.log_density(theta))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(size, self.dim))

    def clip(self, theta) -> np.ndarray:
        return np.clip(theta, self.lower, self.upper)
