"""
Frozen nuisance draws that turn a stochastic simulator into a deterministic map.
Domain layer - entity.
"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from src.domain.errors import SchemaError


def _frozen(values, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class NoiseSchema:
    """Number of entries of each kind a simulator consumes per draw."""
    gaussian: int = 0
    selectors: int = 0
    uniforms: int = 0

    def __post_init__(self):
        if min(self.gaussian, self.selectors, self.uniforms) < 0:
            raise ValueError("Noise schema sizes must be non-negative")


@dataclass(frozen=True, eq=False)
class NoiseDraw:
    """
    The nuisance record u.

    A single draw stores 1-D arrays; a batch stores 2-D arrays whose first axis
    indexes the draw. Arrays are copied and made read-only on construction.
    """
    gaussian: np.ndarray
    selectors: np.ndarray
    uniforms: np.ndarray

    def __post_init__(self):
        gaussian = _frozen(self.gaussian, float)
        selectors = _frozen(self.selectors, np.int64)
        uniforms = _frozen(self.uniforms, float)
        if not gaussian.ndim == selectors.ndim == uniforms.ndim or gaussian.ndim not in (1, 2):
            raise SchemaError("Noise arrays must all be 1-D (single draw) or all 2-D (batch)")
        if gaussian.ndim == 2 and not gaussian.shape[0] == selectors.shape[0] == uniforms.shape[0]:
            raise SchemaError("Noise batch arrays must share their leading dimension")
        object.__setattr__(self, "gaussian", gaussian)
        object.__setattr__(self, "selectors", selectors)
        object.__setattr__(self, "uniforms", uniforms)

    @classmethod
    def single(cls, gaussian: Sequence[float] = (), selectors: Sequence[int] = (),
               uniforms: Sequence[float] = ()) -> "NoiseDraw":
        return cls(
            gaussian=np.asarray(gaussian, dtype=float).reshape(-1),
            selectors=np.asarray(selectors, dtype=np.int64).reshape(-1),
            uniforms=np.asarray(uniforms, dtype=float).reshape(-1),
        )

    @classmethod
    def stack(cls, draws: Sequence["NoiseDraw"]) -> "NoiseDraw":
        """Stack single draws into a batch."""
        if not draws:
            raise SchemaError("Cannot stack an empty sequence of noise draws")
        return cls(
            gaussian=np.stack([d.gaussian for d in draws]),
            selectors=np.stack([d.selectors for d in draws]),
            uniforms=np.stack([d.uniforms for d in draws]),
        )

    @classmethod
    def concatenate(cls, batches: Sequence["NoiseDraw"]) -> "NoiseDraw":
        return cls(
            gaussian=np.concatenate([b.as_batch().gaussian for b in batches]),
            selectors=np.concatenate([b.as_batch().selectors for b in batches]),
            uniforms=np.concatenate([b.as_batch().uniforms for b in batches]),
        )

    @property
    def is_batch(self) -> bool:
        return self.gaussian.ndim == 2

    @property
    def batch_size(self) -> int:
        return self.gaussian.shape[0] if self.is_batch else 1

    @property
    def schema(self) -> NoiseSchema:
        return NoiseSchema(self.gaussian.shape[-1], self.selectors.shape[-1], self.uniforms.shape[-1])

    def as_batch(self) -> "NoiseDraw":
        if self.is_batch:
            return self
        return NoiseDraw(self.gaussian[None, :], self.selectors[None, :], self.uniforms[None, :])

    def row(self, index: int) -> "NoiseDraw":
        if not self.is_batch:
            raise SchemaError("row() requires a batch of noise draws")
        return NoiseDraw(self.gaussian[index], self.selectors[index], self.uniforms[index])

    def take(self, indices) -> "NoiseDraw":
        """Select (and possibly repeat) batch rows."""
        batch = self.as_batch()
        indices = np.asarray(indices, dtype=np.int64)
        return NoiseDraw(batch.gaussian[indices], batch.selectors[indices], batch.uniforms[indices])

    def repeat(self, count: int) -> "NoiseDraw":
        """Repeat a single draw ``count`` times as a batch."""
        if self.is_batch:
            raise SchemaError("repeat() requires a single noise draw")
        return self.take(np.zeros(count, dtype=np.int64))

    def equals(self, other: "NoiseDraw") -> bool:
        return (
            np.array_equal(self.gaussian, other.gaussian)
            and np.array_equal(self.selectors, other.selectors)
            and np.array_equal(self.uniforms, other.uniforms)
        )

    def to_dict(self) -> dict:
        return {
            "gaussian": self.gaussian.tolist(),
            "selectors": self.selectors.tolist(),
            "uniforms": self.uniforms.tolist(),
        }
