"""
Entities produced along the inference pipeline: mask, optimization records,
hyperboxes, the proposal mixture and weighted samples.
Domain layer - entities carry their own invariants.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from src.domain.entities.noise import NoiseDraw
from src.domain.errors import NoInformativeDimensionsError

# Relative slack used by closed-box membership tests.
BOX_TOLERANCE = 1e-12


def _readonly(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Mask:
    """Which output dimensions carry information about θ."""
    active: np.ndarray
    threshold: float
    estimates: np.ndarray

    def __post_init__(self):
        active = _readonly(self.active, bool)
        estimates = _readonly(self.estimates, float)
        if active.shape != estimates.shape or active.ndim != 1:
            raise ValueError("Mask active flags and estimates must be 1-D of equal length")
        if np.any(estimates < 0):
            raise ValueError("Gradient-norm estimates must be non-negative")
        if not np.array_equal(active, estimates > self.threshold):
            raise ValueError("Mask active flags must equal estimates > threshold")
        object.__setattr__(self, "active", active)
        object.__setattr__(self, "estimates", estimates)

    @classmethod
    def from_estimates(cls, estimates, threshold: float) -> "Mask":
        estimates = np.asarray(estimates, dtype=float)
        return cls(active=estimates > threshold, threshold=threshold, estimates=estimates)

    @classmethod
    def full(cls, output_dim: int) -> "Mask":
        """Every dimension active; used when no sensitivity analysis is wanted."""
        return cls.from_estimates(np.ones(output_dim), 0.0)

    @property
    def output_dim(self) -> int:
        return int(self.active.shape[0])

    @property
    def active_count(self) -> int:
        return int(self.active.sum())

    def require_active(self) -> None:
        if not self.active.any():
            raise NoInformativeDimensionsError(
                "Sensitivity mask deactivated every output dimension; nothing to infer from"
            )

    def summary(self) -> dict:
        return {
            "active": self.active.tolist(),
            "estimates": self.estimates.tolist(),
            "threshold": self.threshold,
            "active_count": self.active_count,
        }


@dataclass(frozen=True, eq=False)
class OptimizationRecord:
    """Outcome of one (observation n, seed i) deterministic minimization."""
    obs_index: int
    seed_index: int
    theta_star: np.ndarray
    d_star: float
    noise: NoiseDraw
    theta0: Optional[np.ndarray] = None
    accepted: bool = False
    failed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "theta_star", _readonly(self.theta_star))
        if self.theta0 is not None:
            object.__setattr__(self, "theta0", _readonly(self.theta0))
        if self.d_star < 0:
            raise ValueError("d_star must be non-negative")
        if self.noise.is_batch:
            raise ValueError("An optimization record holds a single noise draw")

    @property
    def key(self) -> Tuple[int, int]:
        return self.obs_index, self.seed_index

    def to_row(self) -> dict:
        row = {
            "n": self.obs_index,
            "i": self.seed_index,
            "d_star": self.d_star,
            "accepted": int(self.accepted),
            "failed": int(self.failed),
        }
        for j, value in enumerate(self.theta_star):
            row[f"theta_star_{j}"] = float(value)
        return row


@dataclass(frozen=True, eq=False)
class EigenAxes:
    """Orthonormal frame from the eigendecomposition of JᵀJ, descending eigenvalues."""
    axes: np.ndarray
    eigenvalues: np.ndarray
    fallback: bool = False

    def __post_init__(self):
        object.__setattr__(self, "axes", _readonly(self.axes))
        object.__setattr__(self, "eigenvalues", _readonly(self.eigenvalues))

    @property
    def is_identity(self) -> bool:
        return bool(np.array_equal(self.axes, np.eye(self.axes.shape[0])))


@dataclass(frozen=True, eq=False)
class Hyperbox:
    """
    Oriented box with center θ*, axis frame V (columns) and asymmetric extents.

    ``lower`` holds h⁻ and ``upper`` holds h⁺; the box is the set of θ with
    -h⁻ <= Vᵀ(θ - θ*) <= h⁺ componentwise.
    """
    center: np.ndarray
    axes: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    fallback: bool = False

    def __post_init__(self):
        center = _readonly(self.center)
        axes = _readonly(self.axes)
        lower = _readonly(self.lower)
        upper = _readonly(self.upper)
        dim = center.shape[0]
        if axes.shape != (dim, dim) or lower.shape != (dim,) or upper.shape != (dim,):
            raise ValueError("Hyperbox arrays must agree on the parameter dimension")
        if np.max(np.abs(axes.T @ axes - np.eye(dim))) > 1e-8:
            raise ValueError("Hyperbox axes must be orthonormal")
        if np.any(lower < 0) or np.any(upper < 0) or np.any(lower + upper <= 0):
            raise ValueError("Hyperbox extents must be non-negative with positive side lengths")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return int(self.center.shape[0])

    @property
    def side_lengths(self) -> np.ndarray:
        return self.lower + self.upper

    @property
    def log_volume(self) -> float:
        return float(np.sum(np.log(self.side_lengths)))

    @property
    def volume(self) -> float:
        return float(np.prod(self.side_lengths))

    def local_coordinates(self, theta) -> np.ndarray:
        """Coordinates Vᵀ(θ - θ*) for one point or a batch of rows."""
        return (np.asarray(theta, dtype=float) - self.center) @ self.axes

    def to_dict(self) -> dict:
        return {
            "center": self.center.tolist(),
            "axes": self.axes.tolist(),
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "volume": self.volume,
            "fallback": self.fallback,
        }


@dataclass(frozen=True)
class MixtureComponent:
    box: Hyperbox
    obs_index: int
    seed_index: int


@dataclass(frozen=True, eq=False)
class ProposalMixture:
    """Equal-weight mixture of uniform distributions over accepted hyperboxes."""
    components: Tuple[MixtureComponent, ...]

    def __post_init__(self):
        if len(self.components) == 0:
            raise ValueError("A proposal mixture needs at least one component")
        object.__setattr__(self, "components", tuple(self.components))
        dims = {component.box.dim for component in self.components}
        if len(dims) != 1:
            raise ValueError("All mixture components must share the parameter dimension")

    @property
    def size(self) -> int:
        return len(self.components)

    @property
    def component_weight(self) -> float:
        return 1.0 / self.size

    @property
    def dim(self) -> int:
        return self.components[0].box.dim

    @property
    def boxes(self) -> List[Hyperbox]:
        return [component.box for component in self.components]


@dataclass(frozen=True)
class WeightedSample:
    """One proposal draw with its densities, region counts and weight."""
    theta: np.ndarray
    proposal_density: float
    prior_density: float
    region_counts: np.ndarray
    weight: float


@dataclass(frozen=True, eq=False)
class WeightedSamples:
    """
    Column storage for a batch of weighted samples.

    Weights are kept in log space so that proposal densities of tiny boxes in
    high dimension do not overflow; ``weights`` exponentiates them.
    """
    thetas: np.ndarray
    log_proposal: np.ndarray
    log_prior: np.ndarray
    counts: np.ndarray
    log_weights: np.ndarray = field(default=None)

    def __post_init__(self):
        thetas = _readonly(np.atleast_2d(self.thetas))
        counts = _readonly(np.atleast_2d(self.counts), np.int64)
        log_proposal = _readonly(self.log_proposal)
        log_prior = _readonly(self.log_prior)
        size = thetas.shape[0]
        if counts.shape[0] != size or log_proposal.shape != (size,) or log_prior.shape != (size,):
            raise ValueError("Weighted sample columns must have one entry per sample")
        if self.log_weights is None:
            with np.errstate(divide="ignore"):
                log_counts = np.log(counts.astype(float)).sum(axis=1)
            log_weights = log_prior - log_proposal + log_counts
            log_weights = np.where(np.isnan(log_weights), -np.inf, log_weights)
        else:
            log_weights = np.asarray(self.log_weights, dtype=float)
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "log_proposal", log_proposal)
        object.__setattr__(self, "log_prior", log_prior)
        object.__setattr__(self, "log_weights", _readonly(log_weights))

    def __len__(self) -> int:
        return int(self.thetas.shape[0])

    def __getitem__(self, index: int) -> WeightedSample:
        return WeightedSample(
            theta=self.thetas[index],
            proposal_density=float(np.exp(self.log_proposal[index])),
            prior_density=float(np.exp(self.log_prior[index])),
            region_counts=self.counts[index],
            weight=float(self.weights[index]),
        )

    @classmethod
    def from_weights(cls, thetas, weights) -> "WeightedSamples":
        """Build a set directly from raw weights (unit densities, unit counts)."""
        thetas = np.asarray(thetas, dtype=float)
        if thetas.ndim == 1:
            thetas = thetas.reshape(-1, 1)
        weights = np.asarray(weights, dtype=float)
        size = weights.shape[0]
        with np.errstate(divide="ignore"):
            log_weights = np.log(weights)
        return cls(
            thetas=thetas,
            log_proposal=np.zeros(size),
            log_prior=np.zeros(size),
            counts=np.ones((size, 1), dtype=np.int64),
            log_weights=log_weights,
        )

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    @property
    def positive(self) -> np.ndarray:
        return np.isfinite(self.log_weights)

    def normalized_weights(self) -> Optional[np.ndarray]:
        """Weights divided by their sum, or None when every weight is zero."""
        if not self.positive.any():
            return None
        shifted = np.exp(self.log_weights - np.max(self.log_weights))
        return shifted / shifted.sum()

    def to_rows(self) -> List[dict]:
        rows = []
        for p in range(len(self)):
            row = {f"theta_{j}": float(v) for j, v in enumerate(self.thetas[p])}
            row["q"] = float(np.exp(self.log_proposal[p]))
            row["p"] = float(np.exp(self.log_prior[p]))
            for n, count in enumerate(self.counts[p]):
                row[f"count_{n}"] = int(count)
            row["log_w"] = float(self.log_weights[p])
            row["w"] = float(np.exp(self.log_weights[p]))
            rows.append(row)
        return rows
