"""
Hyperbox construction around optimization end points and uniform primitives over boxes.
Application layer - region stage of the pipeline.
"""
import logging
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from src.application.services.simulation_service import DistanceFunction
from src.domain.entities.experiment import BudgetLedger
from src.domain.entities.inference import BOX_TOLERANCE, EigenAxes, Hyperbox, Mask, OptimizationRecord
from src.domain.entities.noise import NoiseDraw
from src.domain.interfaces.simulators import DifferentiableSimulator
from src.domain.value_objects.common import AxesMode, LineSearchParams
from src.domain.value_objects.prior import UniformBoxPrior

logger = logging.getLogger(__name__)

JACOBI_TOLERANCE = 1e-10
JACOBI_MAX_SWEEPS = 100

# A grid point counts as inside when d <= ε·(1 + slack).
EXIT_SLACK = 1e-9

_CHUNK_ENTRIES = 4_000_000

DistanceBatchFn = Callable[..., np.ndarray]


def jacobi_eigh(matrix: np.ndarray, tol: float = JACOBI_TOLERANCE,
                max_sweeps: int = JACOBI_MAX_SWEEPS) -> tuple:
    """
    Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Returns (eigenvalues, eigenvectors as columns, converged).
    """
    a = np.array(matrix, dtype=float, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0

    def off_diagonal() -> float:
        if n < 2:
            return 0.0
        return float(np.max(np.abs(a - np.diag(np.diag(a)))))

    for _ in range(max_sweeps):
        if off_diagonal() < tol * scale:
            return np.diag(a).copy(), v, True
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q

                vec_p = v[:, p].copy()
                vec_q = v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
    return np.diag(a).copy(), v, off_diagonal() < tol * scale


def _canonical_order(eigenvalues: np.ndarray, vectors: np.ndarray) -> tuple:
    order = np.argsort(-eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    vectors = vectors[:, order].copy()
    for d in range(vectors.shape[1]):
        nonzero = np.flatnonzero(np.abs(vectors[:, d]) > 1e-12)
        if nonzero.size and vectors[nonzero[0], d] < 0:
            vectors[:, d] = -vectors[:, d]
    return eigenvalues, vectors


def eigen_axes(jac: np.ndarray, jacobi_max_dim: int = 64) -> EigenAxes:
    """
    Eigenvectors of JᵀJ ordered by descending eigenvalue.

    First nonzero component of every axis is positive. A zero or non-finite
    Jacobian, or a Jacobi run that does not converge, gives identity axes with
    the fallback flag set.
    """
    jac = np.asarray(jac, dtype=float)
    dim = jac.shape[1]
    identity = EigenAxes(axes=np.eye(dim), eigenvalues=np.zeros(dim), fallback=True)
    if not np.all(np.isfinite(jac)):
        logger.warning("Non-finite Jacobian; using identity axes")
        return identity
    gram = jac.T @ jac
    if not np.any(gram):
        return identity

    if dim <= jacobi_max_dim:
        eigenvalues, vectors, converged = jacobi_eigh(gram)
        if not converged:
            logger.warning("Jacobi eigensolver did not converge; using identity axes")
            return identity
    else:
        eigenvalues, vectors = np.linalg.eigh(gram)
    eigenvalues, vectors = _canonical_order(eigenvalues, vectors)
    return EigenAxes(axes=vectors, eigenvalues=eigenvalues, fallback=False)


def line_search_extents(
    d_fn: DistanceBatchFn,
    starts: np.ndarray,
    directions: np.ndarray,
    params: LineSearchParams,
    epsilon,
) -> np.ndarray:
    """
    Vectorized directional line search, one row per (start, direction) pair.

    Each refinement walks in steps of η until d > ε or L steps were taken,
    steps back once and halves η. ``d_fn(theta, rows)`` evaluates the
    distance of the listed rows. Extents below the floor η·2^-R are raised
    to the floor.
    """
    starts = np.asarray(starts, dtype=float)
    directions = np.asarray(directions, dtype=float)
    rows_total = starts.shape[0]
    threshold = np.broadcast_to(np.asarray(epsilon, dtype=float), (rows_total,)) * (1.0 + EXIT_SLACK)
    theta = starts.copy()
    step = params.step

    for _ in range(params.refinements):
        active = np.arange(rows_total)
        taken = 0
        while active.size:
            taken += 1
            theta[active] += step * directions[active]
            d = d_fn(theta[active], active)
            stop = (d > threshold[active]) | (taken >= params.max_steps)
            active = active[~stop]
        theta -= step * directions
        step /= 2.0

    extents = np.linalg.norm(theta - starts, axis=1)
    return np.maximum(extents, params.extent_floor)


def directional_endpoint(d_fn: DistanceBatchFn, theta_star, direction, params: LineSearchParams,
                         epsilon: float) -> float:
    """Extent of the line search from θ* along one unit direction."""
    theta_star = np.asarray(theta_star, dtype=float)
    direction = np.asarray(direction, dtype=float)
    return float(line_search_extents(
        lambda theta, rows: np.asarray(d_fn(theta), dtype=float),
        theta_star[None, :], direction[None, :], params, epsilon,
    )[0])


def _clip_extents(center: np.ndarray, axes: np.ndarray, lower: np.ndarray, upper: np.ndarray,
                  prior: UniformBoxPrior, floor: float) -> tuple:
    """
    Slide a box back inside the prior when its axes are a signed permutation
    of the standard basis.

    Side lengths are kept when they fit between the prior bounds; otherwise
    the box spans the prior along that axis. Other frames are left unchanged.
    The floor applies to each side length, not to each extent: a center on
    the prior boundary gets a zero extent towards it and the box stays
    inside the prior.
    """
    magnitude = np.abs(axes)
    if not (np.allclose(magnitude.sum(axis=0), 1.0) and np.all((magnitude < 1e-12) | (magnitude > 1 - 1e-12))):
        return lower, upper
    coordinate = np.argmax(magnitude, axis=0)
    sign = np.sign(axes[coordinate, np.arange(axes.shape[1])])
    room_up = np.where(sign > 0, prior.upper[coordinate] - center[coordinate], center[coordinate] - prior.lower[coordinate])
    room_down = np.where(sign > 0, center[coordinate] - prior.lower[coordinate], prior.upper[coordinate] - center[coordinate])
    room_up = np.maximum(room_up, 0.0)
    room_down = np.maximum(room_down, 0.0)

    side = np.minimum(lower + upper, room_up + room_down)
    new_upper = np.minimum(upper, room_up)
    new_lower = np.minimum(lower, room_down)
    deficit = side - new_upper - new_lower
    grow_up = np.minimum(deficit, room_up - new_upper)
    new_upper = new_upper + grow_up
    new_lower = new_lower + np.minimum(deficit - grow_up, room_down - new_lower)

    short = new_lower + new_upper < floor
    if short.any():
        new_upper = np.where(short, np.maximum(new_upper, floor - new_lower), new_upper)
    return new_lower, new_upper


def build_hyperbox(d_fn: DistanceBatchFn, theta_star, jac, params: LineSearchParams, epsilon: float,
                   prior: Optional[UniformBoxPrior] = None) -> Hyperbox:
    """
    Oriented box around θ* from line searches along ±v_d for every eigen axis.

    ``d_fn`` maps a (B, D) batch to B distances.
    """
    theta_star = np.asarray(theta_star, dtype=float)
    dim = theta_star.shape[0]
    frame = _axes_for(jac, params, dim)
    directions = np.concatenate([frame.axes.T, -frame.axes.T])
    starts = np.tile(theta_star, (2 * dim, 1))
    extents = line_search_extents(
        lambda theta, rows: np.asarray(d_fn(theta), dtype=float), starts, directions, params, epsilon
    )
    upper, lower = extents[:dim], extents[dim:]
    if params.clip_to_prior and prior is not None:
        lower, upper = _clip_extents(theta_star, frame.axes, lower, upper, prior, params.extent_floor)
    return Hyperbox(center=theta_star, axes=frame.axes, lower=lower, upper=upper, fallback=frame.fallback)


def _axes_for(jac, params: LineSearchParams, dim: int) -> EigenAxes:
    if params.axes == AxesMode.IDENTITY:
        return EigenAxes(axes=np.eye(dim), eigenvalues=np.zeros(dim), fallback=False)
    return eigen_axes(jac, params.jacobi_max_dim)


class EigenAxesCache:
    """Reuses eigendecompositions for bitwise-identical masked Jacobians."""

    def __init__(self, params: LineSearchParams):
        self.params = params
        self._cache: Dict[bytes, EigenAxes] = {}
        self.hits = 0

    def axes_for(self, jac: np.ndarray) -> EigenAxes:
        jac = np.ascontiguousarray(jac, dtype=float)
        key = jac.tobytes() + str(jac.shape).encode()
        cached = self._cache.get(key)
        if cached is not None:
            self.hits += 1
            return cached
        frame = _axes_for(jac, self.params, jac.shape[1])
        self._cache[key] = frame
        return frame


def build_hyperboxes(
    sim: DifferentiableSimulator,
    records: Sequence[OptimizationRecord],
    observations: Sequence,
    mask: Mask,
    params: LineSearchParams,
    epsilon: float,
    ledger: Optional[BudgetLedger] = None,
) -> List[Hyperbox]:
    """
    Boxes for a list of records, with the line searches of a whole chunk of
    records run as one vectorized walk.

    The Jacobian used for the axes is restricted to the active output rows.
    """
    if not records:
        return []
    dim = sim.param_dim
    cache = EigenAxesCache(params)
    rows_per_record = 2 * dim
    chunk = max(1, _CHUNK_ENTRIES // max(1, rows_per_record * max(sim.output_dim, dim)))
    boxes: List[Hyperbox] = []

    for start in range(0, len(records), chunk):
        group = list(records[start:start + chunk])
        centers = np.stack([r.theta_star for r in group])
        noise = NoiseDraw.stack([r.noise for r in group])
        jacobians = sim.jacobian_batch(centers, noise)[:, mask.active, :] if params.axes == AxesMode.EIGEN else None
        frames = [
            cache.axes_for(jacobians[k]) if jacobians is not None else cache.axes_for(np.zeros((1, dim)))
            for k in range(len(group))
        ]

        directions = np.concatenate([np.concatenate([f.axes.T, -f.axes.T]) for f in frames])
        record_of_row = np.repeat(np.arange(len(group)), rows_per_record)
        starts = centers[record_of_row]
        row_observations = np.stack([np.asarray(observations[r.obs_index], dtype=float) for r in group])[record_of_row]
        distance = DistanceFunction(sim, noise.take(record_of_row), row_observations, mask, ledger)

        extents = line_search_extents(distance, starts, directions, params, epsilon).reshape(len(group), 2, dim)
        for k, record in enumerate(group):
            upper, lower = extents[k, 0], extents[k, 1]
            if params.clip_to_prior:
                lower, upper = _clip_extents(record.theta_star, frames[k].axes, lower, upper, sim.prior,
                                             params.extent_floor)
            boxes.append(Hyperbox(
                center=record.theta_star, axes=frames[k].axes, lower=lower, upper=upper,
                fallback=frames[k].fallback,
            ))

    fallbacks = sum(1 for b in boxes if b.fallback)
    if fallbacks:
        logger.warning(f"{fallbacks} of {len(boxes)} boxes use identity axes after an eigensolver fallback")
    logger.info(f"Built {len(boxes)} hyperboxes ({cache.hits} eigen cache hits)")
    return boxes


def box_contains(box: Hyperbox, theta) -> np.ndarray:
    """Closed-box membership for one point (bool) or a batch of rows (bool array)."""
    local = box.local_coordinates(theta)
    slack = BOX_TOLERANCE * (1.0 + np.abs(local))
    inside = np.all((local >= -box.lower - slack) & (local <= box.upper + slack), axis=-1)
    return inside if np.ndim(inside) else bool(inside)


def box_density(box: Hyperbox, theta):
    """1/volume inside the box, 0 outside."""
    inside = box_contains(box, theta)
    return np.where(inside, np.exp(-box.log_volume), 0.0) if np.ndim(inside) else (
        float(np.exp(-box.log_volume)) if inside else 0.0
    )


def sample_box(box: Hyperbox, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """Uniform draw(s) in the box's axis frame mapped back through V."""
    count = 1 if size is None else size
    local = rng.uniform(-box.lower, box.upper, size=(count, box.dim))
    thetas = box.center + local @ box.axes.T
    return thetas[0] if size is None else thetas
