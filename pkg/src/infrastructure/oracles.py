"""
Ground-truth posterior samplers for the benchmark problems.
Infrastructure layer - reference posteriors (closed form, MCMC and rejection ABC).
"""
import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from src.domain.errors import OracleUnavailableError
from src.domain.interfaces.oracles import GroundTruthSampler
from src.domain.interfaces.simulators import DifferentiableSimulator
from src.domain.value_objects.common import OracleKind
from src.domain.value_objects.prior import UniformBoxPrior
from src.infrastructure.simulators.slcp import slcp_log_likelihood

logger = logging.getLogger(__name__)

RHAT_LIMIT = 1.05


class TruncatedGaussianMixtureOracle(GroundTruthSampler):
    """
    Mixture of diagonal Gaussians restricted to the prior box.

    Component weights are proportional to the mass each component keeps inside
    the box. Coordinates of a diagonal Gaussian are independent, so drawing
    each coordinate from its truncated normal equals rejection against the box.
    """

    def __init__(self, means: Sequence[np.ndarray], std, prior: UniformBoxPrior):
        self.means = np.atleast_2d(np.asarray(means, dtype=float))
        self.std = np.broadcast_to(np.asarray(std, dtype=float), (self.means.shape[1],)).copy()
        if np.any(self.std <= 0):
            raise ValueError("Standard deviations must be positive")
        self.prior = prior
        self._alpha = (prior.lower - self.means) / self.std
        self._beta = (prior.upper - self.means) / self.std
        log_mass = np.sum(np.log(stats.norm.cdf(self._beta) - stats.norm.cdf(self._alpha)), axis=1)
        weights = np.exp(log_mass - log_mass.max())
        self.weights = weights / weights.sum()

    @property
    def kind(self) -> OracleKind:
        return OracleKind.CLOSED_FORM

    @property
    def parameters(self) -> dict:
        return {"means": self.means.tolist(), "std": self.std.tolist(), "weights": self.weights.tolist()}

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        component = rng.choice(self.means.shape[0], size=count, p=self.weights)
        samples = stats.truncnorm.rvs(
            self._alpha[component], self._beta[component],
            loc=self.means[component], scale=self.std, random_state=rng,
        )
        return np.clip(np.asarray(samples).reshape(count, -1), self.prior.lower, self.prior.upper)

    def moments(self) -> Tuple[np.ndarray, np.ndarray]:
        means = stats.truncnorm.mean(self._alpha, self._beta, loc=self.means, scale=self.std)
        variances = stats.truncnorm.var(self._alpha, self._beta, loc=self.means, scale=self.std)
        mixture_mean = self.weights @ means
        second = self.weights @ (variances + means ** 2)
        return mixture_mean, np.sqrt(np.maximum(second - mixture_mean ** 2, 0.0))


class TruncatedLinearGaussianOracle(GroundTruthSampler):
    """
    Posterior of y = Kθ + σz under a uniform box prior: a Gaussian with
    precision KᵀK/σ² truncated to the box.

    Sampled by Gibbs in the right singular frame of K, where the untruncated
    coordinates are independent: the coordinate along v_k is N(⟨w_k, y⟩/s_k, σ²/s_k²)
    restricted to the interval that keeps θ inside the box. Moments come from
    one cached run with a fixed seed.
    """

    def __init__(self, operator: np.ndarray, observation: np.ndarray, sigma: float, prior: UniformBoxPrior,
                 chains: int = 8, burn_in: int = 300, thin: int = 1, moment_draws: int = 4000, seed: int = 0):
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        left, values, right_t = np.linalg.svd(np.asarray(operator, dtype=float))
        if right_t.shape[0] != prior.dim:
            raise ValueError("The operator needs one column per parameter")
        size = values.size
        singular = np.zeros(prior.dim)
        singular[:size] = values
        projected = np.zeros(prior.dim)
        projected[:size] = left[:, :size].T @ np.asarray(observation, dtype=float)
        self.prior = prior
        self.sigma = float(sigma)
        self.chains = chains
        self.burn_in = burn_in
        self.thin = thin
        self.moment_draws = moment_draws
        self.seed = seed
        self._directions = right_t
        self._singular = singular
        informative = singular > singular.max() * 1e-12
        self._centers = np.where(informative, projected / np.where(informative, singular, 1.0), 0.0)
        self._scales = np.where(informative, self.sigma / np.where(informative, singular, 1.0), np.inf)
        self._moments: Optional[Tuple[np.ndarray, np.ndarray]] = None

    @property
    def kind(self) -> OracleKind:
        return OracleKind.MCMC_REFERENCE

    @property
    def parameters(self) -> dict:
        smallest = self._singular.min()
        condition = float(self._singular.max() / smallest) if smallest > 0 else float("inf")
        return {"chains": self.chains, "burn_in": self.burn_in, "thin": self.thin, "condition_number": condition}

    def _step_range(self, state: np.ndarray, direction: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Per chain, the t interval with state + t·direction inside the box; always contains 0."""
        moving = np.abs(direction) > 1e-12
        v = direction[moving]
        to_lower = (self.prior.lower[moving] - state[:, moving]) / v
        to_upper = (self.prior.upper[moving] - state[:, moving]) / v
        low = np.minimum(to_lower, to_upper).max(axis=1)
        high = np.maximum(to_lower, to_upper).min(axis=1)
        return np.minimum(low, 0.0), np.maximum(high, 0.0)

    def _sweep(self, state: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        for k, direction in enumerate(self._directions):
            low, high = self._step_range(state, direction)
            pinned = high - low <= 1e-15
            high = np.where(pinned, low + 1.0, high)
            if np.isfinite(self._scales[k]):
                offset = self._centers[k] - state @ direction
                step = stats.truncnorm.rvs(
                    (low - offset) / self._scales[k], (high - offset) / self._scales[k],
                    loc=offset, scale=self._scales[k], random_state=rng,
                )
            else:
                step = rng.uniform(low, high)
            step = np.where(pinned, 0.0, np.clip(step, low, high))
            state = state + step[:, None] * direction
        return self.prior.clip(state)

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        state = self.prior.sample(rng, self.chains)
        for _ in range(self.burn_in):
            state = self._sweep(state, rng)
        kept = []
        for _ in range(-(-count // self.chains)):
            for _ in range(self.thin):
                state = self._sweep(state, rng)
            kept.append(state)
        return np.stack(kept, axis=1).reshape(-1, self.prior.dim)[:count]

    def moments(self) -> Tuple[np.ndarray, np.ndarray]:
        if self._moments is None:
            draws = self.sample(self.moment_draws, np.random.default_rng(self.seed))
            self._moments = (draws.mean(axis=0), draws.std(axis=0))
            logger.info(f"Truncated Gaussian reference moments from {self.moment_draws} Gibbs draws")
        return self._moments[0].copy(), self._moments[1].copy()


def rejection_abc(
    sim: DifferentiableSimulator,
    observation: np.ndarray,
    draws: int,
    epsilon: float,
    rng: np.random.Generator,
    active: Optional[np.ndarray] = None,
    chunk: int = 1_000_000,
) -> np.ndarray:
    """Prior draws whose simulation lands within squared distance ε of the observation."""
    observation = np.asarray(observation, dtype=float)
    active = np.ones(sim.output_dim, dtype=bool) if active is None else np.asarray(active, dtype=bool)
    accepted: List[np.ndarray] = []
    for start in range(0, draws, chunk):
        size = min(chunk, draws - start)
        thetas = sim.prior.sample(rng, size)
        outputs = sim.simulate_batch(thetas, sim.sample_noise(rng, size))
        residual = (outputs - observation)[:, active]
        accepted.append(thetas[np.einsum("bk,bk->b", residual, residual) <= epsilon])
    return np.concatenate(accepted) if accepted else np.empty((0, sim.param_dim))


class AbcReferenceOracle(GroundTruthSampler):
    """
    Rejection ABC that keeps the ``count`` prior draws closest to the observation
    among ``draws`` simulations; the effective ε is the largest kept distance.
    """

    def __init__(self, sim: DifferentiableSimulator, observation: np.ndarray, draws: int = 10_000_000,
                 chunk: int = 1_000_000):
        self.sim = sim
        self.observation = np.asarray(observation, dtype=float)
        self.draws = draws
        self.chunk = chunk
        self.last_epsilon: Optional[float] = None

    @property
    def kind(self) -> OracleKind:
        return OracleKind.ABC_REFERENCE

    @property
    def parameters(self) -> dict:
        return {"draws": self.draws, "epsilon": self.last_epsilon}

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        if count > self.draws:
            raise ValueError("count cannot exceed the number of ABC draws")
        kept_theta = np.empty((0, self.sim.param_dim))
        kept_distance = np.empty(0)
        for start in range(0, self.draws, self.chunk):
            size = min(self.chunk, self.draws - start)
            thetas = self.sim.prior.sample(rng, size)
            outputs = self.sim.simulate_batch(thetas, self.sim.sample_noise(rng, size))
            residual = outputs - self.observation
            distances = np.einsum("bk,bk->b", residual, residual)
            kept_theta = np.concatenate([kept_theta, thetas])
            kept_distance = np.concatenate([kept_distance, distances])
            if kept_distance.size > count:
                order = np.argpartition(kept_distance, count - 1)[:count]
                kept_theta, kept_distance = kept_theta[order], kept_distance[order]
        order = np.argsort(kept_distance, kind="stable")
        self.last_epsilon = float(kept_distance[order[-1]])
        logger.info(f"ABC reference kept {count} of {self.draws} draws at epsilon {self.last_epsilon:.3g}")
        return kept_theta[order]


def gelman_rubin(chains: np.ndarray) -> np.ndarray:
    """Gelman-Rubin statistic per coordinate for (chains, draws, D) arrays."""
    length = chains.shape[1]
    chain_means = chains.mean(axis=1)
    within = chains.var(axis=1, ddof=1).mean(axis=0)
    between = length * chain_means.var(axis=0, ddof=1)
    pooled = (length - 1) / length * within + between / length
    return np.sqrt(pooled / np.maximum(within, 1e-300))


class McmcReferenceOracle(GroundTruthSampler):
    """
    Random-walk Metropolis over a tractable log-likelihood under a uniform box prior.

    Chains start at the best of many prior draws, adapt a per-chain Gaussian
    proposal during burn-in (step scale from the acceptance rate, then the
    chain's own covariance scaled by 2.38²/D) and are thinned afterwards.
    Runs whose R-hat reaches 1.05 are repeated with a longer burn-in.
    ``symmetry`` optionally maps retained draws through a random exact symmetry
    of the likelihood.
    """

    def __init__(
        self,
        log_likelihood: Callable[[np.ndarray], np.ndarray],
        prior: UniformBoxPrior,
        chains: int = 8,
        burn_in: int = 4000,
        thin: int = 20,
        init_candidates: int = 100_000,
        symmetry: Optional[Callable[[np.ndarray, np.random.Generator], np.ndarray]] = None,
        fold: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        max_attempts: int = 3,
    ):
        self.log_likelihood = log_likelihood
        self.prior = prior
        self.chains = chains
        self.burn_in = burn_in
        self.thin = thin
        self.init_candidates = init_candidates
        self.symmetry = symmetry
        self.fold = fold
        self.max_attempts = max(1, max_attempts)
        self.last_rhat: Optional[List[float]] = None

    @property
    def kind(self) -> OracleKind:
        return OracleKind.MCMC_REFERENCE

    @property
    def parameters(self) -> dict:
        return {"chains": self.chains, "burn_in": self.burn_in, "thin": self.thin, "rhat": self.last_rhat}

    def _log_target(self, theta: np.ndarray) -> np.ndarray:
        inside = self.prior.contains(theta)
        values = np.full(theta.shape[0], -np.inf)
        if inside.any():
            values[inside] = self.log_likelihood(theta[inside])
        return values

    def _metropolis(self, state, log_p, chol, scale, steps, rng, record_every=0):
        accepted = np.zeros(state.shape[0])
        kept = []
        for step in range(1, steps + 1):
            proposal = state + scale[:, None] * np.einsum("cij,cj->ci", chol, rng.standard_normal(state.shape))
            log_q = self._log_target(proposal)
            accept = np.log(rng.random(state.shape[0])) < log_q - log_p
            state = np.where(accept[:, None], proposal, state)
            log_p = np.where(accept, log_q, log_p)
            accepted += accept
            if record_every and step % record_every == 0:
                kept.append(state.copy())
        return state, log_p, accepted / steps, kept

    def _run(self, count: int, burn_in: int, rng: np.random.Generator) -> Tuple[np.ndarray, List[float]]:
        """(chains, draws, D) retained draws and their R-hat after ``burn_in`` adaptive steps."""
        dim = self.prior.dim
        candidates = self.prior.sample(rng, self.init_candidates)
        log_p = self._log_target(candidates)
        state = candidates[np.argsort(-log_p, kind="stable")[:self.chains]]
        log_p = self._log_target(state)

        chol = np.broadcast_to(np.eye(dim) * 0.1, (self.chains, dim, dim)).copy()
        scale = np.ones(self.chains)
        window = 100
        history = []
        for _ in range(burn_in // window):
            state, log_p, rate, kept = self._metropolis(state, log_p, chol, scale, window, rng, record_every=1)
            scale *= np.exp(rate - 0.234)
            history.extend(kept)
            if len(history) >= burn_in // 2 and len(history) % (5 * window) == 0:
                recent = np.stack(history[len(history) // 2:], axis=1)
                for c in range(self.chains):
                    covariance = np.cov(recent[c].T) * (2.38 ** 2 / dim) + 1e-10 * np.eye(dim)
                    chol[c] = np.linalg.cholesky(covariance)
                scale[:] = 1.0

        per_chain = -(-count // self.chains)
        state, log_p, rate, kept = self._metropolis(
            state, log_p, chol, scale, per_chain * self.thin, rng, record_every=self.thin
        )
        draws = np.stack(kept, axis=1)
        folded = self.fold(draws) if self.fold is not None else draws
        return draws, gelman_rubin(folded).tolist()

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """
        Thinned draws from chains whose R-hat is below 1.05.

        Burn-in doubles on every unconverged attempt; after ``max_attempts``
        the reference is reported as unavailable.
        """
        burn_in = self.burn_in
        for attempt in range(1, self.max_attempts + 1):
            draws, self.last_rhat = self._run(count, burn_in, rng)
            worst = max(self.last_rhat)
            if worst < RHAT_LIMIT:
                break
            logger.warning(f"MCMC reference R-hat {worst:.3f} after burn-in {burn_in} (attempt {attempt})")
            burn_in *= 2
        else:
            raise OracleUnavailableError(
                f"MCMC reference did not converge: R-hat {max(self.last_rhat):.3f} after {self.max_attempts} attempts"
            )
        samples = np.transpose(draws, (1, 0, 2)).reshape(-1, self.prior.dim)[:count]
        if self.symmetry is not None:
            samples = self.symmetry(samples, rng)
        return samples


def flip_slcp_scale_signs(samples: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Independent random signs for θ3 and θ4, which enter the likelihood only squared."""
    flipped = samples.copy()
    flipped[:, 2:4] *= rng.choice(np.array([-1.0, 1.0]), size=(samples.shape[0], 2))
    return flipped


def fold_slcp_scale_signs(draws: np.ndarray) -> np.ndarray:
    folded = draws.copy()
    folded[..., 2:4] = np.abs(folded[..., 2:4])
    return folded


def slcp_reference_oracle(observed_pairs: np.ndarray, prior: UniformBoxPrior, **kwargs) -> McmcReferenceOracle:
    pairs = np.asarray(observed_pairs, dtype=float).reshape(-1, 2)
    return McmcReferenceOracle(
        log_likelihood=lambda theta: slcp_log_likelihood(theta, pairs),
        prior=prior,
        symmetry=flip_slcp_scale_signs,
        fold=fold_slcp_scale_signs,
        **kwargs,
    )
