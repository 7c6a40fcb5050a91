"""
Benchmark problem registry.
Infrastructure layer - problem factories addressable by string id.

Each factory builds the simulator, its observations and its reference
posterior. Observations that are simulated come from the OBSERVATION stream
of the oracle seed, so a (problem, D, oracle seed) triple always names the
same data and the same cached reference samples.
"""
import logging
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from src.domain.entities.experiment import BenchmarkProblem, ExperimentConfig
from src.domain.errors import ConfigurationError
from src.domain.value_objects.common import (
    AxesMode,
    EpsilonRule,
    IndicatorMode,
    LineSearchParams,
    OptimizerConfig,
    SamplingConfig,
)
from src.domain.value_objects.streams import StreamPurpose, stream
from src.infrastructure.image_io import load_clean_image
from src.infrastructure.oracles import (
    AbcReferenceOracle,
    TruncatedGaussianMixtureOracle,
    TruncatedLinearGaussianOracle,
    slcp_reference_oracle,
)
from src.infrastructure.simulators.images import (
    IMAGE_NOISE_STD,
    IMAGE_SIDE,
    PIXEL_GAIN,
    PIXEL_OFFSET,
    CheckerboardCamera,
    PixelwiseCamera,
)
from src.infrastructure.simulators.mog import DISTRACTOR_COUNT, MOG_MU, MOG_SIGMA, GaussianLocationSimulator
from src.infrastructure.simulators.slcp import SLCP_DISTRACTORS_PER_DRAW, SLCP_DRAWS, SlcpSimulator
from src.infrastructure.simulators.two_moons import TwoMoonsSimulator

logger = logging.getLogger(__name__)

SLCP_TRUE_THETA = np.array([0.7, -2.9, -1.0, -0.9, 0.6])
DEFAULT_MOG_DIM = 2

# Equal-volume boxes of half-width sqrt(ε) widen each posterior coordinate by ε/3 in variance.
_MOG_RECOMMENDED = {
    "pcg_to_keep": 1.0,
    "optimizer": OptimizerConfig(learning_rate=0.1, steps=200),
    "epsilon_rule": EpsilonRule.fixed(0.01),
    "sampling": SamplingConfig(candidate_count=10000, final_count=1000, indicator=IndicatorMode.HYPERBOX),
}

_IMAGE_RECOMMENDED = {
    "seeds": 100,
    "pcg_to_keep": 1.0,
    "optimizer": OptimizerConfig(learning_rate=0.05, steps=300, project_to_prior=True),
    "epsilon_rule": EpsilonRule.fixed(1e-3),
    "line_search": LineSearchParams(step=0.1, clip_to_prior=True, axes=AxesMode.IDENTITY),
    "sampling": SamplingConfig(candidate_count=2000, final_count=1000, indicator=IndicatorMode.HYPERBOX),
    "use_mask": False,
}


def _observation_rng(oracle_seed: int, index: int) -> np.random.Generator:
    return stream(oracle_seed, StreamPurpose.OBSERVATION, index)


def _mog_problem(problem_id: str, dim: Optional[int], two_modes: bool, distractors: int,
                 oracle_seed: int, **options) -> BenchmarkProblem:
    dim = DEFAULT_MOG_DIM if dim is None else dim
    if dim < 1:
        raise ConfigurationError("MoG problems need D >= 1")
    sim = GaussianLocationSimulator(dim, two_modes=two_modes, distractors=distractors)
    means = [np.full(dim, -MOG_MU)] + ([np.full(dim, MOG_MU)] if two_modes else [])
    oracle = TruncatedGaussianMixtureOracle(means, MOG_SIGMA, sim.prior)
    return BenchmarkProblem(
        problem_id=problem_id,
        simulator=sim,
        observations=(np.zeros(sim.output_dim),),
        ground_truth=oracle,
        recommended=dict(_MOG_RECOMMENDED),
        options={"distractors": distractors, "two_modes": two_modes},
    )


def make_mog_base(dim: Optional[int] = None, oracle_seed: int = 0, **options) -> BenchmarkProblem:
    return _mog_problem("mog_base", dim, False, 0, oracle_seed, **options)


def make_mog_base_distractors(dim: Optional[int] = None, oracle_seed: int = 0, **options) -> BenchmarkProblem:
    return _mog_problem("mog_base_dist", dim, False, DISTRACTOR_COUNT, oracle_seed, **options)


def make_mog_two(dim: Optional[int] = None, oracle_seed: int = 0, **options) -> BenchmarkProblem:
    return _mog_problem("mog_two", dim, True, 0, oracle_seed, **options)


def make_mog_two_distractors(dim: Optional[int] = None, oracle_seed: int = 0, **options) -> BenchmarkProblem:
    return _mog_problem("mog_two_dist", dim, True, DISTRACTOR_COUNT, oracle_seed, **options)


def _slcp_problem(problem_id: str, distractors_per_draw: int, oracle_seed: int,
                  layout: str = "iid", draws: int = SLCP_DRAWS, true_theta=None,
                  mcmc: Optional[Dict[str, Any]] = None, **options) -> BenchmarkProblem:
    theta = SLCP_TRUE_THETA if true_theta is None else np.asarray(true_theta, dtype=float)
    if layout == "iid":
        sim = SlcpSimulator(draws=1, distractors_per_draw=distractors_per_draw)
        observations = tuple(
            sim.simulate(theta, sim.sample_noise(_observation_rng(oracle_seed, k), 1).row(0))
            for k in range(draws)
        )
        pairs = np.stack([y[:2] for y in observations])
    elif layout == "joint":
        sim = SlcpSimulator(draws=draws, distractors_per_draw=distractors_per_draw)
        y = sim.simulate(theta, sim.sample_noise(_observation_rng(oracle_seed, 0), 1).row(0))
        observations = (y,)
        pairs = y.reshape(draws, sim.block)[:, :2]
    else:
        raise ConfigurationError(f"Unknown SLCP layout '{layout}' (expected 'iid' or 'joint')")
    oracle = slcp_reference_oracle(pairs, sim.prior, **(mcmc or {}))
    recommended = {
        "pcg_to_keep": 0.8,
        "optimizer": OptimizerConfig(learning_rate=0.05, steps=200),
        "epsilon_rule": EpsilonRule.fixed(0.5),
        "line_search": LineSearchParams(step=0.05),
        "sampling": SamplingConfig(candidate_count=10000, final_count=1000),
    }
    return BenchmarkProblem(
        problem_id=problem_id,
        simulator=sim,
        observations=observations,
        ground_truth=oracle,
        true_theta=theta,
        recommended=recommended,
        options={"layout": layout, "draws": draws, "distractors_per_draw": distractors_per_draw},
    )


def make_slcp(dim: Optional[int] = None, oracle_seed: int = 0, **options) -> BenchmarkProblem:
    return _slcp_problem("slcp", 0, oracle_seed, **options)


def make_slcp_distractors(dim: Optional[int] = None, oracle_seed: int = 0, **options) -> BenchmarkProblem:
    return _slcp_problem("slcp_dist", SLCP_DISTRACTORS_PER_DRAW, oracle_seed, **options)


def make_two_moons(dim: Optional[int] = None, oracle_seed: int = 0, observation=None,
                   abc_draws: int = 10_000_000, **options) -> BenchmarkProblem:
    """Two moons observed at the origin unless ``observation`` is given."""
    sim = TwoMoonsSimulator()
    y_obs = np.zeros(2) if observation is None else np.asarray(observation, dtype=float)
    recommended = {
        "pcg_to_keep": 1.0,
        "optimizer": OptimizerConfig(learning_rate=0.05, steps=200),
        "epsilon_rule": EpsilonRule.fixed(1e-4),
        "line_search": LineSearchParams(step=0.005),
        "sampling": SamplingConfig(candidate_count=10000, final_count=1000),
    }
    return BenchmarkProblem(
        problem_id="two_moons",
        simulator=sim,
        observations=(y_obs,),
        ground_truth=AbcReferenceOracle(sim, y_obs, draws=abc_draws),
        recommended=recommended,
        options={"abc_draws": abc_draws},
    )


def _clean_image(side: int, mnist_path, mnist_index: int) -> np.ndarray:
    return load_clean_image(side, mnist_path, mnist_index).reshape(-1)


def make_image_pixelwise(dim: Optional[int] = None, oracle_seed: int = 0, gain: float = PIXEL_GAIN,
                         offset: float = PIXEL_OFFSET, sigma: float = IMAGE_NOISE_STD, side: int = IMAGE_SIDE,
                         mnist_path=None, mnist_index: int = 0, **options) -> BenchmarkProblem:
    sim = PixelwiseCamera(gain=gain, offset=offset, sigma=sigma, side=side)
    clean = _clean_image(side, mnist_path, mnist_index)
    y_obs = sim.simulate(clean, sim.sample_noise(_observation_rng(oracle_seed, 0), 1).row(0))
    oracle = TruncatedGaussianMixtureOracle([(y_obs - offset) / gain], sigma / abs(gain), sim.prior)
    return BenchmarkProblem(
        problem_id="img_pixel",
        simulator=sim,
        observations=(y_obs,),
        ground_truth=oracle,
        true_theta=clean,
        recommended=dict(_IMAGE_RECOMMENDED),
        options={"gain": gain, "offset": offset, "sigma": sigma, "side": side},
    )


def make_image_checkerboard(dim: Optional[int] = None, oracle_seed: int = 0, sigma: float = IMAGE_NOISE_STD,
                            side: int = IMAGE_SIDE, mnist_path=None, mnist_index: int = 0,
                            **options) -> BenchmarkProblem:
    sim = CheckerboardCamera(side=side, sigma=sigma)
    clean = _clean_image(side, mnist_path, mnist_index)
    y_obs = sim.simulate(clean, sim.sample_noise(_observation_rng(oracle_seed, 0), 1).row(0))
    recommended = dict(_IMAGE_RECOMMENDED)
    return BenchmarkProblem(
        problem_id="img_checker",
        simulator=sim,
        observations=(y_obs,),
        ground_truth=TruncatedLinearGaussianOracle(sim.operator, y_obs, sigma, sim.prior),
        true_theta=clean,
        recommended=recommended,
        options={"sigma": sigma, "side": side},
    )


PROBLEM_FACTORIES: Dict[str, Callable[..., BenchmarkProblem]] = {
    "mog_base": make_mog_base,
    "mog_base_dist": make_mog_base_distractors,
    "mog_two": make_mog_two,
    "mog_two_dist": make_mog_two_distractors,
    "slcp": make_slcp,
    "slcp_dist": make_slcp_distractors,
    "two_moons": make_two_moons,
    "img_pixel": make_image_pixelwise,
    "img_checker": make_image_checkerboard,
}

# Problems whose parameter dimension is set by the caller.
SCALABLE_PROBLEMS = ("mog_base", "mog_base_dist", "mog_two", "mog_two_dist")


def list_problems() -> List[str]:
    return list(PROBLEM_FACTORIES)


def make_problem(problem_id: str, dim: Optional[int] = None, oracle_seed: int = 0, **options) -> BenchmarkProblem:
    """Build a registered problem; ``options`` are passed to its factory."""
    try:
        factory = PROBLEM_FACTORIES[problem_id]
    except KeyError:
        raise ConfigurationError(
            f"Unknown problem '{problem_id}'. Available: {', '.join(PROBLEM_FACTORIES)}"
        ) from None
    if dim is not None and problem_id not in SCALABLE_PROBLEMS:
        logger.warning(f"Problem {problem_id} has a fixed dimension; ignoring dim={dim}")
        dim = None
    problem = factory(dim, oracle_seed=oracle_seed, **options)
    logger.info(
        f"Built problem {problem_id}: D={problem.dim}, D_y={problem.simulator.output_dim}, "
        f"N={problem.observation_count}, oracle={problem.ground_truth.kind.value}"
    )
    return problem


def recommended_config(problem: BenchmarkProblem, **overrides) -> ExperimentConfig:
    """ExperimentConfig for ``problem`` with its recommended settings, then ``overrides``."""
    return ExperimentConfig.for_problem(problem, **overrides)


def ground_truth_samples(problem: BenchmarkProblem, count: int, rng: np.random.Generator) -> np.ndarray:
    """Reference posterior samples, all inside the prior box; problems without one raise."""
    return problem.ground_truth_samples(count, rng)
