"""
Unit tests for the mixture proposal, importance weights and posterior estimates.
"""
import numpy as np
import pytest

from src.application.services.posterior_service import (
    acceptance_diagnostics,
    build_proposal,
    compute_weights,
    effective_sample_size,
    hyperbox_region_counts,
    posterior_expectation,
    proposal_density,
    proposal_log_density,
    region_counts,
    resample,
    sample_proposal,
)
from src.domain.entities.inference import (
    Hyperbox,
    Mask,
    MixtureComponent,
    OptimizationRecord,
    ProposalMixture,
    WeightedSamples,
)
from src.domain.entities.noise import NoiseDraw
from src.domain.errors import EmptyAcceptedSetError, ProposalConsistencyError, ZeroWeightsError
from src.domain.value_objects.prior import UniformBoxPrior
from src.infrastructure.simulators.mog import GaussianLocationSimulator


def _interval(low, high):
    center = 0.5 * (low + high)
    half = 0.5 * (high - low)
    return Hyperbox(center=np.array([center]), axes=np.eye(1), lower=np.array([half]), upper=np.array([half]))


def _record(seed_index, obs_index=0, accepted=True, theta=-1.0):
    return OptimizationRecord(obs_index=obs_index, seed_index=seed_index, theta_star=np.array([theta]),
                              d_star=0.0, noise=NoiseDraw.single(gaussian=[0.0]), accepted=accepted)


class TestProposal:
    """Test cases for building, evaluating and sampling the proposal."""

    @pytest.fixture
    def mixture(self):
        return ProposalMixture(components=(
            MixtureComponent(box=_interval(0.0, 1.0), obs_index=0, seed_index=0),
            MixtureComponent(box=_interval(0.5, 1.0), obs_index=1, seed_index=0),
        ))

    def test_build_uses_accepted_records_only(self):
        # Arrange
        records = [_record(0), _record(1, accepted=False)]
        boxes = [_interval(0.0, 1.0), _interval(2.0, 3.0)]

        # Act
        mixture = build_proposal(records, boxes)

        # Assert
        assert mixture.size == 1
        assert mixture.components[0].seed_index == 0

    def test_build_without_accepted_records(self):
        with pytest.raises(EmptyAcceptedSetError):
            build_proposal([_record(0, accepted=False)], [_interval(0.0, 1.0)])

    def test_build_requires_pairs(self):
        with pytest.raises(ValueError):
            build_proposal([_record(0)], [])

    def test_density_averages_components(self, mixture):
        """Test q is the equal-weight average of 1/volume terms."""
        # Act
        densities = proposal_density(mixture, np.array([[0.25], [0.75], [2.0]]))

        # Assert
        np.testing.assert_allclose(densities, [0.5, 1.5, 0.0])
        assert proposal_density(mixture, np.array([0.75])) == pytest.approx(1.5)

    def test_log_density_outside(self, mixture):
        assert proposal_log_density(mixture, np.array([[-1.0]]))[0] == -np.inf

    def test_samples_follow_mixture(self, mixture):
        # Act
        samples, components = sample_proposal(mixture, 20000, np.random.default_rng(0), return_components=True)

        # Assert
        assert samples.shape == (20000, 1)
        assert ((samples >= 0.0) & (samples <= 1.0)).all()
        assert np.mean(samples[:, 0] >= 0.5) == pytest.approx(0.75, abs=0.02)
        assert ((samples[components == 1, 0] >= 0.5)).all()

    def test_sampling_is_deterministic(self, mixture):
        first = sample_proposal(mixture, 10, np.random.default_rng(4))
        second = sample_proposal(mixture, 10, np.random.default_rng(4))

        np.testing.assert_array_equal(first, second)

    def test_rotated_components(self):
        """Test samples of a rotated box lie inside it and have positive density."""
        # Arrange
        angle = np.pi / 6
        rotation = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
        box = Hyperbox(center=np.array([0.5, 0.5]), axes=rotation, lower=np.array([0.1, 0.2]),
                       upper=np.array([0.3, 0.1]))
        mixture = ProposalMixture(components=(MixtureComponent(box=box, obs_index=0, seed_index=0),))

        # Act
        samples = sample_proposal(mixture, 500, np.random.default_rng(1))

        # Assert
        np.testing.assert_allclose(np.exp(proposal_log_density(mixture, samples)), 1.0 / box.volume)


class TestRegionCounts:
    """Test cases for region_counts and hyperbox_region_counts."""

    def test_counts_accepted_seeds_within_epsilon(self):
        # Arrange
        simulator = GaussianLocationSimulator(dim=1)
        records = [_record(0), _record(1), _record(2, accepted=False)]
        thetas = np.array([[-1.0], [-0.9], [0.0]])

        # Act
        counts = region_counts(simulator, thetas, records, [[0.0]], 0.04, Mask.full(1))

        # Assert
        np.testing.assert_array_equal(counts, [[2], [2], [0]])

    def test_counts_per_observation(self):
        # Arrange
        simulator = GaussianLocationSimulator(dim=1)
        records = [_record(0, obs_index=0), _record(0, obs_index=1)]

        # Act
        counts = region_counts(simulator, np.array([[-1.0]]), records, [[0.0], [2.0]], 0.04, Mask.full(1))

        # Assert
        np.testing.assert_array_equal(counts, [[1, 0]])

    def test_non_positive_epsilon(self):
        with pytest.raises(ValueError):
            region_counts(GaussianLocationSimulator(dim=1), np.zeros((1, 1)), [_record(0)], [[0.0]], 0.0,
                          Mask.full(1))

    def test_hyperbox_counts(self):
        # Arrange
        mixture = ProposalMixture(components=(
            MixtureComponent(box=_interval(0.0, 1.0), obs_index=0, seed_index=0),
            MixtureComponent(box=_interval(0.5, 1.0), obs_index=0, seed_index=1),
            MixtureComponent(box=_interval(0.0, 0.6), obs_index=1, seed_index=0),
        ))

        # Act
        counts = hyperbox_region_counts(mixture, np.array([[0.55], [0.9]]), 2)

        # Assert
        np.testing.assert_array_equal(counts, [[2, 1], [2, 0]])


class TestWeights:
    """Test cases for weights, resampling and posterior summaries."""

    @pytest.fixture
    def prior(self):
        return UniformBoxPrior.cube(1, -3.0, 3.0)

    @pytest.fixture
    def mixture(self):
        return ProposalMixture(components=(MixtureComponent(box=_interval(0.0, 1.0), obs_index=0, seed_index=0),))

    def test_weight_formula(self, prior, mixture):
        """Test w = p/q times the count product."""
        # Act
        samples = compute_weights(np.array([[0.5], [0.2]]), prior, mixture, np.array([[2], [0]]))

        # Assert
        np.testing.assert_allclose(samples.weights, [2.0 / 6.0, 0.0])

    def test_draw_outside_proposal(self, prior, mixture):
        with pytest.raises(ProposalConsistencyError):
            compute_weights(np.array([[2.0]]), prior, mixture, np.array([[1]]))

    def test_resample_follows_weights(self):
        # Arrange
        samples = WeightedSamples.from_weights(np.array([[0.0], [1.0], [2.0]]), [0.0, 1.0, 0.0])

        # Act
        drawn = resample(samples, 50, np.random.default_rng(0))

        # Assert
        np.testing.assert_array_equal(drawn, np.ones((50, 1)))

    def test_resample_zero_weights(self):
        samples = WeightedSamples.from_weights(np.zeros((2, 1)), [0.0, 0.0])

        with pytest.raises(ZeroWeightsError):
            resample(samples, 5, np.random.default_rng(0))

    def test_posterior_expectation(self):
        samples = WeightedSamples.from_weights(np.array([[0.0], [1.0]]), [1.0, 3.0])

        assert posterior_expectation(samples, lambda theta: theta[0]) == pytest.approx(0.75)

    @pytest.mark.parametrize("weights, expected", [
        ([1.0, 1.0, 1.0, 1.0], 4.0),
        ([1.0, 0.0, 0.0], 1.0),
        ([0.0, 0.0], 0.0),
        ([1.0, 3.0], 1.6),
    ])
    def test_effective_sample_size(self, weights, expected):
        assert effective_sample_size(weights) == pytest.approx(expected)

    def test_effective_sample_size_of_samples(self):
        samples = WeightedSamples.from_weights(np.zeros((2, 1)), [1.0, 3.0])

        assert effective_sample_size(samples) == pytest.approx(1.6)

    def test_acceptance_diagnostics(self):
        # Arrange
        samples = WeightedSamples(
            thetas=np.zeros((3, 1)),
            log_proposal=np.zeros(3),
            log_prior=np.zeros(3),
            counts=np.array([[1, 0], [0, 0], [2, 1]]),
        )

        # Act
        positive, per_observation = acceptance_diagnostics(samples)

        # Assert
        assert positive == pytest.approx(1.0 / 3.0)
        np.testing.assert_allclose(per_observation, [2.0 / 3.0, 1.0 / 3.0])
