"""
Unit tests for pipeline entities: mask, records, hyperboxes, mixtures and weighted samples.
"""
import numpy as np
import pytest

from src.domain.entities.inference import (
    Hyperbox,
    Mask,
    MixtureComponent,
    OptimizationRecord,
    ProposalMixture,
    WeightedSamples,
)
from src.domain.entities.noise import NoiseDraw
from src.domain.errors import NoInformativeDimensionsError


def _box(center, lower, upper, axes=None):
    center = np.asarray(center, dtype=float)
    return Hyperbox(
        center=center,
        axes=np.eye(center.shape[0]) if axes is None else axes,
        lower=np.asarray(lower, dtype=float),
        upper=np.asarray(upper, dtype=float),
    )


class TestMask:
    """Test cases for Mask."""

    def test_from_estimates(self):
        # Act
        mask = Mask.from_estimates([0.0, 1.0, 2.0], threshold=0.5)

        # Assert
        np.testing.assert_array_equal(mask.active, [False, True, True])
        assert mask.active_count == 2
        assert mask.output_dim == 3

    def test_active_must_match_estimates(self):
        """Test inconsistent flags are rejected."""
        with pytest.raises(ValueError):
            Mask(active=np.array([True, True]), threshold=0.5, estimates=np.array([0.0, 1.0]))

    def test_require_active_raises_when_empty(self):
        mask = Mask.from_estimates(np.zeros(4), threshold=0.0)

        with pytest.raises(NoInformativeDimensionsError):
            mask.require_active()

    def test_full(self):
        assert Mask.full(5).active.all()

    def test_summary(self):
        summary = Mask.from_estimates([0.0, 3.0], 1.0).summary()

        assert summary["active"] == [False, True]
        assert summary["active_count"] == 1


class TestOptimizationRecord:
    """Test cases for OptimizationRecord."""

    def test_negative_distance_rejected(self):
        with pytest.raises(ValueError):
            OptimizationRecord(obs_index=0, seed_index=0, theta_star=np.zeros(1), d_star=-1.0,
                               noise=NoiseDraw.single(gaussian=[0.0]))

    def test_batch_noise_rejected(self):
        with pytest.raises(ValueError):
            OptimizationRecord(obs_index=0, seed_index=0, theta_star=np.zeros(1), d_star=0.0,
                               noise=NoiseDraw.single(gaussian=[0.0]).repeat(2))

    def test_to_row(self):
        # Arrange
        record = OptimizationRecord(obs_index=1, seed_index=4, theta_star=np.array([0.5, -0.5]), d_star=0.25,
                                    noise=NoiseDraw.single(gaussian=[0.0, 0.0]), accepted=True)

        # Act
        row = record.to_row()

        # Assert
        assert row == {"n": 1, "i": 4, "d_star": 0.25, "accepted": 1, "failed": 0,
                       "theta_star_0": 0.5, "theta_star_1": -0.5}
        assert record.key == (1, 4)


class TestHyperbox:
    """Test cases for Hyperbox."""

    def test_volume_and_sides(self):
        # Act
        box = _box([0.0, 0.0], [0.1, 0.2], [0.1, 0.2])

        # Assert
        np.testing.assert_allclose(box.side_lengths, [0.2, 0.4])
        assert box.volume == pytest.approx(0.08)
        assert box.log_volume == pytest.approx(np.log(0.08))

    def test_axes_must_be_orthonormal(self):
        with pytest.raises(ValueError):
            _box([0.0, 0.0], [0.1, 0.1], [0.1, 0.1], axes=np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_extents_must_be_positive(self):
        with pytest.raises(ValueError):
            _box([0.0], [0.0], [0.0])
        with pytest.raises(ValueError):
            _box([0.0], [-0.1], [0.2])

    def test_local_coordinates_follow_axes(self):
        # Arrange
        angle = np.pi / 4
        rotation = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
        box = _box([1.0, 1.0], [0.5, 0.5], [0.5, 0.5], axes=rotation)

        # Act
        local = box.local_coordinates(np.array([1.0, 1.0]) + 0.3 * rotation[:, 1])

        # Assert
        np.testing.assert_allclose(local, [0.0, 0.3], atol=1e-12)


class TestProposalMixture:
    """Test cases for ProposalMixture."""

    def test_component_weight(self):
        # Arrange
        components = [MixtureComponent(box=_box([float(k)], [0.1], [0.1]), obs_index=0, seed_index=k)
                      for k in range(4)]

        # Act
        mixture = ProposalMixture(components=tuple(components))

        # Assert
        assert mixture.size == 4
        assert mixture.component_weight == 0.25
        assert mixture.dim == 1

    def test_requires_components(self):
        with pytest.raises(ValueError):
            ProposalMixture(components=())

    def test_dimensions_must_agree(self):
        components = (
            MixtureComponent(box=_box([0.0], [0.1], [0.1]), obs_index=0, seed_index=0),
            MixtureComponent(box=_box([0.0, 0.0], [0.1, 0.1], [0.1, 0.1]), obs_index=0, seed_index=1),
        )
        with pytest.raises(ValueError):
            ProposalMixture(components=components)


class TestWeightedSamples:
    """Test cases for WeightedSamples."""

    def test_log_weights_from_densities_and_counts(self):
        """Test w = p/q · Π counts with a zero count giving zero weight."""
        # Act
        samples = WeightedSamples(
            thetas=np.array([[0.0], [1.0], [2.0]]),
            log_proposal=np.log([0.5, 1.0, 2.0]),
            log_prior=np.log([0.25, 0.25, 0.25]),
            counts=np.array([[2, 1], [1, 3], [0, 5]]),
        )

        # Assert
        np.testing.assert_allclose(samples.weights, [1.0, 0.75, 0.0])
        np.testing.assert_array_equal(samples.positive, [True, True, False])
        assert samples[1].weight == pytest.approx(0.75)
        assert samples[0].proposal_density == pytest.approx(0.5)

    def test_normalized_weights(self):
        # Arrange
        samples = WeightedSamples.from_weights(np.arange(3.0), [1.0, 3.0, 0.0])

        # Act
        normalized = samples.normalized_weights()

        # Assert
        np.testing.assert_allclose(normalized, [0.25, 0.75, 0.0])

    def test_normalized_weights_all_zero(self):
        samples = WeightedSamples.from_weights(np.arange(2.0), [0.0, 0.0])

        assert samples.normalized_weights() is None

    def test_tiny_log_weights_do_not_underflow(self):
        """Test weights far below float range still normalize."""
        samples = WeightedSamples(
            thetas=np.zeros((2, 1)),
            log_proposal=np.array([2000.0, 2000.0 + np.log(2.0)]),
            log_prior=np.zeros(2),
            counts=np.ones((2, 1)),
        )

        np.testing.assert_allclose(samples.normalized_weights(), [2.0 / 3.0, 1.0 / 3.0])

    def test_columns_must_align(self):
        with pytest.raises(ValueError):
            WeightedSamples(thetas=np.zeros((2, 1)), log_proposal=np.zeros(3), log_prior=np.zeros(2),
                            counts=np.ones((2, 1)))

    def test_to_rows(self):
        # Arrange
        samples = WeightedSamples.from_weights(np.array([[0.5, 1.5]]), [2.0])

        # Act
        rows = samples.to_rows()

        # Assert
        assert rows[0]["theta_0"] == 0.5
        assert rows[0]["theta_1"] == 1.5
        assert rows[0]["count_0"] == 1
        assert rows[0]["w"] == pytest.approx(2.0)
