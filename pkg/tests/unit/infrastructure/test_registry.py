"""
Unit tests for the benchmark problem registry.
"""
import numpy as np
import pytest

from src.domain.errors import ConfigurationError
from src.domain.value_objects.common import AxesMode, IndicatorMode, OracleKind
from src.infrastructure.simulators.registry import (
    PROBLEM_FACTORIES,
    ground_truth_samples,
    list_problems,
    make_problem,
    recommended_config,
)


class TestRegistry:
    """Test cases for make_problem and its helpers."""

    def test_all_problems_registered(self):
        assert list_problems() == ["mog_base", "mog_base_dist", "mog_two", "mog_two_dist", "slcp", "slcp_dist",
                                   "two_moons", "img_pixel", "img_checker"]

    def test_unknown_problem(self):
        with pytest.raises(ConfigurationError):
            make_problem("lotka_volterra")

    @pytest.mark.parametrize("problem_id, output_dim", [
        ("mog_base", 5), ("mog_base_dist", 23), ("mog_two", 5), ("mog_two_dist", 23),
    ])
    def test_scalable_dimensions(self, problem_id, output_dim):
        # Act
        problem = make_problem(problem_id, dim=5)

        # Assert
        assert problem.dim == 5
        assert problem.simulator.output_dim == output_dim
        np.testing.assert_array_equal(problem.observations[0], np.zeros(output_dim))
        assert problem.ground_truth.kind == OracleKind.CLOSED_FORM

    def test_fixed_dimension_ignores_dim(self):
        problem = make_problem("two_moons", dim=7, abc_draws=1000)

        assert problem.dim == 2

    def test_slcp_layouts(self):
        """Test i.i.d. observations by default and one stacked observation on request."""
        # Act
        iid = make_problem("slcp")
        joint = make_problem("slcp_dist", layout="joint")

        # Assert
        assert iid.observation_count == 4
        assert iid.simulator.output_dim == 2
        assert joint.observation_count == 1
        assert joint.simulator.output_dim == 100
        assert iid.ground_truth.kind == OracleKind.MCMC_REFERENCE
        np.testing.assert_array_equal(iid.true_theta, [0.7, -2.9, -1.0, -0.9, 0.6])

    def test_slcp_unknown_layout(self):
        with pytest.raises(ConfigurationError):
            make_problem("slcp", layout="stacked")

    def test_observations_depend_on_oracle_seed(self):
        first = make_problem("slcp", oracle_seed=0)
        again = make_problem("slcp", oracle_seed=0)
        other = make_problem("slcp", oracle_seed=1)

        np.testing.assert_array_equal(first.observations[0], again.observations[0])
        assert not np.array_equal(first.observations[0], other.observations[0])

    def test_image_problems(self):
        # Act
        pixel = make_problem("img_pixel")
        checker = make_problem("img_checker")

        # Assert
        assert pixel.dim == 784
        assert checker.dim == 784
        config = recommended_config(pixel)
        assert config.use_mask is False
        assert config.line_search.axes == AxesMode.IDENTITY
        assert config.sampling.indicator == IndicatorMode.HYPERBOX

    def test_pixel_reference_inverts_camera(self):
        # Arrange
        problem = make_problem("img_pixel")

        # Act
        mean, _ = problem.ground_truth.moments()

        # Assert
        assert np.corrcoef(mean, problem.true_theta)[0, 1] > 0.8

    def test_checkerboard_reference_samples_the_box(self):
        """Test the checkerboard reference draws posterior samples inside the unit box."""
        # Arrange
        problem = make_problem("img_checker", side=6)

        # Act
        samples = problem.ground_truth_samples(80, np.random.default_rng(0))

        # Assert
        assert problem.ground_truth.kind == OracleKind.MCMC_REFERENCE
        assert samples.shape == (80, 36)
        assert problem.prior.contains(samples).all()
        assert problem.ground_truth.parameters["condition_number"] > 10.0

    def test_recommended_config_overrides(self):
        config = recommended_config(make_problem("mog_two", dim=3), seeds=40)

        assert config.seeds == 40
        assert config.dim == 3
        assert config.epsilon_rule.fixed_value == 0.01
        assert config.sampling.indicator == IndicatorMode.HYPERBOX

    def test_ground_truth_inside_prior(self):
        problem = make_problem("mog_two_dist", dim=2)

        samples = ground_truth_samples(problem, 500, np.random.default_rng(0))

        assert samples.shape == (500, 2)
        assert problem.prior.contains(samples).all()

    def test_factory_table_matches_listing(self):
        assert set(PROBLEM_FACTORIES) == set(list_problems())
