"""
Acceptance tests on the benchmark problems.
Full pipeline runs scored against reference posteriors; these take minutes.
"""
import numpy as np
import pytest

from src.application.services.c2st_service import c2st
from src.application.services.inference_service import InferenceService
from src.domain.value_objects.common import C2stConfig, EpsilonRule, IndicatorMode, MaskSettings, SamplingConfig
from src.infrastructure.container import cleanup_container
from src.infrastructure.oracles import rejection_abc
from src.infrastructure.simulators.registry import make_problem, recommended_config
from src.presentation.cli import EXIT_OK, main

pytestmark = pytest.mark.slow


@pytest.fixture
def service():
    return InferenceService()


class TestPosteriorQuality:
    """C2ST and moment checks against the reference posteriors."""

    @pytest.mark.parametrize("dim", [2, 10])
    @pytest.mark.parametrize("problem_id", ["mog_base", "mog_base_dist", "mog_two", "mog_two_dist"])
    def test_location_models(self, service, problem_id, dim):
        # Arrange
        problem = make_problem(problem_id, dim=dim)
        config = recommended_config(problem, seeds=1000, repetitions=3)

        # Act
        report = service.run_experiment(problem, config)

        # Assert
        assert report.status.success is True
        assert len(report.c2st_scores) == 3
        assert report.mean_c2st <= 0.75

    def test_two_modes_both_hold_mass(self, service):
        """Test each mode of the two-mode model keeps at least a fifth of the samples."""
        # Arrange
        problem = make_problem("mog_two", dim=2)
        config = recommended_config(problem, seeds=1000)

        # Act
        samples, report = service.run_inference(problem, config, run_seed=0)

        # Assert
        assert report.status.success is True
        positive = np.mean(samples[:, 0] > 0)
        assert 0.2 <= positive <= 0.8

    def test_two_moons(self, service):
        # Arrange
        problem = make_problem("two_moons")
        config = recommended_config(problem, seeds=1000, repetitions=5)

        # Act
        report = service.run_experiment(problem, config)

        # Assert
        assert report.status.success is True
        assert len(report.c2st_scores) == 5
        assert report.mean_c2st <= 0.65

    def test_two_moons_covers_both_crescents(self, service):
        # Arrange
        problem = make_problem("two_moons")
        config = recommended_config(problem, seeds=1000, repetitions=1)

        # Act
        samples, _ = service.run_inference(problem, config, run_seed=0)

        # Assert
        upper = np.mean(samples.sum(axis=1) > 0)
        assert 0.2 <= upper <= 0.8

    def test_slcp(self, service):
        # Arrange
        problem = make_problem("slcp")
        config = recommended_config(problem, seeds=1000, repetitions=3)

        # Act
        report = service.run_experiment(problem, config)

        # Assert
        assert report.status.success is True
        assert len(report.c2st_scores) == 3
        assert report.mean_c2st <= 0.85

    def test_slcp_reference_is_self_consistent(self):
        """Test two independent MCMC reference runs are indistinguishable to the classifier."""
        # Arrange
        oracle = make_problem("slcp").ground_truth

        # Act
        first = oracle.sample(1000, np.random.default_rng(1))
        second = oracle.sample(1000, np.random.default_rng(2))

        # Assert
        assert max(oracle.last_rhat) < 1.05
        assert c2st(first, second).value <= 0.55

    def test_pixelwise_denoising(self, service):
        """Test the posterior mean matches the analytic truncated-Gaussian mean."""
        # Arrange
        problem = make_problem("img_pixel")
        config = recommended_config(problem)

        # Act
        samples, report = service.run_inference(problem, config, run_seed=0)

        # Assert
        assert report.status.success is True
        reference_mean, _ = problem.ground_truth.moments()
        assert np.mean(np.abs(samples.mean(axis=0) - reference_mean)) <= 0.05

    def test_checkerboard_denoising(self, service):
        """Test the posterior mean matches the truncated-Gaussian reference mean."""
        # Arrange
        problem = make_problem("img_checker")
        config = recommended_config(problem)

        # Act
        samples, report = service.run_inference(problem, config, run_seed=0)

        # Assert
        assert report.status.success is True
        assert samples.shape == (1000, 784)
        assert problem.prior.contains(samples).all()
        reference_mean, _ = problem.ground_truth.moments()
        assert np.mean(np.abs(samples.mean(axis=0) - reference_mean)) <= 0.1

    def test_matches_rejection_abc_in_one_dimension(self, service):
        """Test moments agree with rejection ABC at the same epsilon."""
        # Arrange
        problem = make_problem("mog_base", dim=1)
        config = recommended_config(problem, seeds=200, mask=MaskSettings(n_theta=10, n_noise=10),
                                    epsilon_rule=EpsilonRule.fixed(0.1),
                                    sampling=SamplingConfig(candidate_count=10000, final_count=1000))

        # Act
        samples, _ = service.run_inference(problem, config, run_seed=0)
        abc = rejection_abc(problem.simulator, problem.observations[0], 1_000_000, 0.1, np.random.default_rng(0))

        # Assert
        assert config.sampling.indicator == IndicatorMode.SIMULATOR
        assert samples.mean() == pytest.approx(abc.mean(), abs=0.05)
        assert samples.var() == pytest.approx(abc.var(), abs=0.02)


class TestC2stCalibration:
    """The classifier test is at chance on identical distributions."""

    def test_null_mean(self):
        # Arrange
        scores = []

        # Act
        for repetition in range(20):
            rng = np.random.default_rng(repetition)
            scores.append(c2st(rng.standard_normal((1000, 2)), rng.standard_normal((1000, 2)),
                               C2stConfig(seed=repetition)).value)

        # Assert
        assert 0.47 <= np.mean(scores) <= 0.53


class TestDeterminism:
    """Identical seeds give identical result files."""

    def test_results_are_byte_identical(self, monkeypatch, tmp_path):
        # Arrange
        monkeypatch.setenv("R2OMC_RECORD_RUNTIME", "false")
        monkeypatch.setenv("R2OMC_ORACLE_CACHE", str(tmp_path / "cache"))
        flags = ["infer", "--problem", "mog_two", "--dim", "2", "--seeds", "50", "--candidates", "1000",
                 "--final", "500", "--reps", "2", "--master-seed", "11"]

        # Act
        first = main(flags + ["--out", str(tmp_path / "first")])
        second = main(flags + ["--out", str(tmp_path / "second")])
        cleanup_container()

        # Assert
        assert first == second == EXIT_OK
        assert (tmp_path / "first" / "results.csv").read_bytes() == (tmp_path / "second" / "results.csv").read_bytes()
