"""
Unit tests for the command-line runner.
"""
import json

import numpy as np
import pytest

from src.infrastructure.container import cleanup_container
from src.presentation.cli import EXIT_CONFIG, EXIT_OK, build_parser, flag_overrides, main

SMALL_CONFIG = {
    "seeds": 20,
    "sampling": {"candidate_count": 500, "final_count": 200},
    "mask": {"n_theta": 5, "n_noise": 5},
    "repetitions": 1,
    "c2st": {"epochs": 5},
}


@pytest.fixture(autouse=True)
def isolated_environment(monkeypatch, tmp_path):
    """Point caches at tmp_path and drop the global container afterwards."""
    monkeypatch.setenv("R2OMC_ORACLE_CACHE", str(tmp_path / "cache"))
    monkeypatch.setenv("R2OMC_OUTPUT_DIR", str(tmp_path / "results"))
    monkeypatch.setenv("R2OMC_RECORD_RUNTIME", "false")
    monkeypatch.delenv("R2OMC_WORKERS", raising=False)
    monkeypatch.delenv("R2OMC_LOG_LEVEL", raising=False)
    yield
    cleanup_container()


class TestFlagOverrides:
    """Test cases for flag parsing."""

    def test_only_given_flags(self):
        # Arrange
        args = build_parser().parse_args(["infer", "--problem", "mog_base", "--seeds", "30", "--final", "50"])

        # Act
        overrides = flag_overrides(args)

        # Assert
        assert overrides == {"seeds": 30, "sampling": {"final_count": 50}}

    @pytest.mark.parametrize("value, expected", [
        ("auto", {"mode": "twice_worst_accepted", "fixed_value": None}),
        ("0.25", {"mode": "fixed", "fixed_value": 0.25}),
    ])
    def test_epsilon_flag(self, value, expected):
        args = build_parser().parse_args(["infer", "--epsilon", value])

        assert flag_overrides(args)["epsilon_rule"] == expected


class TestMain:
    """Test cases for command exit codes and outputs."""

    def test_bad_epsilon_is_configuration_error(self):
        assert main(["infer", "--problem", "mog_base", "--epsilon", "tiny"]) == EXIT_CONFIG

    def test_out_of_range_pcg(self):
        assert main(["infer", "--problem", "mog_base", "--pcg", "1.5"]) == EXIT_CONFIG

    def test_missing_problem(self):
        assert main(["infer"]) == EXIT_CONFIG

    def test_unreadable_config_file(self, tmp_path):
        assert main(["infer", "--problem", "mog_base", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG

    def test_unknown_problem_rejected_by_parser(self):
        with pytest.raises(SystemExit):
            main(["infer", "--problem", "lotka_volterra"])

    def test_oracle_writes_samples(self, tmp_path):
        # Arrange
        out = tmp_path / "reference.npy"

        # Act
        code = main(["oracle", "--problem", "mog_two", "--dim", "2", "--count", "300", "--out", str(out)])

        # Assert
        assert code == EXIT_OK
        samples = np.load(out)
        assert samples.shape == (300, 2)
        assert list((tmp_path / "cache").glob("mog_two_d2_s0*.npy"))

    def test_frontier_of_empty_csv(self, tmp_path):
        # Arrange
        csv_path = tmp_path / "results.csv"
        csv_path.write_text("")
        svg_path = tmp_path / "frontier.svg"

        # Act
        code = main(["frontier", "--csv", str(csv_path), "--svg", str(svg_path)])

        # Assert
        assert code == EXIT_OK
        assert "No results to plot" in svg_path.read_text()

    @pytest.mark.integration
    def test_infer_writes_results(self, tmp_path):
        """Test a small run writes the results table and report."""
        # Arrange
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps(SMALL_CONFIG))
        out = tmp_path / "run"

        # Act
        code = main(["infer", "--problem", "mog_base", "--dim", "1", "--config", str(config_path),
                     "--out", str(out)])

        # Assert
        assert code == EXIT_OK
        assert (out / "results.csv").exists()
        report = json.loads((out / "report.json").read_text())
        assert len(report["repetitions"]) == 1

    @pytest.mark.integration
    def test_infer_with_small_final_count(self, tmp_path):
        """Test a final count too small for the classifier still exits cleanly."""
        # Arrange
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps(SMALL_CONFIG))
        out = tmp_path / "small"

        # Act
        code = main(["infer", "--problem", "mog_base", "--dim", "1", "--config", str(config_path),
                     "--candidates", "200", "--final", "50", "--out", str(out)])

        # Assert
        assert code == EXIT_OK
        report = json.loads((out / "report.json").read_text())
        assert report["mean_c2st"] is None
        assert "c2st_unavailable" in report["repetitions"][0]["diagnostics"]
