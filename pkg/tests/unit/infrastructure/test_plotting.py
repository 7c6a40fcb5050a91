"""
Unit tests for the SVG plot renderer.
"""
import numpy as np
import pytest

from src.infrastructure.plotting import SvgPlotRenderer


class TestSvgPlotRenderer:
    """Test cases for SvgPlotRenderer."""

    @pytest.fixture
    def renderer(self):
        return SvgPlotRenderer()

    def test_frontier(self, renderer, tmp_path):
        # Act
        path = renderer.render_frontier({"mog_base": [(2, 10), (5, 100)]}, 0.75, tmp_path / "frontier.svg")

        # Assert
        text = path.read_text()
        assert text.lstrip().startswith("<?xml")
        assert "<svg" in text

    def test_heatmap_with_missing_cells(self, renderer, tmp_path):
        # Arrange
        grid = np.array([[0.6, np.nan], [0.7, 0.55]])

        # Act
        path = renderer.render_heatmap("mog_base: mean C2ST", [1, 2], [10, 100], grid, tmp_path / "heat.svg")

        # Assert
        text = path.read_text()
        assert "0.600" in text
        assert "mog_base: mean C2ST" in text

    def test_scatter_and_notice(self, renderer, tmp_path):
        # Act
        scatter = renderer.render_scatter({"slcp": [(1.0, 0.8), (2.0, 0.7)]}, tmp_path / "scatter.svg")
        notice = renderer.render_notice("No results to plot", tmp_path / "notice.svg")

        # Assert
        assert scatter.exists()
        assert "No results to plot" in notice.read_text()

    def test_output_is_reproducible(self, renderer, tmp_path):
        """Test the same data renders to identical bytes."""
        # Act
        first = renderer.render_frontier({"mog_base": [(2, 10)]}, 0.75, tmp_path / "a.svg")
        second = renderer.render_frontier({"mog_base": [(2, 10)]}, 0.75, tmp_path / "b.svg")

        # Assert
        assert first.read_bytes() == second.read_bytes()
