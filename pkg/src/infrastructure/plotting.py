"""
SVG figures for sweep results.
Infrastructure layer - matplotlib rendering behind IPlotRenderer.
"""
import logging
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from src.domain.interfaces.plots import IPlotRenderer  # noqa: E402

logger = logging.getLogger(__name__)

# Fixed ids and no timestamp keep the SVG bytes reproducible.
_SVG_PARAMS = {"svg.hashsalt": "r2omc", "svg.fonttype": "none"}


class SvgPlotRenderer(IPlotRenderer):

    def _save(self, fig, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        logger.info(f"Wrote figure {path}")
        return path

    def render_frontier(self, series: Dict[str, List[Tuple[int, int]]], threshold: float, path: Path) -> Path:
        with plt.rc_context(_SVG_PARAMS):
            fig, ax = plt.subplots(figsize=(6, 4))
            for problem in sorted(series):
                points = sorted(series[problem])
                if not points:
                    continue
                dims, budgets = zip(*points)
                ax.plot(dims, budgets, marker="o", label=problem)
            ax.set_xlabel("Parameter dimension D")
            ax.set_ylabel("Lowest budget S")
            ax.set_title(f"Success frontier (mean C2ST <= {threshold:g})")
            ax.set_yscale("log")
            if series:
                ax.legend()
            return self._save(fig, path)

    def render_heatmap(self, title: str, dims: Sequence[int], budgets: Sequence[int],
                       grid: np.ndarray, path: Path) -> Path:
        with plt.rc_context(_SVG_PARAMS):
            fig, ax = plt.subplots(figsize=(1.2 * len(budgets) + 2, 0.6 * len(dims) + 2))
            image = ax.imshow(np.ma.masked_invalid(grid), vmin=0.5, vmax=1.0, cmap="viridis_r", aspect="auto")
            ax.set_xticks(range(len(budgets)), [str(b) for b in budgets])
            ax.set_yticks(range(len(dims)), [str(d) for d in dims])
            ax.set_xlabel("Budget S")
            ax.set_ylabel("Parameter dimension D")
            ax.set_title(title)
            for i in range(grid.shape[0]):
                for j in range(grid.shape[1]):
                    if np.isfinite(grid[i, j]):
                        ax.text(j, i, f"{grid[i, j]:.3f}", ha="center", va="center", fontsize=8)
            fig.colorbar(image, ax=ax, label="mean C2ST")
            return self._save(fig, path)

    def render_scatter(self, points: Dict[str, List[Tuple[float, float]]], path: Path) -> Path:
        with plt.rc_context(_SVG_PARAMS):
            fig, ax = plt.subplots(figsize=(6, 4))
            for problem in sorted(points):
                if not points[problem]:
                    continue
                runtimes, scores = zip(*points[problem])
                ax.scatter(runtimes, scores, label=problem, s=16)
            ax.axhline(0.5, color="grey", linestyle=":", linewidth=1)
            ax.set_xlabel("Runtime (seconds)")
            ax.set_ylabel("C2ST")
            ax.set_title("C2ST against runtime")
            if points:
                ax.legend()
            return self._save(fig, path)

    def render_notice(self, message: str, path: Path) -> Path:
        with plt.rc_context(_SVG_PARAMS):
            fig, ax = plt.subplots(figsize=(6, 2))
            ax.axis("off")
            ax.text(0.5, 0.5, message, ha="center", va="center")
            return self._save(fig, path)
