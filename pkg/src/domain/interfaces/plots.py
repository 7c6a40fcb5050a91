"""
Plot rendering contract.
Following clean architecture principles - abstract contract for report figures.
"""
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np


class IPlotRenderer(ABC):
    """Writes self-contained figure files for sweep results."""

    @abstractmethod
    def render_frontier(self, series: Dict[str, List[Tuple[int, int]]], threshold: float, path: Path) -> Path:
        """Lowest successful budget per D, one line per problem."""
        pass

    @abstractmethod
    def render_heatmap(self, title: str, dims: Sequence[int], budgets: Sequence[int],
                       grid: np.ndarray, path: Path) -> Path:
        """Mean C2ST per (D, budget) cell; NaN cells were not run."""
        pass

    @abstractmethod
    def render_scatter(self, points: Dict[str, List[Tuple[float, float]]], path: Path) -> Path:
        """C2ST against runtime, one marker set per problem."""
        pass

    @abstractmethod
    def render_notice(self, message: str, path: Path) -> Path:
        """An empty figure carrying only ``message``."""
        pass
