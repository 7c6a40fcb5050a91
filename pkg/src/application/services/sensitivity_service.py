"""
Sensitivity analysis: detect output dimensions that carry no information about θ.
Application layer - runs before any observation is seen.
"""
import logging
from typing import Optional

import numpy as np

from src.domain.entities.experiment import BudgetLedger
from src.domain.entities.inference import Mask
from src.domain.interfaces.simulators import DifferentiableSimulator

logger = logging.getLogger(__name__)

# Upper bound on Jacobian entries materialized per chunk.
_CHUNK_ENTRIES = 4_000_000


def compute_mask(
    sim: DifferentiableSimulator,
    n_theta: int,
    n_noise: int,
    threshold: float,
    rng: np.random.Generator,
    ledger: Optional[BudgetLedger] = None,
) -> Mask:
    """
    Monte Carlo estimate of E‖∇_θ g_k‖ per output dimension k.

    Averages Jacobian row norms over the full grid of n_theta prior draws and
    n_noise noise draws; dimensions with estimate above ``threshold`` stay active.
    """
    if n_theta < 1 or n_noise < 1:
        raise ValueError("n_theta and n_noise must be at least 1")
    if threshold < 0:
        raise ValueError("threshold must be non-negative")

    thetas = sim.prior.sample(rng, n_theta)
    noise = sim.sample_noise(rng, n_noise)

    pairs = n_theta * n_noise
    theta_index = np.repeat(np.arange(n_theta), n_noise)
    noise_index = np.tile(np.arange(n_noise), n_theta)
    chunk = max(1, _CHUNK_ENTRIES // max(1, sim.output_dim * sim.param_dim))

    totals = np.zeros(sim.output_dim)
    for start in range(0, pairs, chunk):
        stop = min(start + chunk, pairs)
        norms = sim.jacobian_row_norms_batch(thetas[theta_index[start:stop]], noise.take(noise_index[start:stop]))
        if ledger is not None:
            ledger.record(stop - start)
        totals += norms.sum(axis=0)

    mask = Mask.from_estimates(totals / pairs, threshold)
    logger.info(
        f"Sensitivity mask computed: {mask.active_count} of {mask.output_dim} output dimensions active"
    )
    return mask
