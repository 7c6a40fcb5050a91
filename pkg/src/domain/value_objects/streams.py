"""
Counter-based random streams.
Domain layer - value object.

Every random draw in the pipeline comes from a Philox generator whose
SeedSequence spawn key is (purpose, *counters). Two streams with different
keys are independent, and a stream depends only on its key, never on the
order in which other streams were consumed.
"""
from dataclasses import dataclass
from enum import IntEnum

import numpy as np


class StreamPurpose(IntEnum):
    MASK = 1
    NOISE = 2
    INIT = 3
    PROPOSAL = 4
    RESAMPLE = 5
    OBSERVATION = 6
    ORACLE = 7
    C2ST = 8
    REPETITION = 9


def stream(master_seed: int, purpose: StreamPurpose, *counters: int) -> np.random.Generator:
    """Generator for the stream keyed by (purpose, *counters) under ``master_seed``."""
    key = (int(purpose),) + tuple(int(c) for c in counters)
    sequence = np.random.SeedSequence(entropy=int(master_seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(sequence))


def derive_seed(master_seed: int, purpose: StreamPurpose, *counters: int) -> int:
    """A non-negative 63-bit integer seed derived from a stream key."""
    key = (int(purpose),) + tuple(int(c) for c in counters)
    state = np.random.SeedSequence(entropy=int(master_seed), spawn_key=key).generate_state(1, np.uint64)
    return int(state[0] >> np.uint64(1))


@dataclass(frozen=True)
class RandomStreams:
    """Stream factory bound to one master seed."""
    master_seed: int

    def generator(self, purpose: StreamPurpose, *counters: int) -> np.random.Generator:
        return stream(self.master_seed, purpose, *counters)

    def seed(self, purpose: StreamPurpose, *counters: int) -> int:
        return derive_seed(self.master_seed, purpose, *counters)
