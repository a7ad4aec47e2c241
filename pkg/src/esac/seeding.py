"""Counter-based random streams.

Every random draw in a run comes from a generator keyed by
``(master_seed, stream, *indices)`` so results never depend on scheduling
order or on how many workers evaluate the population.
"""

from __future__ import annotations

import numpy as np

# Stream tags.
PERTURB = 1
EPISODE = 2
GATE = 3
CROSSOVER = 4
SAC = 5
VALIDATION = 6
INIT = 7
BASELINE = 8


def derive_rng(master_seed: int, stream: int, *indices: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([master_seed, stream, *indices])))


def derive_seed(master_seed: int, stream: int, *indices: int) -> int:
    """63-bit integer seed; injective in practice over (stream, indices)."""
    state = np.random.SeedSequence([master_seed, stream, *indices]).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 31 ^ int(state[1])
