"""
Seed derivation for reproducible parallel sampling.

All randomness flows through counter-based Philox generators keyed by a
``SeedSequence``. A stream is identified by a root seed plus a spawn key,
so streams for different rows or replicas never depend on the order in
which they are created.
"""

import numpy as np

from src.utils.errors import WignerSpikesError


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if seed < 0:
        raise WignerSpikesError("invalid-parameter", f"seed must be non-negative, got {seed}")
    return seed


def stream(seed: int, *key: int) -> np.random.Generator:
    """Get the Philox generator for ``seed`` and spawn key ``key``.

    Args:
        seed: Non-negative root seed
        key: Non-negative integers identifying the sub-stream (row, replica, ...)

    Returns:
        Independent numpy Generator; identical arguments give identical draws
    """
    sequence = np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(sequence))


def derive_seed(seed: int, *key: int) -> int:
    """Derive a 64-bit child seed from a root seed and a spawn key"""
    sequence = np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def replica_seed(master_seed: int, replica_index: int) -> int:
    """Seed for one Monte Carlo replica, a pure function of (master_seed, index)"""
    return derive_seed(master_seed, replica_index)
