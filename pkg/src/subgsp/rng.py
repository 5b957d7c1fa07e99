"""Deterministic random-stream management.

A single 64-bit experiment seed is expanded into independent per-trial
streams through ``SeedSequence`` spawn keys, so changing the trial count
never perturbs the streams of earlier trials.
"""

import numpy as np


def stream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the stream identified by ``(seed, *key)``.

    The same (seed, key) always yields a bit-identical stream.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key)))


def child_seed(seed: int, *key: int) -> int:
    """Derived integer seed for handing to APIs that take a plain seed."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
