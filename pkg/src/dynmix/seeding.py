"""Random stream splitting.

A run is driven by one 64-bit seed. Stream ``k`` of seed ``s`` is the numpy
Generator seeded with ``SeedSequence(entropy=s, spawn_key=(k,))``; streams
with distinct ids are statistically independent, and adding a new stream id
never perturbs the draws of existing ones.

Stream ids in use: 0 environment generation, 1 action sampling.
"""
import numpy as np

ENVIRONMENT = 0
SAMPLING = 1


def stream(seed: int, stream_id: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(stream_id,)))
