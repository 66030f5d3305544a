import numpy as np


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent stream for (seed, keys...); same keys, same stream"""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, keys)])))
