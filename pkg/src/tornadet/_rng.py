import numpy as np


def derived_rng(seed: int, *keys: int) -> np.random.Generator:
    """PCG64 stream determined by ``seed`` and ``keys`` alone.

    Streams for different key tuples are statistically independent, so work
    split across threads or processes reproduces a serial run exactly.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))
