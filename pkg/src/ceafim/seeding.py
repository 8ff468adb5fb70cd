"""Deterministic derivation of independent RNG seeds from a master seed."""

import numpy as np

# stream tags, kept distinct so derived seeds never collide across purposes
GROUP_ENSEMBLE = 1
OPT_ENSEMBLE = 2
REPORT_ENSEMBLE = 3
EVOLUTION = 4
LOUVAIN = 5


def derive_seed(master: int, *tags: int) -> int:
    if master < 0 or any(t < 0 for t in tags):
        raise ValueError("seeds and tags must be non-negative")
    return int(np.random.SeedSequence([master, *tags]).generate_state(1, dtype=np.uint32)[0])


def substream(master: int, *tags: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master, *tags]))
