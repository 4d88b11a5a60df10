"""Deterministic random streams.

Generator: Philox4x64 (counter-based).  Stream ``k`` of master seed ``s``
uses the two-word key ``(s, k)``, so every ensemble member owns an
independent, platform-portable stream and outputs are reproducible for any
worker count.
"""

import numpy as np


def stream(master_seed: int, stream_id: int = 0) -> np.random.Generator:
    """Return the Philox generator for (master_seed, stream_id)."""
    key = np.array([np.uint64(master_seed), np.uint64(stream_id)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
