"""Seeded random number streams.

All Monte Carlo in this package draws from counter-based Philox generators
keyed by (master_seed, stream_id).  Distinct stream ids give statistically
independent streams under the same master seed, so parallel sweep points can
be reproduced bitwise from the (seed, stream) pair recorded in their output.
"""

import numpy as np


def stream(master_seed: int, stream_id: int = 0) -> np.random.Generator:
    """Generator for stream `stream_id` under `master_seed` (both uint64)."""
    key = np.array([master_seed, stream_id], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
