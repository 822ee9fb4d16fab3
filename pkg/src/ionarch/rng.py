"""Reproducible random streams.

All stochastic components draw from counter-based Philox generators keyed by
the user seed, with disjoint streams obtained through jumps.  The same seed
and stream index produce the same draws on any platform and regardless of how
work is split across processes.
"""

from __future__ import annotations

import numpy as np


def philox_stream(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator for stream ``stream`` of the seed's Philox sequence."""
    bitgen = np.random.Philox(key=seed & (2**256 - 1))
    if stream:
        bitgen = bitgen.jumped(stream)
    return np.random.Generator(bitgen)
