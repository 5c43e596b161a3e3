"""Seeded random number stream used by all samplers."""

from __future__ import annotations

import numpy as np


class RngStream:
    """Reproducible PCG64 stream.

    The same seed and the same call sequence yield the same draws on every
    run of a given environment.  Each chain must own its stream exclusively;
    parallel chains use independent streams.
    """

    def __init__(self, seed: int):
        if not (0 <= int(seed) < 2**64):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def __repr__(self):
        return f"RngStream(seed={self.seed})"

    def random(self, size=None):
        """Uniform draws on [0, 1)."""
        return self._gen.random(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def standard_normal(self, size=None):
        return self._gen.standard_normal(size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self._gen.normal(loc, scale, size)

    def gamma(self, shape, size=None):
        """Gamma draws with unit scale."""
        return self._gen.gamma(shape, 1.0, size)
