"""Seeded randomness with three independent sub-streams.

Sample draws, block draws, and snapshot draws come from separate child
generators of one seed, so solver variants that consume the streams in
the same per-epoch order see bitwise-identical randomness even when one
of them never touches a given stream.
"""

from __future__ import annotations

import numpy as np


class RngStreams:
    """Three decoupled generators derived from a single integer seed."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        kids = np.random.SeedSequence(self.seed).spawn(3)
        self.samples = np.random.Generator(np.random.PCG64(kids[0]))
        self.blocks = np.random.Generator(np.random.PCG64(kids[1]))
        self.snapshots = np.random.Generator(np.random.PCG64(kids[2]))

    def epoch_draws(self, m: int, n: int, b: int, B: int):
        """All randomness of one epoch, drawn up front.

        Returns (sample index array (m, b), block index array (m,),
        snapshot uniform in [0, 1)). Batched draws match element-wise
        sequential draws for these generators, so pre-drawing does not
        change the sequences.
        """
        idx = self.samples.integers(0, n, size=(m, b))
        blk = self.blocks.integers(0, B, size=m)
        u = float(self.snapshots.random())
        return idx, blk, u

    def spawn(self, tag: int) -> "RngStreams":
        """Derived streams for a sub-run (one reduction round, one restart)."""
        return RngStreams(np.random.SeedSequence([self.seed, int(tag)]).generate_state(1)[0])
